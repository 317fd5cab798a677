#pragma once

#include "nlw/interpolation.hpp"
#include "nlw/kernels.hpp"

namespace nlw {

// Explicit constants of the expel, Dirac-chain and Phi estimates for a (d, theta, eta) triple.
// Fields without suffix are the values the certificates use; *_printed are the
// closed forms as originally stated, reported next to them.
struct ConstantSet {
  int d = 1;
  double alpha_d = 0, c_theta = 0, kappa = 0;
  bool blowup = false;
  double s = 0, c_s = 0;
  double eta_half = 0, eta_sixth = 0;  // unscaled profile at 1/2 and 1/6

  // set-to-set step: W <= set_step / sqrt(min(|A|,|B|) inf eta)
  double set_step = 0;
  double C_ds = 0;           // expel through dyadic annuli
  double C_dtheta = 0;       // Dirac chain slope (per |x-y|/eps / sqrt(eta(1/2)))
  double C_dtheta_eta = 0;   // Dirac chain offset
  double C_dtheta_s = 0;     // Phi prefactor

  double C_ds_tilde = 0;
  double C_ds_printed = 0;
  double C_dtheta_printed = 0;
  double C_dtheta_eta_printed = 0;
  double C_dtheta_s_printed = 0;
};

ConstantSet assemble_constants(const Interpolation& theta, const RadialKernel& eta);

// Length bounds (square them for action bounds); ratio = delta / eps.
double expel_annuli_length_bound(const ConstantSet& c, double ratio, bool printed = false);
double expel_boundary_length_bound(const ConstantSet& c, const RadialKernel& eta, double ratio,
                                   bool printed = false);
// W(delta_x, delta_y) <= C_dtheta / sqrt(eta(1/2)) t + C_dtheta_eta, t = |x-y|/eps.
double dirac_chain_bound(const ConstantSet& c, double t, bool printed = false);
// Piecewise Phi(t): power branch below 3/8, linear above.
double phi_bound(const ConstantSet& c, double t, bool printed = false);
// W^2 <= C TV on a set of diameter diam (scaled kernel with scale eps).
double tv_upper_constant(const ConstantSet& c, double diam_over_eps, bool printed = false);

}  // namespace nlw
