#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nlw/interpolation.hpp"
#include "nlw/solver.hpp"
#include "nlw/space.hpp"

namespace nlw {

// Constant of the local-to-nonlocal subsolution transfer, built from the
// unscaled moments M_2..M_5 of eta.
struct HJConstants {
  int d = 1;
  double M2 = 0, M3 = 0, M4 = 0, M5 = 0;
  double C = 0;
  double A = 0;    // sup_t |grad phi_t|_inf
  double s = 0;    // Laplace smoothing scale
  double eps = 0;  // kernel scale
  double prefactor() const { return 2.0 * d / (eps * eps * M2); }
  double drift() const { return C * A * A / (eps * s); }
};

double hj_constant(const RadialKernel& eta);
HJConstants hj_constants(const RadialKernel& eta_eps, double s, double A);

// Potentials sampled at t_k = k / (size - 1).
struct PotentialPath {
  std::vector<double> t;
  std::vector<Vec> phi;
  double dt() const { return t.size() > 1 ? t[1] - t[0] : 1.0; }
};

// phi_t = hopf_lax(phi0, t) at T + 1 uniform times (phi at t = 0 is phi0).
PotentialPath hopf_lax_path(const DiscreteSpace& sp, const Vec& phi0, int T = 32);

// max over interior grid nodes and the sample times t_1..t_{T-1} of dt phi + |grad phi|^2 / 2,
// centered differences along each axis and in t with step rel_step * dt (the sampled
// path alone straddles branch switches of the minimization). Grid spaces only.
double local_hj_residual(const DiscreteSpace& sp, const Vec& phi0, int T, double rel_step = 1e-3);

// sup_t of the kernel-range difference quotient.
double path_gradient_bound(const DiscreteSpace& sp, const PotentialPath& path);

// prefactor * K_s * phi_t - drift * t.
PotentialPath nl_hj_subsolution(const PotentialPath& path, const Convolution& Ks, const HJConstants& c);

// Left side of the s-smoothed nonlocal HJ inequality at interior time index k for the
// probability density mu: sum dt phi rho^s m + 1/4 sum_{i != j} (phi_j - phi_i)^2 theta eta m m.
double nl_hj_lhs(const DiscreteSpace& sp, const Interpolation& theta, const PotentialPath& phi, int k,
                 const Vec& mu, const Convolution& Ks);

// Finite-difference checks of the smoothing estimates |grad K*phi| <= |grad phi| and
// |D^2 K*phi| <= |grad phi| / s on a 1D grid, evaluated at nodes at least `margin`
// from the boundary (the discrete normalization bends the kernel near the ends).
struct SmoothingGradientCheck {
  double grad_phi = 0, grad_smoothed = 0, hess_smoothed = 0, hess_bound = 0;
  bool holds(double tol) const {
    return grad_smoothed <= grad_phi + tol && hess_smoothed <= hess_bound + tol;
  }
};
SmoothingGradientCheck smoothing_gradient_check(const DiscreteSpace& sp, const Convolution& Ks, double s,
                                                const Vec& phi, double margin = 0);

struct HJOptions {
  int T = 32;
  int samples = 100;
  std::uint64_t seed = 1;
  double s = 0;                  // 0: sqrt(eps)
  double R = 0;                  // 0: diameter of the union of the supports
  std::optional<double> w_smoothed;  // W_{eta,eps,s}; solved when absent
  SolveConfig solve;
};

struct HJReport {
  HJConstants constants;
  double R = 0;
  double lip_phi0 = 0;       // over node pairs inside the supports
  double local_residual = 0, local_tol = 0;
  int samples = 0;
  double max_lhs = 0, slack_tol = 0;
  double pairing = 0;
  double w = 0, w_smoothed = 0, w2 = 0;
  double headline_lhs = 0, headline_rhs = 0;
  double w_dual_lower = 0;  // 2 * pairing <= W_{eta,eps,s}^2
  bool subsolution_ok() const { return max_lhs <= slack_tol; }
  bool pairing_ok() const { return pairing <= 0.5 * w_smoothed * w_smoothed + 1e-4; }
  bool headline_ok() const { return headline_lhs <= headline_rhs; }
};

// Full pipeline: Kantorovich potential, Hopf-Lax path, Laplace smoothing at s,
// subsolution construction and sampled verification, dual pairing and the
// W2^2 <= eps^2 M2/(2d) W^2 + (7/4 d R^2 + 8 d R) sqrt(eps) estimate.
HJReport hj_lower_bound(const DiscreteSpace& sp, const Interpolation& theta, const Vec& mu0, const Vec& mu1,
                        double solver_distance, const HJOptions& opt = {});

}  // namespace nlw
