#include "nlw/constants.hpp"

#include <cmath>

#include "nlw/errors.hpp"

namespace nlw {

ConstantSet assemble_constants(const Interpolation& theta, const RadialKernel& eta) {
  ConstantSet c;
  const int d = eta.dim();
  c.d = d;
  c.alpha_d = unit_ball_volume(d);
  c.c_theta = theta.c_theta();
  c.kappa = theta.kappa();
  c.blowup = eta.has_blowup();
  c.eta_half = eta.profile(0.5);
  c.eta_sixth = eta.profile(1.0 / 6.0);
  const double Ct = c.c_theta, a = c.alpha_d;
  c.set_step = std::sqrt(2.0) * Ct;

  // one ball-to-ball step at spacing eps/6 with radius eps/6, scaled by 1/sqrt(eta(1/2))
  const double ball = std::sqrt(2.0) * Ct / (std::sqrt(a) * std::pow(6.0, -0.5 * d));
  c.C_dtheta = 6.0 * ball;
  c.C_dtheta_printed = Ct / ((2.0 / 3.0) * std::sqrt(a) * std::pow(6.0, -0.5 * d));

  double expel = INFINITY, expel_p = INFINITY;
  if (c.kappa > 0 && c.eta_sixth > 0) {
    const double q = c.kappa * a * std::pow(6.0, -d) * c.eta_sixth;
    expel = 2.0 * 2.0 / std::sqrt(q);
    expel_p = 2.0 / std::sqrt(q);
  }
  if (c.blowup) {
    c.s = eta.s();
    c.c_s = eta.c_s();
    const double s = c.s;
    const double X = a * c.c_s * std::pow(1.5, -d - s) * std::pow(2.0, -d);
    c.C_ds = std::sqrt(X / 2.0) /
             (1.0 / (std::sqrt(1.0 - std::pow(2.0, -d)) * (1.0 - std::pow(2.0, -s / 2))) + 1.0);
    c.C_ds_tilde = 2.0 * std::sqrt(a * c.c_s * std::pow(1.5, -d - s));
    c.C_ds_printed = c.C_ds_tilde / (1.0 / (1.0 - std::pow(2.0, -s / 2)) + std::pow(2.0, d / 2.0 - 1.0));
    c.C_dtheta_s = 2.0 * std::sqrt(2.0) * Ct * std::pow(4.0 / 3.0, s / 2) /
                       std::sqrt(a * c.c_s * std::pow(8.0, -d)) +
                   4.0 * (Ct / c.C_ds) * std::pow(6.0, -s / 2);
    c.C_dtheta_s_printed = Ct / (2.0 * std::sqrt(a * c.c_s * std::pow(8.0, -d - s))) *
                               std::pow(4.0 / 3.0, s / 2) +
                           4.0 * (Ct / c.C_ds_printed) * std::pow(6.0, -s / 2);
    expel = std::min(expel, 2.0 * (Ct / c.C_ds) * std::pow(6.0, -s / 2));
    expel_p = std::min(expel_p, 2.0 * (Ct / c.C_ds_printed) * std::pow(6.0, -s / 2));
  }
  const double sq = std::sqrt(c.eta_half);
  c.C_dtheta_eta = ball / sq + expel;
  c.C_dtheta_eta_printed = c.C_dtheta_printed / (6.0 * sq) + expel_p;
  return c;
}

double expel_annuli_length_bound(const ConstantSet& c, double ratio, bool printed) {
  if (!c.blowup) throw RegimeError("annuli expel bound needs a kernel with algebraic blow-up");
  return c.c_theta / (printed ? c.C_ds_printed : c.C_ds) * std::pow(ratio, c.s / 2);
}

double expel_boundary_length_bound(const ConstantSet& c, const RadialKernel& eta, double ratio,
                                   bool printed) {
  if (!(c.kappa > 0)) throw RegimeError("boundary expel bound needs theta(1,0) > 0");
  const double q = c.kappa * c.alpha_d * std::pow(ratio, c.d) * eta.profile(ratio);
  return (printed ? 1.0 : 2.0) / std::sqrt(q);
}

double dirac_chain_bound(const ConstantSet& c, double t, bool printed) {
  if (!std::isfinite(c.C_dtheta_eta)) throw RegimeError("Dirac chain needs theta(1,0) > 0 or algebraic blow-up");
  if (t == 0) return 0.0;
  const double slope = (printed ? c.C_dtheta_printed : c.C_dtheta) / std::sqrt(c.eta_half);
  return slope * t + (printed ? c.C_dtheta_eta_printed : c.C_dtheta_eta);
}

double phi_bound(const ConstantSet& c, double t, bool printed) {
  if (!c.blowup) throw RegimeError("Phi needs a kernel with algebraic blow-up");
  const double C = printed ? c.C_dtheta_s_printed : c.C_dtheta_s;
  if (t < 0.375) return C * std::pow(t, c.s / 2);
  return C * std::pow(0.375, c.s / 2) * (8.0 / 3.0) * t;
}

double tv_upper_constant(const ConstantSet& c, double diam_over_eps, bool printed) {
  const double a = printed ? c.C_dtheta_printed : c.C_dtheta;
  const double b = printed ? c.C_dtheta_eta_printed : c.C_dtheta_eta;
  return 2.0 * a * a * diam_over_eps * diam_over_eps / c.eta_half + 4.0 * b * b;
}

}  // namespace nlw
