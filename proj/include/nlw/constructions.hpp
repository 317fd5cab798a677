#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nlw/constants.hpp"
#include "nlw/dynamics.hpp"

namespace nlw {

enum class Construction { TwoPoint, ExpelAnnuli, ExpelBoundary, DiracChain, Nonlocalized, Superposition };

std::string to_string(Construction c);

struct CurveCertificate {
  Construction construction = Construction::TwoPoint;
  Path path;
  double length = 0;           // sum of leg lengths
  double action_integral = 0;  // continuous-time action of the constructed curve
  double discrete_action = 0;  // time-discrete action of `path`
  double claimed_bound = 0;    // bound on action_integral
  double printed_bound = NAN;  // same bound with the constants as originally printed
  double residual = 0;         // NCE residual of `path`
  std::vector<double> radii;
  std::vector<std::string> notes;

  bool holds(double rel_tol = 0.0) const { return action_integral <= claimed_bound * (1 + rel_tol); }
};

// Linear mixture rho_p = (1-p) mu + p nu. Mass leaves {mu > nu} for {nu > mu} through the
// product coupling F_ab = w_a w_b / Z; every such pair must be an edge.
class MixtureLeg {
 public:
  MixtureLeg(const DiscreteSpace& sp, const Interpolation& theta, const Vec& mu, const Vec& nu);

  const Vec& from() const { return mu_; }
  const Vec& to() const { return nu_; }
  // Action at parameter p for unit parameter speed.
  double speed2(double p) const;
  double length() const { return length_; }
  // Parameter p at which the arclength fraction equals frac.
  double param_at(double frac) const;
  // Edge flux per unit dp (divergence = mu - nu).
  const Vec& unit_flux() const { return unit_flux_; }
  Vec density(double p) const { return mu_ + p * (nu_ - mu_); }
  bool trivial() const { return trivial_; }

 private:
  struct Group {
    double ma, na, mb, nb, S;
  };
  Interpolation theta_;
  Vec mu_, nu_, unit_flux_;
  std::vector<Group> groups_;
  std::vector<double> u_, s_;  // arclength table in u, p = (1 - cos(pi u)) / 2
  double length_ = 0;
  bool trivial_ = false;
};

// Concatenate legs at constant speed on a uniform grid of T steps.
Path sample_legs(const DiscreteSpace& sp, const std::vector<MixtureLeg>& legs, int T);
// Single leg with parameter schedule p = q(t).
Path sample_schedule(const DiscreteSpace& sp, const MixtureLeg& leg, int T,
                     const std::function<double(double)>& q);

// Geodesic between the two Diracs of two_point_space(w).
CurveCertificate two_point_curve(const Interpolation& theta, double w, int T = 256);

// Dirac at `center` to the uniform measure on the discrete ball B(center, delta), with the
// mass profile q(t) = 1 - (1 - t)^g on the ball.
CurveCertificate expel_curve_boundary(const DiscreteSpace& sp, const RadialKernel& kernel,
                                      const Interpolation& theta, int center, double delta,
                                      double g_exponent = 2.0, int T = 64);

// Dirac at `center` to the uniform ball through dyadic annuli (fractional kernels).
CurveCertificate expel_curve_annuli(const DiscreteSpace& sp, const RadialKernel& kernel,
                                    const Interpolation& theta, int center, double delta,
                                    int n_levels = 64, int T = 64);

// Expel at a, ball-to-ball steps of spacing eps/6, absorb at b.
CurveCertificate dirac_chain_curve(const DiscreteSpace& sp, const RadialKernel& kernel,
                                   const Interpolation& theta, int a, int b, int T = 64);

// Legs of the Dirac chain from a to b (empty when a == b).
std::vector<MixtureLeg> dirac_chain_legs(const DiscreteSpace& sp, const RadialKernel& kernel,
                                         const Interpolation& theta, int a, int b);

}  // namespace nlw
