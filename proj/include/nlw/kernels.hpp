#pragma once

#include <span>
#include <string>
#include <vector>

namespace nlw {

// Volume of the unit ball in R^d.
double unit_ball_volume(int d);

enum class KernelFamily { Indicator, SmoothBump, TruncatedFractional, Custom };

std::string to_string(KernelFamily f);

// Radial jump kernel eta with profile supported in (0,1] and scale eps:
// eta_eps(r) = eps^{-d} eta(r/eps).
class RadialKernel {
 public:
  static RadialKernel indicator(int d, double eps = 1.0);
  static RadialKernel smooth_bump(int d, double eps = 1.0);
  // eta(r) = c_s r^{-d-s} on (0,1].
  static RadialKernel fractional(int d, double s, double c_s, double eps = 1.0);
  // Piecewise linear profile through (r_k, v_k); zero beyond the last radius.
  static RadialKernel custom(int d, std::vector<double> r, std::vector<double> v,
                             double eps = 1.0);
  static RadialKernel custom_csv(int d, const std::string& path, double eps = 1.0);

  KernelFamily family() const { return family_; }
  int dim() const { return d_; }
  double scale() const { return eps_; }
  double s() const { return s_; }
  double c_s() const { return c_s_; }
  double support_radius() const { return 1.0; }
  bool has_blowup() const { return family_ == KernelFamily::TruncatedFractional; }
  std::string name() const;

  RadialKernel rescaled(double eps) const;

  // Unscaled profile eta(r), r > 0.
  double profile(double r) const;
  // eta_eps(r); r must be > 0. Below r_min the value is frozen at r_min.
  double eval(double r, double r_min = 0.0) const;
  double eval_pair(std::span<const double> x, std::span<const double> y,
                   double r_min = 0.0) const;

  // M_p(eta) of the unscaled profile.
  double unscaled_moment(int p) const;
  // M_p(eta_eps) = eps^p M_p(eta).
  double moment(int p) const;
  // Integral of eta_eps over R^d (= M_0); throws DivergentIntegral for blow-up kernels.
  double integral() const;
  bool integrable() const;
  // int (1 ^ |y|^2) eta(|y|) dy for the unscaled profile.
  double tail_moment() const;
  bool is_monotone(int samples = 2000) const;

  // zeta(r) = int_r^1 s eta(s) ds for the unscaled profile.
  double zeta(double r) const;

 private:
  KernelFamily family_ = KernelFamily::Indicator;
  int d_ = 1;
  double eps_ = 1.0;
  double s_ = 0.0;
  double c_s_ = 0.0;
  std::vector<double> tab_r_, tab_v_;
  // zeta at r_k = k / (size - 1), for families without a closed form
  std::vector<double> zeta_nodes_;
  void build_zeta_nodes();
  double radial_integral(double power, double lo, double hi) const;
};

enum class SmoothingKind { Laplace, Zeta };

// Mass-normalized radial smoothing kernel k_scale(r) = scale^{-d} k(r/scale).
class SmoothingKernel {
 public:
  static SmoothingKernel laplace(int d, double s);
  // Normalized zeta kernel of eta_eps (scale = eps of the radial kernel).
  static SmoothingKernel zeta_of(const RadialKernel& eta);

  SmoothingKind kind() const { return kind_; }
  int dim() const { return d_; }
  double scale() const { return scale_; }
  // Unscaled normalized profile.
  double profile(double r) const;
  double eval(double r) const;
  // Mass of the unnormalized kernel: 1 for Laplace, eps^2 M_2(eta)/d for zeta of eta_eps.
  double unnormalized_mass() const;
  // Quadrature of the normalized kernel over R^d (should be 1).
  double total_mass() const;
  // p-th moment of the scaled normalized kernel.
  double moment(int p) const;
  // Support radius of the scaled kernel (infinite for Laplace).
  double support() const;

 private:
  SmoothingKind kind_ = SmoothingKind::Laplace;
  int d_ = 1;
  double scale_ = 1.0;
  double norm_ = 1.0;
  std::vector<RadialKernel> base_;
};

// c_K = 1/(alpha_d d!).
double laplace_normalizer(int d);
// (N+d-1)!/(d-1)!
double laplace_moment(int d, int N);
// Same moment by quadrature of the Laplace profile.
double laplace_moment_quadrature(int d, int N);

}  // namespace nlw
