#include "nlw/kernels.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "nlw/errors.hpp"

namespace nlw {

namespace {

using boost::math::quadrature::gauss_kronrod;

constexpr double kQuadTol = 1e-12;

// Adaptive Gauss-Kronrod with a mixed absolute/relative acceptance test, so
// that integrands decaying to tiny values do not force endless bisection.
template <class F>
double gk(F f, double a, double b, double abs_tol = 1e-14) {
  struct Seg {
    double a, b;
    int depth;
  };
  std::vector<Seg> stack{{a, b, 0}};
  double total = 0.0;
  const double len = b - a;
  while (!stack.empty()) {
    Seg s = stack.back();
    stack.pop_back();
    double err = 0.0;
    double v = gauss_kronrod<double, 61>::integrate(f, s.a, s.b, 0, 0, &err);
    if (!std::isfinite(v)) throw DivergentIntegral("radial quadrature produced a non-finite value");
    double share = abs_tol * (s.b - s.a) / len + 4 * std::numeric_limits<double>::epsilon();
    if (err <= std::max(share, kQuadTol * std::abs(v)) || err <= 64 * std::numeric_limits<double>::epsilon() * std::abs(v) || s.depth >= 18) {
      total += v;
      continue;
    }
    double m = 0.5 * (s.a + s.b);
    stack.push_back({s.a, m, s.depth + 1});
    stack.push_back({m, s.b, s.depth + 1});
  }
  return total;
}

}  // namespace

double unit_ball_volume(int d) {
  if (d < 1) throw ContractViolation("dimension must be >= 1");
  return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

std::string to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::Indicator: return "indicator";
    case KernelFamily::SmoothBump: return "smooth_bump";
    case KernelFamily::TruncatedFractional: return "fractional";
    case KernelFamily::Custom: return "custom";
  }
  return "?";
}

RadialKernel RadialKernel::indicator(int d, double eps) {
  if (d < 1 || !(eps > 0)) throw ContractViolation("indicator kernel: need d >= 1, eps > 0");
  RadialKernel k;
  k.family_ = KernelFamily::Indicator;
  k.d_ = d;
  k.eps_ = eps;
  return k;
}

RadialKernel RadialKernel::smooth_bump(int d, double eps) {
  RadialKernel k = indicator(d, eps);
  k.family_ = KernelFamily::SmoothBump;
  k.build_zeta_nodes();
  return k;
}

RadialKernel RadialKernel::fractional(int d, double s, double c_s, double eps) {
  if (!(s > 0) || !(c_s > 0)) throw ContractViolation("fractional kernel: need s > 0, c_s > 0");
  RadialKernel k = indicator(d, eps);
  k.family_ = KernelFamily::TruncatedFractional;
  k.s_ = s;
  k.c_s_ = c_s;
  return k;
}

RadialKernel RadialKernel::custom(int d, std::vector<double> r, std::vector<double> v, double eps) {
  if (r.size() != v.size() || r.size() < 2)
    throw ContractViolation("custom kernel: need at least two (r, value) pairs");
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r[i] > 0) || r[i] > 1.0 + 1e-12) throw ContractViolation("custom kernel: radii must lie in (0,1]");
    if (!(v[i] >= 0)) throw ContractViolation("custom kernel: values must be nonnegative");
    if (i > 0 && !(r[i] > r[i - 1])) throw ContractViolation("custom kernel: radii must increase");
    if (i > 0 && v[i] > v[i - 1]) throw ContractViolation("custom kernel: profile must be nonincreasing");
  }
  RadialKernel k = indicator(d, eps);
  k.family_ = KernelFamily::Custom;
  k.tab_r_ = std::move(r);
  k.tab_v_ = std::move(v);
  k.build_zeta_nodes();
  return k;
}

RadialKernel RadialKernel::custom_csv(int d, const std::string& path, double eps) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open kernel table " + path);
  std::vector<double> r, v;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double a, b;
    if (!(ls >> a >> b)) continue;  // header
    r.push_back(a);
    v.push_back(b);
  }
  return custom(d, std::move(r), std::move(v), eps);
}

std::string RadialKernel::name() const {
  std::ostringstream o;
  o << to_string(family_) << "(d=" << d_ << ",eps=" << eps_;
  if (family_ == KernelFamily::TruncatedFractional) o << ",s=" << s_ << ",c_s=" << c_s_;
  o << ")";
  return o.str();
}

RadialKernel RadialKernel::rescaled(double eps) const {
  if (!(eps > 0)) throw ContractViolation("kernel scale must be positive");
  RadialKernel k = *this;
  k.eps_ = eps;
  return k;
}

double RadialKernel::profile(double r) const {
  if (!(r > 0)) throw ContractViolation("kernel evaluated at r <= 0");
  if (r > 1.0) return 0.0;
  switch (family_) {
    case KernelFamily::Indicator: return 1.0;
    case KernelFamily::SmoothBump: {
      double q = 1.0 - r * r;
      if (q <= 0) return 0.0;
      return std::exp(1.0 - 1.0 / q);
    }
    case KernelFamily::TruncatedFractional: return c_s_ * std::pow(r, -d_ - s_);
    case KernelFamily::Custom: {
      if (r <= tab_r_.front()) return tab_v_.front();
      if (r > tab_r_.back()) return 0.0;
      auto it = std::upper_bound(tab_r_.begin(), tab_r_.end(), r);
      std::size_t i = static_cast<std::size_t>(it - tab_r_.begin());
      if (i >= tab_r_.size()) return tab_v_.back();
      double t = (r - tab_r_[i - 1]) / (tab_r_[i] - tab_r_[i - 1]);
      return (1 - t) * tab_v_[i - 1] + t * tab_v_[i];
    }
  }
  return 0.0;
}

double RadialKernel::eval(double r, double r_min) const {
  if (!(r > 0)) throw ContractViolation("kernel evaluated at r <= 0");
  double rr = family_ == KernelFamily::TruncatedFractional ? std::max(r, r_min) : r;
  return std::pow(eps_, -d_) * profile(rr / eps_);
}

double RadialKernel::eval_pair(std::span<const double> x, std::span<const double> y,
                               double r_min) const {
  double s2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s2 += (x[k] - y[k]) * (x[k] - y[k]);
  return eval(std::sqrt(s2), r_min);
}

// int_lo^hi r^power eta(r) dr for the unscaled profile.
double RadialKernel::radial_integral(double power, double lo, double hi) const {
  hi = std::min(hi, 1.0);
  if (!(hi > lo)) return 0.0;
  switch (family_) {
    case KernelFamily::TruncatedFractional: {
      // r^power c_s r^{-d-s} = c_s r^{a-1}; substitute u = r^a.
      double a = power + 1.0 - d_ - s_;
      if (a <= 0.0) {
        if (lo > 0) {
          auto f = [&](double r) { return std::pow(r, power) * profile(r); };
          return gk(f, lo, hi);
        }
        throw DivergentIntegral("fractional kernel: radial integral diverges at the origin");
      }
      double ulo = std::pow(lo, a), uhi = std::pow(hi, a);
      auto f = [&](double u) {
        double r = std::pow(u, 1.0 / a);
        return r > 0 ? std::pow(r, power + 1.0 - a) * profile(r) / a : c_s_ / a;
      };
      return gk(f, ulo, uhi);
    }
    case KernelFamily::Custom: {
      std::vector<double> br{lo};
      for (double x : tab_r_)
        if (x > lo && x < hi) br.push_back(x);
      br.push_back(hi);
      double acc = 0.0;
      auto f = [&](double r) { return r > 0 ? std::pow(r, power) * profile(r) : 0.0; };
      for (std::size_t i = 0; i + 1 < br.size(); ++i) acc += gk(f, br[i], br[i + 1]);
      return acc;
    }
    default: {
      auto f = [&](double r) { return r > 0 ? std::pow(r, power) * profile(r) : 0.0; };
      return gk(f, lo, hi);
    }
  }
}

double RadialKernel::unscaled_moment(int p) const {
  if (p < 0) throw ContractViolation("moment order must be nonnegative");
  if (family_ == KernelFamily::TruncatedFractional && !(p > s_))
    throw DivergentIntegral("moment M_" + std::to_string(p) + " diverges for fractional kernel with s=" +
                            std::to_string(s_));
  return d_ * unit_ball_volume(d_) * radial_integral(d_ + p - 1.0, 0.0, 1.0);
}

double RadialKernel::moment(int p) const { return std::pow(eps_, p) * unscaled_moment(p); }

double RadialKernel::integral() const { return moment(0); }

bool RadialKernel::integrable() const { return family_ != KernelFamily::TruncatedFractional; }

double RadialKernel::tail_moment() const { return unscaled_moment(2); }

bool RadialKernel::is_monotone(int samples) const {
  double prev = profile(1e-6);
  for (int i = 1; i <= samples; ++i) {
    double r = 1e-6 + (1.0 + 0.5 - 1e-6) * i / samples;
    double v = profile(r);
    if (v > prev * (1 + 1e-14) + 1e-300) return false;
    prev = v;
  }
  return true;
}

double RadialKernel::zeta(double r) const {
  if (r < 0) throw ContractViolation("zeta at negative radius");
  if (r >= 1.0) return 0.0;
  switch (family_) {
    case KernelFamily::Indicator: return 0.5 * (1.0 - r * r);
    case KernelFamily::TruncatedFractional: {
      if (r <= 0) {
        if (2.0 - d_ - s_ > 0) return c_s_ / (2.0 - d_ - s_);
        throw DivergentIntegral("zeta of fractional kernel is infinite at 0");
      }
      double e = 2.0 - d_ - s_;
      if (std::abs(e) < 1e-12) return -c_s_ * std::log(r);
      return c_s_ * (1.0 - std::pow(r, e)) / e;
    }
    default: {
      const int K = static_cast<int>(zeta_nodes_.size()) - 1;
      int k = std::min(K, static_cast<int>(std::ceil(r * K)));
      double rk = double(k) / K;
      return zeta_nodes_[k] + radial_integral(1.0, r, rk);
    }
  }
}

void RadialKernel::build_zeta_nodes() {
  const int K = 2048;
  zeta_nodes_.assign(K + 1, 0.0);
  for (int k = K - 1; k >= 0; --k)
    zeta_nodes_[k] = zeta_nodes_[k + 1] + radial_integral(1.0, double(k) / K, double(k + 1) / K);
}

// ---------------------------------------------------------------- smoothing

double laplace_normalizer(int d) { return 1.0 / (unit_ball_volume(d) * std::tgamma(d + 1.0)); }

double laplace_moment(int d, int N) {
  if (d < 1 || N < 0) throw ContractViolation("laplace_moment: need d >= 1, N >= 0");
  if (N + d > 20) return std::exp(std::lgamma(N + d) - std::lgamma(d));
  double v = 1.0;
  for (int k = d; k <= N + d - 1; ++k) v *= k;
  return v;
}

double laplace_moment_quadrature(int d, int N) {
  boost::math::quadrature::exp_sinh<double> es;
  double c = laplace_normalizer(d);
  auto f = [&](double r) { return r > 0 && r < 800 ? std::exp((N + d - 1) * std::log(r) - r) : 0.0; };
  return d * unit_ball_volume(d) * c * es.integrate(f, 1e-15);
}

SmoothingKernel SmoothingKernel::laplace(int d, double s) {
  if (d < 1 || !(s > 0)) throw ContractViolation("laplace kernel: need d >= 1, s > 0");
  SmoothingKernel k;
  k.kind_ = SmoothingKind::Laplace;
  k.d_ = d;
  k.scale_ = s;
  k.norm_ = laplace_normalizer(d);
  return k;
}

SmoothingKernel SmoothingKernel::zeta_of(const RadialKernel& eta) {
  SmoothingKernel k;
  k.kind_ = SmoothingKind::Zeta;
  k.d_ = eta.dim();
  k.scale_ = eta.scale();
  k.norm_ = eta.dim() / eta.unscaled_moment(2);
  k.base_.push_back(eta);
  return k;
}

double SmoothingKernel::profile(double r) const {
  if (kind_ == SmoothingKind::Laplace) return norm_ * std::exp(-r);
  return norm_ * base_[0].zeta(r);
}

double SmoothingKernel::eval(double r) const { return std::pow(scale_, -d_) * profile(r / scale_); }

double SmoothingKernel::unnormalized_mass() const {
  if (kind_ == SmoothingKind::Laplace) return 1.0;
  return scale_ * scale_ / norm_;
}

double SmoothingKernel::total_mass() const {
  double ad = d_ * unit_ball_volume(d_);
  if (kind_ == SmoothingKind::Laplace) {
    boost::math::quadrature::exp_sinh<double> es;
    return ad * es.integrate([&](double r) { return r < 800 ? std::pow(r, d_ - 1) * profile(r) : 0.0; }, 1e-15);
  }
  // singular zeta profiles (d >= 2 fractional) are integrable against r^{d-1}
  auto f = [&](double r) { return r > 0 ? std::pow(r, d_ - 1) * profile(r) : 0.0; };
  return ad * gk(f, 0.0, 1.0);
}

double SmoothingKernel::moment(int p) const {
  if (kind_ == SmoothingKind::Laplace) return std::pow(scale_, p) * laplace_moment(d_, p);
  const RadialKernel& e = base_[0];
  return std::pow(scale_, p) * d_ * e.unscaled_moment(p + 2) / ((d_ + p) * e.unscaled_moment(2));
}

double SmoothingKernel::support() const {
  return kind_ == SmoothingKind::Laplace ? INFINITY : scale_;
}

}  // namespace nlw
