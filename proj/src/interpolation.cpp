#include "nlw/interpolation.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "nlw/errors.hpp"

namespace nlw {

namespace {

double log_mean(double a, double b) {
  if (a <= 0 || b <= 0) return 0.0;
  if (a == b) return a;
  double u = 0.5 * std::log(b / a);
  if (std::abs(u) < 1e-4) {
    double u2 = u * u;
    return std::sqrt(a * b) * (1.0 + u2 / 6.0 + u2 * u2 / 120.0);
  }
  if (std::abs(u) < 1.0) return std::sqrt(a * b) * std::sinh(u) / u;
  return (b - a) / (std::log(b) - std::log(a));
}

// R(u) = coth u - 1/u and R'(u) = 1/u^2 - 1/sinh^2 u
void log_mean_r(double u, double& R, double& Rp) {
  double au = std::abs(u);
  if (au < 1e-3) {
    double u2 = u * u;
    R = u / 3.0 - u * u2 / 45.0;
    Rp = 1.0 / 3.0 - u2 / 15.0;
    return;
  }
  R = 1.0 / std::tanh(u) - 1.0 / u;
  double sh = std::sinh(au);
  Rp = 1.0 / (u * u) - (std::isfinite(sh) ? 1.0 / (sh * sh) : 0.0);
}

ThetaDerivs numeric_derivs(const Interpolation::Fn& f, double a, double b) {
  ThetaDerivs d;
  d.v = f(a, b);
  double h = 1e-6 * (a + b + 1.0);
  auto diff1 = [&](double x, double y, bool wrt_a) {
    double hx = wrt_a ? std::min(h, 0.5 * x) : 0.0;
    double hy = wrt_a ? 0.0 : std::min(h, 0.5 * y);
    if ((wrt_a ? hx : hy) <= 0) {
      double step = h;
      return wrt_a ? (f(x + step, y) - f(x, y)) / step : (f(x, y + step) - f(x, y)) / step;
    }
    return wrt_a ? (f(x + hx, y) - f(x - hx, y)) / (2 * hx) : (f(x, y + hy) - f(x, y - hy)) / (2 * hy);
  };
  d.a = diff1(a, b, true);
  d.b = diff1(a, b, false);
  double H = 1e-4 * (a + b + 1.0);
  double ha = std::min(H, 0.5 * a), hb = std::min(H, 0.5 * b);
  if (ha > 0) d.aa = (f(a + ha, b) - 2 * d.v + f(a - ha, b)) / (ha * ha);
  if (hb > 0) d.bb = (f(a, b + hb) - 2 * d.v + f(a, b - hb)) / (hb * hb);
  if (ha > 0 && hb > 0)
    d.ab = (f(a + ha, b + hb) - f(a + ha, b - hb) - f(a - ha, b + hb) + f(a - ha, b - hb)) /
           (4 * ha * hb);
  return d;
}

}  // namespace

Interpolation Interpolation::arithmetic() {
  Interpolation t;
  t.family_ = ThetaFamily::Arithmetic;
  t.name_ = "arithmetic";
  t.c_theta_cache_ = std::make_shared<double>(NAN);
  return t;
}

Interpolation Interpolation::geometric() {
  Interpolation t = arithmetic();
  t.family_ = ThetaFamily::Geometric;
  t.name_ = "geometric";
  return t;
}

Interpolation Interpolation::logarithmic() {
  Interpolation t = arithmetic();
  t.family_ = ThetaFamily::Logarithmic;
  t.name_ = "logarithmic";
  return t;
}

Interpolation Interpolation::harmonic() {
  Interpolation t = arithmetic();
  t.family_ = ThetaFamily::Harmonic;
  t.name_ = "harmonic";
  return t;
}

Interpolation Interpolation::custom(std::string name, Fn f) {
  Interpolation t = arithmetic();
  t.family_ = ThetaFamily::Custom;
  t.name_ = std::move(name);
  t.fn_ = std::move(f);
  return t;
}

Interpolation Interpolation::from_table(std::vector<double> x, std::vector<double> h) {
  if (x.size() != h.size() || x.size() < 2) throw ConfigError("theta table: need >= 2 rows");
  if (std::abs(x.front()) > 1e-12 || std::abs(x.back() - 1.0) > 1e-12)
    throw ConfigError("theta table must span x in [0,1]");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) throw ConfigError("theta table: x must increase");
  auto fx = std::make_shared<std::vector<double>>(std::move(x));
  auto fh = std::make_shared<std::vector<double>>(std::move(h));
  Fn f = [fx, fh](double a, double b) {
    double M = std::max(a, b), m = std::min(a, b);
    if (M <= 0) return 0.0;
    double r = m / M;
    auto it = std::upper_bound(fx->begin(), fx->end(), r);
    std::size_t i = std::clamp<std::size_t>(static_cast<std::size_t>(it - fx->begin()), 1, fx->size() - 1);
    double t = (r - (*fx)[i - 1]) / ((*fx)[i] - (*fx)[i - 1]);
    return M * ((1 - t) * (*fh)[i - 1] + t * (*fh)[i]);
  };
  return custom("table", f);
}

Interpolation Interpolation::from_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open theta table " + path);
  std::vector<double> x, h;
  std::string line;
  while (std::getline(in, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double a, b;
    if (ls >> a >> b) {
      x.push_back(a);
      h.push_back(b);
    }
  }
  return from_table(std::move(x), std::move(h));
}

Interpolation Interpolation::by_name(const std::string& name) {
  if (name == "arithmetic") return arithmetic();
  if (name == "geometric") return geometric();
  if (name == "logarithmic") return logarithmic();
  if (name == "harmonic") return harmonic();
  throw ConfigError("unknown theta family '" + name + "'");
}

double Interpolation::operator()(double a, double b) const {
  if (a < 0 || b < 0) throw ContractViolation("theta evaluated at a negative argument");
  switch (family_) {
    case ThetaFamily::Arithmetic: return 0.5 * (a + b);
    case ThetaFamily::Geometric: return std::sqrt(a * b);
    case ThetaFamily::Logarithmic: return log_mean(a, b);
    case ThetaFamily::Harmonic: return a + b > 0 ? 2.0 * a * b / (a + b) : 0.0;
    case ThetaFamily::Custom: return fn_(a, b);
  }
  return 0.0;
}

ThetaDerivs Interpolation::derivs(double a, double b) const {
  ThetaDerivs d;
  switch (family_) {
    case ThetaFamily::Arithmetic:
      d.v = 0.5 * (a + b);
      d.a = d.b = 0.5;
      return d;
    case ThetaFamily::Geometric:
      d.v = std::sqrt(a * b);
      d.a = d.v / (2 * a);
      d.b = d.v / (2 * b);
      d.aa = -d.v / (4 * a * a);
      d.bb = -d.v / (4 * b * b);
      d.ab = d.v / (4 * a * b);
      return d;
    case ThetaFamily::Harmonic: {
      double s = a + b, s2 = s * s, s3 = s2 * s;
      d.v = 2 * a * b / s;
      d.a = 2 * b * b / s2;
      d.b = 2 * a * a / s2;
      d.aa = -4 * b * b / s3;
      d.bb = -4 * a * a / s3;
      d.ab = 4 * a * b / s3;
      return d;
    }
    case ThetaFamily::Logarithmic: {
      d.v = log_mean(a, b);
      double u = 0.5 * std::log(b / a);
      double R, Rp;
      log_mean_r(u, R, Rp);
      d.a = d.v * (1 - R) / (2 * a);
      d.b = d.v * (1 + R) / (2 * b);
      d.aa = d.v / (4 * a * a) * (R * R - 1 + Rp);
      d.bb = d.v / (4 * b * b) * (R * R - 1 + Rp);
      d.ab = d.v / (4 * a * b) * (1 - R * R - Rp);
      return d;
    }
    case ThetaFamily::Custom: return numeric_derivs(fn_, a, b);
  }
  return d;
}

double Interpolation::kappa() const { return (*this)(1.0, 0.0); }

double Interpolation::c_theta() const {
  if (c_theta_cache_ && std::isfinite(*c_theta_cache_)) return *c_theta_cache_;
  double v;
  if (kappa() > 0) {
    auto f = [&](double r) { return 1.0 / std::sqrt((*this)(1 - r, 1 + r)); };
    double err = 0;
    v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 20, 1e-13, &err);
  } else {
    // r = 1 - u^2 removes the endpoint singularity at r = 1
    auto f = [&](double u) {
      u = std::max(u, 1e-150);
      double th = (*this)(u * u, 2.0 - u * u);
      if (!(th > 0)) return std::numeric_limits<double>::infinity();
      return 2.0 * u / std::sqrt(th);
    };
    boost::math::quadrature::tanh_sinh<double> ts;
    double err = 0, l1 = 0;
    v = ts.integrate(f, 0.0, 1.0, 1e-13, &err, &l1);
    if (!std::isfinite(v) || err > 1e-6 * std::max(1.0, std::abs(v)))
      throw DivergentIntegral("C_theta integral does not converge for theta '" + name_ + "'");
  }
  if (!std::isfinite(v)) throw DivergentIntegral("C_theta integral does not converge for theta '" + name_ + "'");
  if (c_theta_cache_) *c_theta_cache_ = v;
  return v;
}

AssumptionReport check_assumptions(const Interpolation& th, int n_samples, std::uint64_t seed) {
  AssumptionReport rep;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto sample = [&] { return std::exp(8.0 * U(rng) - 4.0); };
  auto note = [&](bool& flag, const std::string& what, double a, double b) {
    if (flag) {
      std::ostringstream o;
      o << what << " fails at (" << a << ", " << b << ")";
      rep.counterexamples.push_back(o.str());
    }
    flag = false;
  };
  if (std::abs(th(1.0, 1.0) - 1.0) > 1e-12) note(rep.normalization, "normalization", 1, 1);
  for (int k = 0; k < n_samples; ++k) {
    double a = sample(), b = sample();
    if (k % 5 == 0) b = a;  // diagonal points expose kinks
    double tab = th(a, b), tba = th(b, a);
    double scale = a + b;
    if (std::abs(tab - tba) > 1e-12 * scale) note(rep.symmetry, "symmetry", a, b);
    if (!(tab > 0)) note(rep.positivity, "positivity", a, b);
    if (tab > 0.5 * scale * (1 + 1e-12)) note(rep.arithmetic_bound, "theta <= (a+b)/2", a, b);
    double da = 0.1 * a * U(rng);
    if (th(a + da, b) < tab - 1e-12 * scale) note(rep.monotonicity, "monotonicity", a, b);
    double lam = sample();
    if (std::abs(th(lam * a, lam * b) - lam * tab) > 1e-12 * lam * scale)
      note(rep.homogeneity, "1-homogeneity", a, b);
    double c = sample(), e = sample();
    double mid = th(0.5 * (a + c), 0.5 * (b + e));
    if (mid < 0.5 * (tab + th(c, e)) - 1e-12 * (scale + c + e)) note(rep.concavity, "midpoint concavity", a, b);
    // C1: one-sided difference quotients agree in both variables
    double h = 1e-7 * scale;
    double fa = (th(a + h, b) - tab) / h, ba = (tab - th(a - h, b)) / h;
    double fb = (th(a, b + h) - tab) / h, bb = (tab - th(a, b - h)) / h;
    if (std::abs(fa - ba) > 1e-3 * (1 + std::abs(fa)) || std::abs(fb - bb) > 1e-3 * (1 + std::abs(fb)))
      note(rep.c1, "C1 regularity", a, b);
  }
  try {
    double c = th.c_theta();
    if (!std::isfinite(c)) rep.connectedness = false;
  } catch (const DivergentIntegral&) {
    rep.connectedness = false;
    rep.counterexamples.push_back("C_theta diverges");
  }
  return rep;
}

}  // namespace nlw
