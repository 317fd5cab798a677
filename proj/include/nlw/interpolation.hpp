#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace nlw {

enum class ThetaFamily { Arithmetic, Geometric, Logarithmic, Harmonic, Custom };

// Value and first/second partial derivatives of theta at (a, b).
struct ThetaDerivs {
  double v = 0, a = 0, b = 0, aa = 0, ab = 0, bb = 0;
};

// Concave, symmetric, 1-homogeneous mean theta(a, b).
class Interpolation {
 public:
  using Fn = std::function<double(double, double)>;

  static Interpolation arithmetic();
  static Interpolation geometric();
  static Interpolation logarithmic();
  static Interpolation harmonic();
  // Arbitrary callable; derivatives by central differences.
  static Interpolation custom(std::string name, Fn f);
  // theta(a,b) = max(a,b) h(min/max) with h tabulated on [0,1], linear interpolation.
  static Interpolation from_table(std::vector<double> x, std::vector<double> h);
  static Interpolation from_table_csv(const std::string& path);
  static Interpolation by_name(const std::string& name);

  ThetaFamily family() const { return family_; }
  const std::string& name() const { return name_; }

  double operator()(double a, double b) const;
  ThetaDerivs derivs(double a, double b) const;

  // theta(1, 0)
  double kappa() const;
  // int_0^1 dr / sqrt(theta(1-r, 1+r)), cached after first call.
  double c_theta() const;

 private:
  ThetaFamily family_ = ThetaFamily::Arithmetic;
  std::string name_;
  Fn fn_;
  std::shared_ptr<double> c_theta_cache_;
};

struct AssumptionReport {
  bool symmetry = true, normalization = true, positivity = true, monotonicity = true,
       homogeneity = true, concavity = true, c1 = true, arithmetic_bound = true,
       connectedness = true;
  std::vector<std::string> counterexamples;
  bool all() const {
    return symmetry && normalization && positivity && monotonicity && homogeneity && concavity &&
           c1 && arithmetic_bound && connectedness;
  }
};

AssumptionReport check_assumptions(const Interpolation& theta, int n_samples,
                                   std::uint64_t seed = 1);

}  // namespace nlw
