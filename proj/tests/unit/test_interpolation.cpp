#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "nlw/errors.hpp"
#include "nlw/interpolation.hpp"

using namespace nlw;

namespace {
std::vector<Interpolation> builtins() {
  return {Interpolation::arithmetic(), Interpolation::geometric(), Interpolation::logarithmic(),
          Interpolation::harmonic()};
}
}  // namespace

TEST(Theta, Values) {
  EXPECT_DOUBLE_EQ(Interpolation::arithmetic()(2, 4), 3.0);
  EXPECT_DOUBLE_EQ(Interpolation::logarithmic()(1, 1), 1.0);
  EXPECT_NEAR(Interpolation::logarithmic()(1, std::exp(1.0)), std::exp(1.0) - 1.0, 1e-14);
  EXPECT_EQ(Interpolation::logarithmic()(1, 0), 0.0);
  EXPECT_EQ(Interpolation::harmonic()(3, 0), 0.0);
  EXPECT_DOUBLE_EQ(Interpolation::geometric()(2, 8), 4.0);
  EXPECT_THROW(Interpolation::arithmetic()(-1, 1), ContractViolation);
}

TEST(Theta, LogMeanNearDiagonalIsSmooth) {
  auto L = Interpolation::logarithmic();
  for (double w : {1e-9, 1e-6, 1e-5, 9e-5, 1.1e-4, 1e-3}) {
    double a = 2.0, b = 2.0 * std::exp(w);
    // exact: (b-a)/ln(b/a) = 2 (e^w - 1)/w
    double exact = 2.0 * std::expm1(w) / w;
    EXPECT_NEAR(L(a, b), exact, 2e-15 * exact) << w;
  }
}

TEST(Theta, Kappa) {
  EXPECT_DOUBLE_EQ(Interpolation::arithmetic().kappa(), 0.5);
  EXPECT_EQ(Interpolation::geometric().kappa(), 0.0);
  EXPECT_EQ(Interpolation::logarithmic().kappa(), 0.0);
  EXPECT_EQ(Interpolation::harmonic().kappa(), 0.0);
}

TEST(Theta, CTheta) {
  EXPECT_NEAR(Interpolation::arithmetic().c_theta(), 1.0, 1e-12);
  // sqrt(pi) Gamma(3/4) / (2 Gamma(5/4))
  EXPECT_NEAR(Interpolation::geometric().c_theta(),
              std::sqrt(M_PI) * std::tgamma(0.75) / (2 * std::tgamma(1.25)), 1e-8);
  EXPECT_NEAR(Interpolation::harmonic().c_theta(), M_PI / 2, 1e-8);
  // 30-digit reference quadrature of the logarithmic-mean integrand
  EXPECT_NEAR(Interpolation::logarithmic().c_theta(), 1.10217260880888382805, 1e-8);
  for (auto& t : builtins()) EXPECT_GE(t.c_theta(), 1.0 - 1e-12);
}

TEST(Theta, Homogeneity) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0, 5);
  for (auto& t : builtins())
    for (int k = 0; k < 2000; ++k) {
      double a = U(rng), b = U(rng), lam = U(rng) + 1e-3;
      EXPECT_LE(std::abs(t(lam * a, lam * b) - lam * t(a, b)), 1e-12 * lam * (a + b)) << t.name();
      EXPECT_LE(t(a, b), 0.5 * (a + b) * (1 + 1e-14));
    }
}

TEST(Theta, AnalyticDerivativesMatchDifferences) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.05, 3);
  for (auto& t : builtins()) {
    auto num = Interpolation::custom("num", [t](double a, double b) { return t(a, b); });
    for (int k = 0; k < 200; ++k) {
      double a = U(rng), b = k % 7 == 0 ? a * (1 + 1e-5) : U(rng);
      auto d = t.derivs(a, b);
      auto n = num.derivs(a, b);
      EXPECT_NEAR(d.v, t(a, b), 1e-14);
      EXPECT_NEAR(d.a, n.a, 1e-6) << t.name();
      EXPECT_NEAR(d.b, n.b, 1e-6) << t.name();
      double s = 1 + std::abs(d.aa) + std::abs(d.ab);
      EXPECT_NEAR(d.aa, n.aa, 1e-4 * s) << t.name() << " " << a << " " << b;
      EXPECT_NEAR(d.ab, n.ab, 1e-4 * s) << t.name();
      EXPECT_NEAR(d.bb, n.bb, 1e-4 * (1 + std::abs(d.bb))) << t.name();
      // Euler identity for 1-homogeneous functions
      EXPECT_NEAR(a * d.a + b * d.b, d.v, 1e-12 * (1 + d.v));
    }
  }
}

TEST(Theta, AssumptionsBuiltinsPass) {
  for (auto& t : builtins()) {
    auto rep = check_assumptions(t, 1000);
    EXPECT_TRUE(rep.all()) << t.name() << (rep.counterexamples.empty() ? "" : rep.counterexamples[0]);
  }
}

TEST(Theta, AssumptionsCustomFailures) {
  auto mn = Interpolation::custom("min", [](double a, double b) { return std::min(a, b); });
  auto r1 = check_assumptions(mn, 1000);
  EXPECT_FALSE(r1.c1);
  EXPECT_TRUE(r1.homogeneity);
  EXPECT_TRUE(r1.symmetry);
  auto pr = Interpolation::custom("prod", [](double a, double b) { return a * b; });
  auto r2 = check_assumptions(pr, 1000);
  EXPECT_FALSE(r2.homogeneity);
}

TEST(Theta, TableMatchesGeometric) {
  std::vector<double> x, h;
  for (int k = 0; k <= 4000; ++k) {
    x.push_back(k / 4000.0);
    h.push_back(std::sqrt(k / 4000.0));
  }
  auto t = Interpolation::from_table(x, h);
  EXPECT_NEAR(t(4, 1), 2.0, 1e-6);
  EXPECT_NEAR(t.c_theta(), Interpolation::geometric().c_theta(), 2e-3);
}
