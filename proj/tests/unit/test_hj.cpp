#include <gtest/gtest.h>

#include <cmath>

#include "nlw/errors.hpp"
#include "nlw/hj.hpp"
#include "nlw/transport.hpp"

using namespace nlw;

namespace {

Vec cos_bump(const DiscreteSpace& sp, double a, double b) {
  Vec v(sp.size());
  for (int i = 0; i < sp.size(); ++i) {
    const double x = sp.point(i)[0];
    v[i] = x > a && x < b ? 1 - std::cos(2 * M_PI * (x - a) / (b - a)) : 0.0;
  }
  return v / total_mass(sp, v);
}

}  // namespace

TEST(HJ, ConstantForIndicatorLine) {
  // M_p = 2 / (p + 1) for the indicator of [-1, 1]
  const double M2 = 2.0 / 3, M3 = 0.5, M4 = 0.4, M5 = 1.0 / 3;
  const double tail = M4 + 1.5 * M5;
  const double expect = 1.0 / (M2 * M2) * (0.375 * M3 + std::sqrt((M2 + 1.5 * M3) * tail) + 0.25 * tail);
  EXPECT_NEAR(hj_constant(RadialKernel::indicator(1, 0.1)), expect, 1e-9);
  auto c = hj_constants(RadialKernel::indicator(1, 0.1), std::sqrt(0.1), 0.5);
  EXPECT_NEAR(c.prefactor(), 2.0 / (0.01 * M2), 1e-6);
  EXPECT_NEAR(c.drift(), expect * 0.25 / (0.1 * std::sqrt(0.1)), 1e-6);
}

TEST(HJ, ZeroPotentialGivesZero) {
  auto sp = build_grid(1, 1.0, 64, RadialKernel::indicator(1, 0.1));
  auto path = hopf_lax_path(sp, Vec::Zero(sp.size()), 8);
  Convolution K(sp, SmoothingKernel::laplace(1, 0.3));
  auto c = hj_constants(*sp.kernel(), 0.3, path_gradient_bound(sp, path));
  EXPECT_EQ(c.A, 0.0);
  auto chk = nl_hj_subsolution(path, K, c);
  for (const Vec& f : chk.phi) EXPECT_EQ(f.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(nl_hj_lhs(sp, Interpolation::logarithmic(), chk, 3, uniform_density(sp), K), 0.0);
}

TEST(HJ, HopfLaxPathIsLocalSubsolution) {
  for (int n : {128, 256, 512}) {
    auto sp = build_grid(1, 1.0, n, RadialKernel::indicator(1, 0.1));
    auto kp = kantorovich_potential(sp, cos_bump(sp, 0.25, 0.45), cos_bump(sp, 0.55, 0.75));
    auto path = hopf_lax_path(sp, kp.phi0, 32);
    const double A = path_gradient_bound(sp, path);
    EXPECT_LE(A, lipschitz_constant(sp, kp.phi0) + 1e-12);
    EXPECT_LE(local_hj_residual(sp, kp.phi0, 32), 10 * sp.grid_h() * std::max(1.0, A * A));
  }
}

TEST(HJ, LaplaceSmoothingGradientEstimates) {
  auto sp = build_grid(1, 1.0, 400, RadialKernel::indicator(1, 0.1));
  Vec phi(sp.size());
  for (int i = 0; i < sp.size(); ++i) {
    const double x = sp.point(i)[0];
    phi[i] = std::abs(x - 0.5) + 0.3 * std::sin(9 * x);
  }
  for (double s : {0.02, 0.05}) {
    Convolution K(sp, SmoothingKernel::laplace(1, s));
    auto g = smoothing_gradient_check(sp, K, s, phi, 10 * s);
    EXPECT_TRUE(g.holds(1e-9)) << g.grad_smoothed << " " << g.grad_phi << " " << g.hess_smoothed << " "
                               << g.hess_bound;
  }
}

TEST(HJ, SubsolutionInequalityOnSampledMeasures) {
  auto sp = build_grid(1, 1.0, 128, RadialKernel::indicator(1, 0.1));
  HJOptions o;
  o.w_smoothed = 0.0;  // pairing side not exercised here
  auto r = hj_lower_bound(sp, Interpolation::logarithmic(), cos_bump(sp, 0.25, 0.45), cos_bump(sp, 0.55, 0.75),
                          0.0, o);
  EXPECT_EQ(r.samples, 100);
  EXPECT_TRUE(r.subsolution_ok()) << r.max_lhs << " vs " << r.slack_tol;
  EXPECT_NEAR(r.R, 0.5, 2 * sp.grid_h());
  EXPECT_LE(r.lip_phi0, r.R + 1e-12);
}

TEST(HJ, PairingBelowSmoothedAndFullDistance) {
  auto sp = build_grid(1, 1.0, 48, RadialKernel::indicator(1, 0.2));
  auto th = Interpolation::arithmetic();
  Vec a = cos_bump(sp, 0.2, 0.45), b = cos_bump(sp, 0.5, 0.8);
  auto full = solve(sp, th, a, b);
  ASSERT_TRUE(full.converged());
  auto r = hj_lower_bound(sp, th, a, b, full.distance);
  EXPECT_TRUE(r.pairing_ok());
  EXPECT_LE(r.w_smoothed, r.w + 1e-3);
  EXPECT_LE(r.pairing, 0.5 * r.w * r.w);
  EXPECT_TRUE(r.headline_ok());
}

TEST(HJ, IdenticalMeasures) {
  auto sp = build_grid(1, 1.0, 64, RadialKernel::indicator(1, 0.1));
  Vec a = cos_bump(sp, 0.3, 0.6);
  auto r = hj_lower_bound(sp, Interpolation::arithmetic(), a, a, 0.0);
  EXPECT_EQ(r.w2, 0.0);
  EXPECT_LE(r.pairing, 1e-10);
  EXPECT_TRUE(r.headline_ok());
}

TEST(HJ, Preconditions) {
  auto sp = build_grid(1, 1.0, 64, RadialKernel::indicator(1, 0.1));
  Vec a = cos_bump(sp, 0.3, 0.6);
  HJOptions o;
  o.s = 0.05;  // s < eps
  EXPECT_THROW(hj_lower_bound(sp, Interpolation::arithmetic(), a, a, 0.0, o), ContractViolation);
  EXPECT_THROW(hj_lower_bound(sp, Interpolation::arithmetic(), 2 * a, 2 * a, 0.0), ContractViolation);
}
