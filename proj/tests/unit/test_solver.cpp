#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "nlw/errors.hpp"
#include "nlw/solver.hpp"

using namespace nlw;

namespace {

DiscreteSpace small_grid(double eps = 0.3, int n = 24) {
  return build_grid(1, 1.0, n, RadialKernel::indicator(1, eps));
}

Vec bump(const DiscreteSpace& sp, double c, double sigma = 0.1) {
  double x[1] = {c};
  return gaussian_bump(sp, x, sigma);
}

}  // namespace

TEST(Solve, TwoPointArithmetic) {
  auto sp = two_point_space(0.5);
  SolveConfig cfg;
  cfg.time_steps = 256;
  auto r = solve(sp, Interpolation::arithmetic(), dirac_at(sp, 0), dirac_at(sp, 1), cfg);
  ASSERT_TRUE(r.converged()) << r.message;
  EXPECT_NEAR(r.distance, 2.0, 2e-3);
  EXPECT_LE(r.residual, cfg.feas_tol);
  EXPECT_LE(nce_residual(sp, r.path), 1e-6);
}

TEST(Solve, TwoPointLogarithmicMatchesQuadrature) {
  auto sp = two_point_space(0.5);
  auto th = Interpolation::logarithmic();
  SolveConfig cfg;
  cfg.time_steps = 256;
  auto r = solve(sp, th, dirac_at(sp, 0), dirac_at(sp, 1), cfg);
  ASSERT_TRUE(r.converged());
  EXPECT_NEAR(r.distance, 2.0 * th.c_theta(), 5e-3);
}

TEST(Solve, IdenticalEndpointsGiveZero) {
  auto sp = small_grid();
  Vec a = bump(sp, 0.4);
  auto r = solve(sp, Interpolation::logarithmic(), a, a);
  EXPECT_TRUE(r.converged());
  EXPECT_EQ(r.distance, 0.0);
  EXPECT_EQ(nce_residual(sp, r.path), 0.0);
}

TEST(Solve, MassScaling) {
  auto sp = small_grid();
  auto th = Interpolation::arithmetic();
  Vec a = bump(sp, 0.3), b = bump(sp, 0.7);
  auto r1 = solve(sp, th, a, b);
  auto r2 = solve(sp, th, 3.0 * a, 3.0 * b);
  ASSERT_TRUE(r1.converged() && r2.converged());
  EXPECT_NEAR(r2.objective / (3.0 * r1.objective), 1.0, 1e-5);
}

TEST(Solve, ConstantSpeedAndMetricBasics) {
  auto sp = small_grid();
  auto th = Interpolation::logarithmic();
  Vec a = bump(sp, 0.3), b = bump(sp, 0.7);
  auto r = solve(sp, th, a, b);
  ASSERT_TRUE(r.converged());
  double mean = r.objective / r.action_per_step.size();
  for (double v : r.action_per_step) EXPECT_LE(std::abs(v - mean), 0.05 * mean);
  auto back = solve(sp, th, b, a);
  EXPECT_NEAR(back.distance, r.distance, 1e-6);
  EXPECT_NEAR(path_action(sp, th, r.path), r.objective, 1e-6 * r.objective);
}

TEST(Solve, MassMismatchIsInfeasible) {
  auto sp = small_grid();
  auto r = solve(sp, Interpolation::arithmetic(), bump(sp, 0.3), 2.0 * bump(sp, 0.7));
  EXPECT_EQ(r.status, SolveStatus::Infeasible);
}

TEST(Solve, SingularAtomDivergesUnderFloorContinuation) {
  auto sp = small_grid(0.3, 16);
  SolveConfig cfg;
  cfg.singular_nodes = {2};
  auto r = solve(sp, Interpolation::logarithmic(), dirac_at(sp, 2), dirac_at(sp, 12), cfg);
  EXPECT_EQ(r.status, SolveStatus::InfiniteCost);
  ASSERT_EQ(r.floor_ratios.size(), 4u);
  for (double q : r.floor_ratios) EXPECT_GE(q, 9.9);
  auto ok = solve(sp, Interpolation::arithmetic(), dirac_at(sp, 2), dirac_at(sp, 12), cfg);
  EXPECT_TRUE(ok.converged());
}

TEST(Solve, SmoothedSandwich) {
  auto sp = build_grid(1, 1.0, 40, RadialKernel::indicator(1, 0.2));
  auto th = Interpolation::arithmetic();
  Vec a = bump(sp, 0.3, 0.08), b = bump(sp, 0.7, 0.08);
  Convolution K(sp, SmoothingKernel::laplace(1, 0.2));
  auto full = solve(sp, th, a, b);
  auto mid = solve_smoothed(sp, th, a, b, K);
  auto low = solve(sp, th, K.apply(a), K.apply(b));
  ASSERT_TRUE(full.converged() && mid.converged() && low.converged());
  EXPECT_GE(mid.distance, low.distance - 1e-3);
  EXPECT_LE(mid.distance, full.distance + 1e-3);
}

TEST(Solve, RestrictHalvesSquaredLength) {
  auto sp = small_grid();
  auto th = Interpolation::arithmetic();
  auto r = solve(sp, th, bump(sp, 0.3), bump(sp, 0.7));
  Path p = geodesic(r);
  Path same = restrict(p, 0.0, 1.0);
  EXPECT_EQ((same.rho.back() - p.rho.back()).norm(), 0.0);
  // half the length at constant speed: the unit-time restriction has action d^2 / 4
  double half = path_action(sp, th, restrict(p, 0.0, 0.5));
  EXPECT_NEAR(half, 0.25 * r.objective, 0.05 * 0.25 * r.objective);
  EXPECT_THROW(restrict(p, 0.0, 0.51), ContractViolation);
}

TEST(Solve, GeodesicRequiresConvergence) {
  SolveReport r;
  r.status = SolveStatus::MaxIters;
  EXPECT_THROW(geodesic(r), Error);
}
