#include <gtest/gtest.h>

#include <cmath>

#include "nlw/constructions.hpp"
#include "nlw/errors.hpp"
#include "nlw/solver.hpp"

using namespace nlw;

namespace {

// Closed forms evaluated independently at 30 digits (mpmath).
struct Golden {
  double c_theta, C_dtheta, C_dtheta_printed, C_dtheta_eta, C_dtheta_eta_printed;
  double C_ds, C_ds_printed, C_ds_tilde, C_dtheta_s, C_dtheta_s_printed;
};

void expect_rel(double got, double want, const char* what) {
  EXPECT_NEAR(got, want, 1e-12 * std::abs(want)) << what;
}

void check(const ConstantSet& c, const Golden& g) {
  expect_rel(c.c_theta, g.c_theta, "c_theta");
  expect_rel(c.C_dtheta, g.C_dtheta, "C_dtheta");
  expect_rel(c.C_dtheta_printed, g.C_dtheta_printed, "C_dtheta_printed");
  expect_rel(c.C_dtheta_eta, g.C_dtheta_eta, "C_dtheta_eta");
  expect_rel(c.C_dtheta_eta_printed, g.C_dtheta_eta_printed, "C_dtheta_eta_printed");
  if (!c.blowup) return;
  expect_rel(c.C_ds, g.C_ds, "C_ds");
  expect_rel(c.C_ds_printed, g.C_ds_printed, "C_ds_printed");
  expect_rel(c.C_ds_tilde, g.C_ds_tilde, "C_ds_tilde");
  expect_rel(c.C_dtheta_s, g.C_dtheta_s, "C_dtheta_s");
  expect_rel(c.C_dtheta_s_printed, g.C_dtheta_s_printed, "C_dtheta_s_printed");
}

}  // namespace

TEST(Constants, GoldenArithmeticIndicator1d) {
  auto c = assemble_constants(Interpolation::arithmetic(), RadialKernel::indicator(1));
  EXPECT_FALSE(c.blowup);
  EXPECT_EQ(c.kappa, 0.5);
  check(c, {1.0, 14.696938456699069, 2.5980762113533159, 12.24744871391589, 5.3319921874585755, 0, 0, 0, 0, 0});
  EXPECT_THROW(phi_bound(c, 0.1), RegimeError);
  EXPECT_THROW(expel_annuli_length_bound(c, 0.5), RegimeError);
}

TEST(Constants, GoldenGeometricFractional2d) {
  auto c = assemble_constants(Interpolation::geometric(), RadialKernel::fractional(2, 0.5, 1.0));
  EXPECT_EQ(c.kappa, 0.0);
  check(c, {1.1981402347355922, 34.415193419001, 6.0838041606055626, 35.903136190134543, 5.6496964252407511,
            0.045715683080218153, 0.29312210717432772, 2.1354571346456126, 83.41924004908552, 15.333273669160002});
  EXPECT_THROW(expel_boundary_length_bound(c, RadialKernel::fractional(2, 0.5, 1.0), 0.5), RegimeError);
}

TEST(Constants, GoldenLogarithmicFractional3d) {
  auto c = assemble_constants(Interpolation::logarithmic(), RadialKernel::fractional(3, 0.3, 2.0));
  check(c, {1.1021726088088838, 67.158104957455853, 11.871987856763732, 56.279487730159231, 7.003581523481938,
            0.031341326670570262, 0.25692193081425228, 2.9650957389120197, 132.96062561047448, 19.260211557571133});
}

TEST(Constants, BoundShapes) {
  auto c = assemble_constants(Interpolation::arithmetic(), RadialKernel::fractional(1, 0.5, 1.0));
  EXPECT_EQ(dirac_chain_bound(c, 0.0), 0.0);
  EXPECT_GT(dirac_chain_bound(c, 2.0), dirac_chain_bound(c, 1.0));
  // Phi is continuous at the switch between branches
  EXPECT_NEAR(phi_bound(c, 0.375 - 1e-12), phi_bound(c, 0.375), 1e-9);
  EXPECT_NEAR(phi_bound(c, 0.375), c.C_dtheta_s * std::pow(0.375, 0.25), 1e-12);
  EXPECT_NEAR(tv_upper_constant(c, 0.0), 4 * c.C_dtheta_eta * c.C_dtheta_eta, 1e-9);
}

TEST(Constructions, TwoPointCurveMatchesSolver) {
  for (const char* name : {"arithmetic", "logarithmic", "geometric"}) {
    auto th = Interpolation::by_name(name);
    auto cert = two_point_curve(th, 0.5);
    EXPECT_TRUE(cert.holds(1e-9)) << name;
    auto sp = two_point_space(0.5);
    SolveConfig cfg;
    cfg.time_steps = 256;
    auto r = solve(sp, th, dirac_at(sp, 0), dirac_at(sp, 1), cfg);
    ASSERT_TRUE(r.converged());
    // the solver can only do better than any admissible curve, up to its tolerance
    EXPECT_LE(r.distance, cert.length * (1 + 2e-3)) << name;
    EXPECT_NEAR(r.distance, cert.length, 5e-3) << name;
  }
}

TEST(Constructions, MixtureLegFluxBalancesMasses) {
  auto sp = build_grid(1, 1.0, 12, RadialKernel::indicator(1, 0.5));
  Vec mu = Vec::Zero(12), nu = Vec::Zero(12);
  mu[3] = 1;
  mu[4] = 1;
  nu[6] = 2;
  mu /= total_mass(sp, mu);
  nu /= total_mass(sp, nu);
  MixtureLeg leg(sp, Interpolation::arithmetic(), mu, nu);
  EXPECT_LT((nl_divergence(sp, leg.unit_flux()) - (mu - nu)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_GT(leg.length(), 0);
  EXPECT_NEAR(leg.param_at(0.0), 0.0, 1e-12);
  EXPECT_NEAR(leg.param_at(1.0), 1.0, 1e-12);
}

TEST(Constructions, DiracChainAndExpelHold) {
  auto k = RadialKernel::indicator(1, 0.3);
  auto sp = build_grid(1, 1.0, 24, k);
  auto chain = dirac_chain_curve(sp, k, Interpolation::arithmetic(), 2, 20);
  EXPECT_TRUE(chain.holds(1e-9)) << chain.action_integral << " vs " << chain.claimed_bound;
  EXPECT_LT(chain.residual, 1e-8);

  auto f = RadialKernel::fractional(1, 0.5, 1.0, 0.3);
  auto fs = build_grid(1, 1.0, 24, f);
  auto annuli = expel_curve_annuli(fs, f, Interpolation::logarithmic(), 12, 0.15);
  EXPECT_TRUE(annuli.holds(1e-9)) << annuli.action_integral << " vs " << annuli.claimed_bound;

  auto boundary = expel_curve_boundary(sp, k, Interpolation::arithmetic(), 12, 0.15);
  EXPECT_TRUE(boundary.holds(1e-9)) << boundary.action_integral << " vs " << boundary.claimed_bound;
}
