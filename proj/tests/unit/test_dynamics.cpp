#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nlw/dynamics.hpp"
#include "nlw/errors.hpp"

using namespace nlw;

namespace {

Vec random_vec(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> U(lo, hi);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = U(rng);
  return v;
}

}  // namespace

TEST(Action, TwoPointClosedForm) {
  auto sp = two_point_space(0.5);
  Vec rho = Vec::Ones(2), j(1);
  j << 3.0;
  EXPECT_DOUBLE_EQ(action(sp, Interpolation::arithmetic(), rho, j).total, 4.5);
  j << 0.0;
  EXPECT_EQ(action(sp, Interpolation::arithmetic(), rho, j).total, 0.0);
  Vec r2(2);
  r2 << 1.0, 0.0;
  j << 1.0;
  EXPECT_TRUE(action(sp, Interpolation::logarithmic(), r2, j).infinite());
  j << 0.0;
  EXPECT_EQ(action(sp, Interpolation::logarithmic(), r2, j).total, 0.0);
}

TEST(Action, PairFormMatchesEdgeForm) {
  std::mt19937_64 rng(3);
  auto sp = build_grid(1, 1.0, 20, RadialKernel::smooth_bump(1, 0.2));
  Vec rho = random_vec(rng, sp.size(), 0.1, 2.0), j = random_vec(rng, sp.num_edges(), -1, 1);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(sp.size(), sp.size());
  for (int e = 0; e < sp.num_edges(); ++e) {
    J(sp.edge_i(e), sp.edge_j(e)) = j[e];
    J(sp.edge_j(e), sp.edge_i(e)) = -j[e];
  }
  auto th = Interpolation::logarithmic();
  double a = action(sp, th, rho, j).total;
  EXPECT_NEAR(action_pairs(sp, th, rho, J), a, 1e-12 * a);
}

TEST(Divergence, TwoPointAndAdjoint) {
  auto sp = two_point_space(0.5);
  Vec j(1);
  j << 1.0;
  Vec d = nl_divergence(sp, j);
  EXPECT_DOUBLE_EQ(d[0], 0.5);
  EXPECT_DOUBLE_EQ(d[1], -0.5);
  EXPECT_EQ(nl_divergence(sp, Vec::Zero(1)).norm(), 0.0);

  std::mt19937_64 rng(8);
  auto g = build_grid(2, 1.0, 8, RadialKernel::indicator(2, 0.3));
  for (int t = 0; t < 20; ++t) {
    Vec phi = random_vec(rng, g.size(), -1, 1), f = random_vec(rng, g.num_edges(), -1, 1);
    double lhs = phi.cwiseProduct(nl_divergence(g, f)).dot(g.mass());
    double rhs = 0.0;
    for (int e = 0; e < g.num_edges(); ++e) {
      int a = g.edge_i(e), b = g.edge_j(e);
      rhs -= (phi[b] - phi[a]) * g.edge_eta(e) * f[e] * g.mass(a) * g.mass(b);
    }
    EXPECT_NEAR(lhs, rhs, 1e-12 * (1 + std::abs(rhs)));
  }
}

TEST(Residual, ConstantAndFluxless) {
  auto sp = build_grid(1, 1.0, 10, RadialKernel::indicator(1, 0.3));
  Path p;
  for (int k = 0; k <= 4; ++k) p.rho.push_back(Vec::Ones(10));
  for (int k = 0; k < 4; ++k) p.flux.push_back(Vec::Zero(sp.num_edges()));
  EXPECT_EQ(nce_residual(sp, p), 0.0);
  // moving densities, zero flux: residual = max |rho_dot|
  for (int k = 0; k <= 4; ++k) p.rho[k] = Vec::LinSpaced(10, 0, 1) * (k / 4.0);
  EXPECT_NEAR(nce_residual(sp, p), 1.0, 1e-12);
}

TEST(Action, Convexity) {
  std::mt19937_64 rng(21);
  auto sp = build_grid(1, 1.0, 12, RadialKernel::indicator(1, 0.25));
  std::uniform_real_distribution<double> U(0, 1);
  for (auto th : {Interpolation::arithmetic(), Interpolation::logarithmic(), Interpolation::geometric(),
                  Interpolation::harmonic()}) {
    for (int t = 0; t < 200; ++t) {
      Vec r1 = random_vec(rng, sp.size(), 0, 2), r2 = random_vec(rng, sp.size(), 0, 2);
      Vec j1 = random_vec(rng, sp.num_edges(), -1, 1), j2 = random_vec(rng, sp.num_edges(), -1, 1);
      double l = U(rng);
      double a1 = action(sp, th, r1, j1).total, a2 = action(sp, th, r2, j2).total;
      double am = action(sp, th, l * r1 + (1 - l) * r2, l * j1 + (1 - l) * j2).total;
      EXPECT_LE(am, l * a1 + (1 - l) * a2 + 1e-10 * (1 + a1 + a2));
    }
  }
}

TEST(Action, AntisymmetrizationAndHomogeneity) {
  std::mt19937_64 rng(5);
  auto sp = build_grid(1, 1.0, 10, RadialKernel::smooth_bump(1, 0.4));
  auto th = Interpolation::logarithmic();
  for (int t = 0; t < 100; ++t) {
    Vec rho = random_vec(rng, sp.size(), 0.01, 2);
    Eigen::MatrixXd J = Eigen::MatrixXd::Random(sp.size(), sp.size());
    Eigen::MatrixXd A = 0.5 * (J - J.transpose());
    EXPECT_LE(action_pairs(sp, th, rho, A), action_pairs(sp, th, rho, J) + 1e-12);
    Vec j = random_vec(rng, sp.num_edges(), -1, 1);
    double a = action(sp, th, rho, j).total;
    EXPECT_NEAR(action(sp, th, 3.5 * rho, 3.5 * j).total, 3.5 * a, 1e-12 * a);
  }
}

TEST(Action, RingTranslationAverageContracts) {
  std::mt19937_64 rng(9);
  auto ring = build_ring(24, 1.0, RadialKernel::indicator(1, 0.15));
  for (auto th : {Interpolation::arithmetic(), Interpolation::logarithmic()}) {
    for (int t = 0; t < 50; ++t) {
      Vec w = random_vec(rng, ring.size(), 0, 1);
      w /= w.sum();
      Vec rho = random_vec(rng, ring.size(), 0.01, 2), j = random_vec(rng, ring.num_edges(), -1, 1);
      auto [r2, j2] = ring_translation_average(ring, w, rho, j);
      EXPECT_NEAR(total_mass(ring, r2), total_mass(ring, rho), 1e-12);
      EXPECT_LE(action(ring, th, r2, j2).total, action(ring, th, rho, j).total + 1e-10);
    }
  }
}

TEST(Nonlocalize, ZeroFlow) {
  auto g = build_grid(1, 1.0, 40, RadialKernel::indicator(1, 0.2));
  std::vector<Vec> rho(5, Vec::Ones(40));
  std::vector<Eigen::MatrixXd> J(4, Eigen::MatrixXd::Zero(40, 1));
  Path p = nonlocalize(g, RadialKernel::indicator(1, 0.2), rho, J);
  EXPECT_LT(nce_residual(g, p), 1e-12);
  for (auto& f : p.flux) EXPECT_EQ(f.norm(), 0.0);
}

TEST(Nonlocalize, RejectsNonSolutions) {
  auto g = build_grid(1, 1.0, 40, RadialKernel::indicator(1, 0.2));
  auto flow = translating_bump(g, 0.4, 0.2, 0.08, 8);
  for (auto& J : flow.J) J *= -1;
  EXPECT_THROW(nonlocalize(g, RadialKernel::indicator(1, 0.2), flow.rho, flow.J), ContractViolation);
}

TEST(Nonlocalize, FirstOrderConvergence) {
  const double eps = 0.2;
  std::vector<double> res, ctl;
  for (int n : {64, 128, 256}) {
    auto k = RadialKernel::indicator(1, eps);
    // extent 1.6 keeps eps / h integral for every n
    auto g = build_grid(1, 1.6, n, k);
    auto flow = translating_bump(g, 0.6, 0.3, 0.08, 16);
    res.push_back(nce_residual(g, nonlocalize(g, k, flow.rho, flow.J)));
    ctl.push_back(nce_residual(g, nonlocalize(g, k, flow.rho, flow.J, {.convolve = false})));
  }
  for (int i = 0; i + 1 < 3; ++i) {
    double ratio = res[i] / res[i + 1];
    EXPECT_GT(ratio, 1.4) << res[i] << " " << res[i + 1];
    EXPECT_LT(ratio, 2.6) << res[i] << " " << res[i + 1];
  }
  EXPECT_GT(ctl.back(), 0.5 * ctl.front());
  EXPECT_GT(ctl.back(), 10 * res.back());
}
