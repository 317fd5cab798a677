#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nlw/errors.hpp"
#include "nlw/transport.hpp"

using namespace nlw;

namespace {

DiscreteSpace line(int n, double eps = 0.2) { return build_grid(1, 1.0, n, RadialKernel::indicator(1, eps)); }

DiscreteSpace atoms(const std::vector<double>& x) {
  return build_cloud(x, Vec::Ones(Eigen::Index(x.size())), 1, RadialKernel::indicator(1, 0.01));
}

}  // namespace

TEST(Transport, DiracToDirac) {
  auto sp = atoms({0.0, 1.0});
  EXPECT_NEAR(w2(sp, dirac_at(sp, 0), dirac_at(sp, 1)).distance, 1.0, 1e-14);
  EXPECT_NEAR(w1(sp, dirac_at(sp, 0), dirac_at(sp, 1)), 1.0, 1e-14);
}

TEST(Transport, SplitMass) {
  auto sp = atoms({0.0, 0.5, 1.0});
  Vec mu(3), nu(3);
  mu << 0.5, 0, 0.5;
  nu << 0, 1, 0;
  auto r = w2(sp, mu, nu);
  EXPECT_NEAR(r.distance, 0.5, 1e-14);
  EXPECT_EQ(r.plan.support.size(), 2u);
}

TEST(Transport, MatchesQuantileOnRandomLines) {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> U(0, 1);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<double> x(50);
    for (auto& v : x) v = U(gen);
    auto sp = atoms(x);
    Vec mu(50), nu(50);
    for (int i = 0; i < 50; ++i) {
      mu[i] = U(gen) < 0.5 ? U(gen) : 0.0;
      nu[i] = U(gen);
    }
    mu /= mu.sum();
    nu /= nu.sum();
    EXPECT_NEAR(w2(sp, mu, nu).distance, w2_quantile(sp, mu, nu), 1e-8);
  }
}

TEST(Transport, PlanMarginalsAndDuals) {
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> U(0, 1);
  const int ns = 30, nt = 40;
  Vec a(ns), b(nt);
  Eigen::MatrixXd C(ns, nt);
  for (int i = 0; i < ns; ++i) a[i] = U(gen);
  for (int j = 0; j < nt; ++j) b[j] = U(gen);
  b *= a.sum() / b.sum();
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < nt; ++j) C(i, j) = U(gen);
  auto s = solve_transport(a, b, C);
  Vec ra = Vec::Zero(ns), rb = Vec::Zero(nt);
  for (auto& e : s.plan.support) {
    ra[e.i] += e.mass;
    rb[e.j] += e.mass;
    EXPECT_NEAR(s.u[e.i] + s.v[e.j], C(e.i, e.j), 1e-12);
  }
  EXPECT_LE((ra - a).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((rb - b).cwiseAbs().maxCoeff(), 1e-12);
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < nt; ++j) EXPECT_LE(s.u[i] + s.v[j], C(i, j) + 1e-12);
  EXPECT_NEAR(a.dot(s.u) + b.dot(s.v), s.plan.cost, 1e-11);
  EXPECT_LE(s.plan.support.size(), std::size_t(ns + nt - 1));
}

TEST(Transport, DegenerateAssignment) {
  // permutation problems are maximally degenerate
  const int n = 60;
  std::mt19937 gen(11);
  std::uniform_int_distribution<int> D(0, 9);
  Eigen::MatrixXd C(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) C(i, j) = D(gen);
  auto s = solve_transport(Vec::Ones(n), Vec::Ones(n), C);
  EXPECT_NEAR(Vec::Ones(n).dot(s.u) + Vec::Ones(n).dot(s.v), s.plan.cost, 1e-9);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) EXPECT_LE(s.u[i] + s.v[j], C(i, j) + 1e-9);
}

TEST(Transport, RejectsUnbalanced) {
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(2, 2);
  EXPECT_THROW(solve_transport(Vec::Ones(2), 2 * Vec::Ones(2), C), ContractViolation);
}

TEST(Transport, KantorovichDualityGap) {
  auto sp = line(60);
  double c1[1] = {0.3}, c2[1] = {0.65};
  Vec mu = gaussian_bump(sp, c1, 0.07), nu = gaussian_bump(sp, c2, 0.12);
  auto kp = kantorovich_potential(sp, mu, nu);
  const double W = w2(sp, mu, nu).distance;
  EXPECT_NEAR(kp.dual, 0.5 * W * W, 1e-8);
  EXPECT_NEAR(kp.primal, 0.5 * W * W, 1e-12);
  // c-concavity: phi1(y) - phi0(x) <= |x-y|^2 / 2
  for (int i = 0; i < sp.size(); i += 3)
    for (int j = 0; j < sp.size(); j += 3) {
      const double d = sp.distance(i, j);
      EXPECT_LE(kp.phi1[j] - kp.phi0[i], 0.5 * d * d + 1e-12);
    }
}

TEST(Transport, KantorovichOnDisjointCompactSupports) {
  auto sp = line(96);
  Vec mu = Vec::Zero(sp.size()), nu = Vec::Zero(sp.size());
  for (int i = 10; i < 30; ++i) mu[i] = 1.0 + 0.1 * (i % 3);
  for (int i = 60; i < 70; ++i) nu[i] = 2.0;
  mu /= total_mass(sp, mu);
  nu /= total_mass(sp, nu);
  auto kp = kantorovich_potential(sp, mu, nu);
  const double W = w2(sp, mu, nu).distance;
  EXPECT_NEAR(kp.dual, 0.5 * W * W, 1e-8);
  EXPECT_TRUE(kp.phi0.allFinite() && kp.phi1.allFinite());
  EXPECT_LE(lipschitz_constant(sp, kp.phi0), sp.diameter() + 1e-12);
}

TEST(Transport, HopfLaxLinearAndAbs) {
  auto sp = line(201);
  Vec lin(sp.size()), ab(sp.size());
  for (int i = 0; i < sp.size(); ++i) {
    const double x = sp.point(i)[0];
    lin[i] = x;
    ab[i] = std::abs(x - 0.5);
  }
  const double t = 0.1;
  Vec hl = hopf_lax(sp, lin, t), ha = hopf_lax(sp, ab, t);
  const double h = sp.grid_h();
  for (int i = 0; i < sp.size(); ++i) {
    const double x = sp.point(i)[0];
    if (x > t + h && x < 1 - h) EXPECT_NEAR(hl[i], x - t / 2, h * h / t);
    const double r = std::abs(x - 0.5);
    const double exact = r >= t ? r - t / 2 : r * r / (2 * t);
    if (x > 0.5 - 0.3 && x < 0.5 + 0.3) EXPECT_NEAR(ha[i], exact, h * h / t);
  }
  EXPECT_LE(lipschitz_constant(sp, ha), 1.0 + 1e-12);
  EXPECT_NEAR(edge_lipschitz(sp, lin), 1.0, 1e-12);
}

TEST(Transport, ConvolutionContractsTowardsItself) {
  auto sp = line(80);
  double c1[1] = {0.35};
  Vec mu = gaussian_bump(sp, c1, 0.05);
  double prev = 0;
  for (double s : {0.02, 0.05, 0.1}) {
    Convolution K(sp, SmoothingKernel::laplace(1, s));
    const double d = w2(sp, mu, K.apply(mu)).distance;
    EXPECT_GT(d, prev);
    prev = d;
  }
}

TEST(Transport, W2ContractsUnderConvolution) {
  auto sp = line(90);
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> U(0, 1);
  for (int rep = 0; rep < 6; ++rep) {
    double c1[1] = {0.15 + 0.3 * U(gen)}, c2[1] = {0.5 + 0.35 * U(gen)};
    Vec mu = gaussian_bump(sp, c1, 0.03 + 0.05 * U(gen)), nu = gaussian_bump(sp, c2, 0.03 + 0.05 * U(gen));
    for (double s : {0.02, 0.08}) {
      Convolution K(sp, SmoothingKernel::laplace(1, s));
      EXPECT_LE(w2(sp, K.apply(mu), K.apply(nu)).distance, w2(sp, mu, nu).distance + 1e-8);
    }
  }
}
