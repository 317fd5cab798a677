#pragma once

#include <Eigen/Dense>
#include <vector>

#include "nlw/space.hpp"

namespace nlw {

struct PlanEntry {
  int i, j;  // node indices of the two spaces (or of the cost matrix)
  double mass;
};

struct TransportPlan {
  std::vector<PlanEntry> support;
  double cost = 0;
};

// Exact transportation LP min <C, P> over couplings of the mass vectors a and b (equal sums).
// Duals satisfy u_i + v_j <= C_ij with equality on the plan; entries with zero mass get no dual.
struct TransportSolution {
  TransportPlan plan;
  Vec u, v;
  int pivots = 0;
};
TransportSolution solve_transport(const Vec& a, const Vec& b, const Eigen::MatrixXd& C);

// Largest support handled by the exact solvers below.
constexpr int kMaxTransportSupport = 2000;

// Densities mu, nu w.r.t. the reference masses; cost |x_i - x_j|^2.
struct W2Result {
  double distance = 0;
  TransportPlan plan;
};
W2Result w2(const DiscreteSpace& sp, const Vec& mu, const Vec& nu);
double w1(const DiscreteSpace& sp, const Vec& mu, const Vec& nu);

// Monotone rearrangement in 1D: W_p between atoms (x, a) and (y, b).
double wp_quantile(std::vector<double> x, Vec a, std::vector<double> y, Vec b, double p);
// Same on a 1D space.
double w2_quantile(const DiscreteSpace& sp, const Vec& mu, const Vec& nu);

// Optimal pair for c(x, y) = |x - y|^2 / 2: phi1 = phi0^c, dual = <phi1, nu> - <phi0, mu>.
struct KantorovichPair {
  Vec phi0, phi1;
  double dual = 0;    // equals W2^2 / 2 up to round-off
  double primal = 0;  // W2^2 / 2 from the plan
};
KantorovichPair kantorovich_potential(const DiscreteSpace& sp, const Vec& mu, const Vec& nu);

// phi_t(x) = min_y phi0(y) + |x - y|^2 / (2t) over the nodes.
Vec hopf_lax(const DiscreteSpace& sp, const Vec& phi0, double t);

// max |phi_i - phi_j| / |x_i - x_j| over all node pairs.
double lipschitz_constant(const DiscreteSpace& sp, const Vec& phi);
// Same over the stored edges only.
double edge_lipschitz(const DiscreteSpace& sp, const Vec& phi);

}  // namespace nlw
