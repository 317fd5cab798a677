#pragma once

#include <string>
#include <vector>

#include "nlw/dynamics.hpp"

namespace nlw {

struct SolveConfig {
  int time_steps = 16;
  int max_iters = 50000;     // cap on Newton iterations (all barrier rounds and floors)
  double feas_tol = 1e-7;    // max_k,i |dM/dt + div F| / total mass
  double gap_tol = 1e-7;     // barrier duality gap relative to the objective
  double rho_floor = 1e-9;   // times the uniform density; added to theta on every edge
  double barrier_decrease = 0.1;
  // Floor continuation: extra decades tried when the floor carries part of the action.
  int floor_decades = 4;
  double floor_share_trigger = 1e-3;
  // Growth per floor decade above which the objective is declared divergent.
  double divergence_ratio = 3.0;
  // Nodes of zero reference measure inside theta (continuum atoms); see README.
  std::vector<int> singular_nodes;
  bool record_trace = false;
};

enum class SolveStatus { Converged, MaxIters, Infeasible, InfiniteCost };
std::string to_string(SolveStatus s);

struct TraceRow {
  int iteration;
  double objective, residual, barrier, floor;
};

struct SolveReport {
  SolveStatus status = SolveStatus::Converged;
  double distance = 0;
  double objective = 0;  // sum_k dt A_k = distance^2
  std::vector<double> action_per_step;
  int iterations = 0;
  double residual = 0;   // relative NCE residual of the returned path
  double gap = 0;        // final barrier gap bound
  double floor = 0;      // density floor in effect for the returned path
  double floor_share = 0;  // fraction of the objective attributable to the floor
  std::vector<double> floor_objectives;  // continuation sequence (first = default floor)
  std::vector<double> floor_ratios;      // successive objective ratios
  Path path;             // densities seen by the action (smoothed ones for solve_smoothed)
  std::vector<TraceRow> trace;
  std::string message;

  bool converged() const { return status == SolveStatus::Converged; }
};

SolveReport solve(const DiscreteSpace& sp, const Interpolation& theta, const Vec& mu0, const Vec& mu1,
                  const SolveConfig& cfg = {});

// Free path M_t between mu0 and mu1; the action and the continuity equation see the
// K-convolved densities and an independent flux. report.path holds the convolved path.
SolveReport solve_smoothed(const DiscreteSpace& sp, const Interpolation& theta, const Vec& mu0,
                           const Vec& mu1, const Convolution& K, const SolveConfig& cfg = {});

// Optimizer path of a converged report.
Path geodesic(const SolveReport& r);
// Restriction to [t0, t1] reparametrized to unit time; t0, t1 must lie on the time grid.
Path restrict(const Path& p, double t0, double t1);

}  // namespace nlw
