#pragma once

#include <Eigen/Dense>
#include <vector>

#include "nlw/interpolation.hpp"
#include "nlw/kernels.hpp"
#include "nlw/space.hpp"

namespace nlw {

// Time-staggered path: densities at t_k = k/T, edge fluxes at midpoints.
struct Path {
  std::vector<Vec> rho;   // T + 1 densities
  std::vector<Vec> flux;  // T fluxes, one value per stored edge

  int steps() const { return static_cast<int>(flux.size()); }
  double dt() const { return 1.0 / steps(); }
  double time(int k) const { return double(k) / steps(); }
};

struct ActionValue {
  double total = 0.0;
  std::vector<double> per_edge;  // filled on request
  bool infinite() const { return total == INFINITY; }
};

// sum over stored edges of j_e^2 / theta(rho_i, rho_j) eta_e m_i m_j, with 0/0 = 0.
ActionValue action(const DiscreteSpace& sp, const Interpolation& theta, const Vec& rho, const Vec& j,
                   bool breakdown = false);

// Ordered-pair form 1/2 sum_{i != j} J_ij^2 / theta eta_ij m_i m_j for a general
// (not necessarily antisymmetric) n x n edge matrix; entries off the edge set are ignored.
double action_pairs(const DiscreteSpace& sp, const Interpolation& theta, const Vec& rho,
                    const Eigen::MatrixXd& J);

// div_i = sum_j j(i,j) eta_ij m_j
Vec nl_divergence(const DiscreteSpace& sp, const Vec& j);

// max_k max_i |(rho_{k+1} - rho_k)/dt + div(j_{k+1/2})_i|
double nce_residual(const DiscreteSpace& sp, const Path& path);
// Per-step sup-norm residuals.
std::vector<double> nce_residuals(const DiscreteSpace& sp, const Path& path);

// dt * A(midpoint density, flux) per step; +inf entries propagate.
std::vector<double> step_actions(const DiscreteSpace& sp, const Interpolation& theta, const Path& path);
double path_action(const DiscreteSpace& sp, const Interpolation& theta, const Path& path);

// Densities and fluxes multiplied by c.
Path scale_path(const Path& p, double c);

// ---- exact nonlocalization

// Local divergence of a nodal vector field (n x d) on a grid: centred differences,
// one-sided at the boundary.
Vec grid_divergence(const DiscreteSpace& grid, const Eigen::MatrixXd& J);

struct NonlocalizeOptions {
  // Convolve densities with the normalized zeta kernel (false gives the control experiment).
  bool convolve = true;
  // Allowed local-CE residual relative to max |d rho/dt|.
  double local_tol = 0.1;
};

// Densities zeta_bar * rho_t and flux j(x,y) = d/(eps^2 M_2) (y - x).(J(x) + J(y)).
// rho has T+1 entries, J has T entries (midpoint fields, n x d).
Path nonlocalize(const DiscreteSpace& grid, const RadialKernel& kernel, const std::vector<Vec>& rho,
                 const std::vector<Eigen::MatrixXd>& J, const NonlocalizeOptions& opt = {});

struct LocalFlow {
  std::vector<Vec> rho;                 // T + 1 nodal densities
  std::vector<Eigen::MatrixXd> J;       // T midpoint fluxes (n x 1)
};
// 1D Gaussian bump rho(x,t) = N(x; c0 + v t, sigma^2) at the nodes, with the time-averaged
// flux v * mean_{[t_k, t_k+1]} rho, so the continuous local CE holds exactly per step.
LocalFlow translating_bump(const DiscreteSpace& grid, double c0, double v, double sigma, int T);

// ---- periodic ring (used for the translation-average contraction property)

// n nodes on a circle of circumference L; edges by circular distance within the kernel reach.
DiscreteSpace build_ring(int n, double length, const RadialKernel& kernel);
// rho -> sum_z w_z rho(. - z), j(a,b) -> sum_z w_z j(a - z, b - z) over index shifts z.
std::pair<Vec, Vec> ring_translation_average(const DiscreteSpace& ring, const Vec& w, const Vec& rho,
                                             const Vec& j);

}  // namespace nlw
