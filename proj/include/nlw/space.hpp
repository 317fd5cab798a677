#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlw/kernels.hpp"

namespace nlw {

using Vec = Eigen::VectorXd;

// Densities are vectors rho_i w.r.t. the reference masses m_i; fluxes are
// per-edge values j(i,j) for the stored orientation i < j.
class DiscreteSpace {
 public:
  int dim() const { return dim_; }
  int size() const { return n_; }
  int num_edges() const { return static_cast<int>(ei_.size()); }

  std::span<const double> point(int i) const { return {x_.data() + std::size_t(i) * dim_, std::size_t(dim_)}; }
  const std::vector<double>& coords() const { return x_; }
  const Vec& mass() const { return m_; }
  double mass(int i) const { return m_[i]; }

  int edge_i(int e) const { return ei_[e]; }
  int edge_j(int e) const { return ej_[e]; }
  double edge_eta(int e) const { return eta_[e]; }
  double edge_dist(int e) const { return dist_[e]; }
  const std::vector<int>& edge_i() const { return ei_; }
  const std::vector<int>& edge_j() const { return ej_; }
  const std::vector<double>& edge_eta() const { return eta_; }

  // Neighbours of node i: (neighbour, edge index) pairs.
  int degree(int i) const { return off_[i + 1] - off_[i]; }
  int neighbor(int i, int k) const { return nbr_[off_[i] + k]; }
  int neighbor_edge(int i, int k) const { return nbr_edge_[off_[i] + k]; }

  // sup_i sum_j eta_ij m_j and sup_i sum_j |x_i-x_j|^2 eta_ij m_j
  double c_const() const { return c_const_; }
  double c_tilde() const { return c_tilde_; }
  double diameter() const { return diameter_; }
  double min_spacing() const { return min_spacing_; }
  double total_reference_mass() const { return m_.sum(); }
  double distance(int i, int j) const;

  bool is_grid() const { return grid_n_ > 0; }
  int grid_n() const { return grid_n_; }
  double grid_h() const { return grid_h_; }
  double extent() const { return extent_; }
  const std::optional<RadialKernel>& kernel() const { return kernel_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  // Recompute C and C~ by a direct pair scan (for verification).
  std::pair<double, double> brute_force_constants() const;

  friend DiscreteSpace build_grid(int, double, int, const RadialKernel&);
  friend DiscreteSpace build_cloud(const std::vector<double>&, const Vec&, int, const RadialKernel&);
  friend DiscreteSpace build_graph(const std::vector<double>&, const Vec&, int,
                                   const std::vector<int>&, const std::vector<int>&,
                                   const std::vector<double>&);

 private:
  int dim_ = 1, n_ = 0;
  std::vector<double> x_;
  Vec m_;
  std::vector<int> ei_, ej_;
  std::vector<double> eta_, dist_;
  std::vector<int> off_, nbr_, nbr_edge_;
  double c_const_ = 0, c_tilde_ = 0, diameter_ = 0, min_spacing_ = 0;
  int grid_n_ = 0;
  double grid_h_ = 0, extent_ = 0;
  std::optional<RadialKernel> kernel_;
  std::vector<std::string> warnings_;

  void finalize();
};

// Cell-centred uniform grid on [0, extent]^d: nodes (k + 1/2) h, m_i = h^d.
DiscreteSpace build_grid(int dim, double extent, int n_per_axis, const RadialKernel& kernel);
// Arbitrary points (row-major, n x dim) with given reference masses; all pairs in kernel range.
DiscreteSpace build_cloud(const std::vector<double>& points, const Vec& masses, int dim,
                          const RadialKernel& kernel);
// Explicit weighted graph.
DiscreteSpace build_graph(const std::vector<double>& points, const Vec& masses, int dim,
                          const std::vector<int>& ei, const std::vector<int>& ej,
                          const std::vector<double>& eta);
// Two nodes at distance 1, m = (1,1), one edge of weight w.
DiscreteSpace two_point_space(double w);

// ---- measures

double total_mass(const DiscreteSpace& sp, const Vec& rho);
Vec dirac_at(const DiscreteSpace& sp, int i);
Vec uniform_density(const DiscreteSpace& sp);
// Uniform probability density on the nodes within distance r of x (inclusive).
Vec uniform_ball(const DiscreteSpace& sp, std::span<const double> x, double r);
// Uniform probability density on a node set.
Vec uniform_on(const DiscreteSpace& sp, const std::vector<int>& nodes);
Vec gaussian_bump(const DiscreteSpace& sp, std::span<const double> center, double sigma);
double tv_distance(const DiscreteSpace& sp, const Vec& a, const Vec& b);
Vec min_measure(const Vec& a, const Vec& b);
int nearest_node(const DiscreteSpace& sp, std::span<const double> x);

// ---- convolution

// Discrete convolution (k * rho)_i = sum_j P_ij rho_j m_j with P symmetric and
// scaled so that sum_j P_ij m_j = 1 (constants preserved, mass preserved).
class Convolution {
 public:
  Convolution(const DiscreteSpace& sp, const SmoothingKernel& k, bool normalize = true);
  Vec apply(const Vec& rho) const;
  const Eigen::MatrixXd& matrix() const { return P_; }
  // Q_ij = m_i P_ij maps masses to masses.
  Eigen::MatrixXd mass_operator() const;
  const std::string& warning() const { return warning_; }

 private:
  const DiscreteSpace* sp_;
  Eigen::MatrixXd P_;
  std::string warning_;
};

}  // namespace nlw
