#include "nlw/space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "nlw/errors.hpp"

namespace nlw {

namespace {

constexpr std::size_t kMaxEdges = 100'000'000;

double sq_dist(const double* a, const double* b, int d) {
  double s = 0;
  for (int k = 0; k < d; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

}  // namespace

double DiscreteSpace::distance(int i, int j) const {
  return std::sqrt(sq_dist(x_.data() + std::size_t(i) * dim_, x_.data() + std::size_t(j) * dim_, dim_));
}

void DiscreteSpace::finalize() {
  const int E = num_edges();
  // sort edges by (i,j)
  std::vector<int> order(E);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return ei_[a] != ei_[b] ? ei_[a] < ei_[b] : ej_[a] < ej_[b];
  });
  auto permute = [&](auto& v) {
    auto w = v;
    for (int e = 0; e < E; ++e) w[e] = v[order[e]];
    v = std::move(w);
  };
  permute(ei_);
  permute(ej_);
  permute(eta_);
  if (dist_.size() != std::size_t(E)) {
    dist_.resize(E);
    for (int e = 0; e < E; ++e) dist_[e] = distance(ei_[e], ej_[e]);
  } else {
    permute(dist_);
  }

  std::vector<int> deg(n_, 0);
  for (int e = 0; e < E; ++e) {
    ++deg[ei_[e]];
    ++deg[ej_[e]];
  }
  off_.assign(n_ + 1, 0);
  for (int i = 0; i < n_; ++i) off_[i + 1] = off_[i] + deg[i];
  nbr_.resize(off_[n_]);
  nbr_edge_.resize(off_[n_]);
  std::vector<int> fill(off_.begin(), off_.end() - 1);
  for (int e = 0; e < E; ++e) {
    int i = ei_[e], j = ej_[e];
    nbr_[fill[i]] = j;
    nbr_edge_[fill[i]++] = e;
    nbr_[fill[j]] = i;
    nbr_edge_[fill[j]++] = e;
  }

  std::vector<double> c(n_, 0.0), ct(n_, 0.0);
  for (int e = 0; e < E; ++e) {
    int i = ei_[e], j = ej_[e];
    double r2 = dist_[e] * dist_[e];
    c[i] += eta_[e] * m_[j];
    c[j] += eta_[e] * m_[i];
    ct[i] += r2 * eta_[e] * m_[j];
    ct[j] += r2 * eta_[e] * m_[i];
  }
  c_const_ = n_ ? *std::max_element(c.begin(), c.end()) : 0.0;
  c_tilde_ = n_ ? *std::max_element(ct.begin(), ct.end()) : 0.0;
}

std::pair<double, double> DiscreteSpace::brute_force_constants() const {
  double c = 0, ct = 0;
  for (int i = 0; i < n_; ++i) {
    double a = 0, b = 0;
    for (int j = 0; j < n_; ++j) {
      if (j == i) continue;
      double w = 0;
      for (int e = 0; e < num_edges(); ++e)
        if ((ei_[e] == i && ej_[e] == j) || (ei_[e] == j && ej_[e] == i)) w = eta_[e];
      double r = distance(i, j);
      a += w * m_[j];
      b += r * r * w * m_[j];
    }
    c = std::max(c, a);
    ct = std::max(ct, b);
  }
  return {c, ct};
}

DiscreteSpace build_grid(int dim, double extent, int n_per_axis, const RadialKernel& kernel) {
  if (dim < 1) throw ContractViolation("grid dimension must be >= 1");
  if (n_per_axis < 2) throw ContractViolation("grid needs n_per_axis >= 2");
  if (!(extent > 0)) throw ContractViolation("grid extent must be positive");
  if (kernel.dim() != dim) throw ContractViolation("kernel dimension does not match grid");
  DiscreteSpace sp;
  sp.dim_ = dim;
  sp.grid_n_ = n_per_axis;
  sp.extent_ = extent;
  const double h = extent / n_per_axis;
  sp.grid_h_ = h;
  long long n = 1;
  for (int k = 0; k < dim; ++k) n *= n_per_axis;
  if (n > 50'000'000) throw ContractViolation("grid too large");
  sp.n_ = static_cast<int>(n);
  sp.x_.resize(std::size_t(n) * dim);
  std::vector<int> idx(dim, 0);
  for (long long i = 0; i < n; ++i) {
    long long r = i;
    for (int k = dim - 1; k >= 0; --k) {
      idx[k] = static_cast<int>(r % n_per_axis);
      r /= n_per_axis;
    }
    for (int k = 0; k < dim; ++k) sp.x_[std::size_t(i) * dim + k] = (idx[k] + 0.5) * h;
  }
  sp.m_ = Vec::Constant(n, std::pow(h, dim));
  sp.min_spacing_ = h;
  sp.diameter_ = std::sqrt(double(dim)) * h * (n_per_axis - 1);
  sp.kernel_ = kernel;
  if (kernel.scale() < 2 * h) {
    std::ostringstream o;
    o << "kernel scale " << kernel.scale() << " is below twice the grid spacing " << h;
    sp.warnings_.push_back(o.str());
  }

  // lexicographically positive integer offsets within the kernel support
  const double reach = kernel.scale() * (1 + 1e-10);
  const int R = static_cast<int>(std::floor(reach / h + 1e-9));
  std::vector<std::vector<int>> offsets;
  std::vector<double> off_dist;
  std::vector<int> o(dim, -R);
  while (true) {
    bool positive = false;
    for (int k = 0; k < dim; ++k) {
      if (o[k] != 0) {
        positive = o[k] > 0;
        break;
      }
    }
    if (positive) {
      double s2 = 0;
      for (int k = 0; k < dim; ++k) s2 += double(o[k]) * o[k];
      double r = h * std::sqrt(s2);
      if (r <= reach) {
        offsets.push_back(o);
        off_dist.push_back(r);
      }
    }
    int k = dim - 1;
    while (k >= 0 && o[k] == R) o[k--] = -R;
    if (k < 0) break;
    ++o[k];
  }
  const double r_min = 0.5 * h;
  std::vector<double> off_eta(offsets.size());
  for (std::size_t q = 0; q < offsets.size(); ++q)
    off_eta[q] = kernel.eval(std::min(off_dist[q], kernel.scale()), r_min);

  std::size_t estimate = std::size_t(n) * offsets.size();
  if (estimate > kMaxEdges) throw ContractViolation("edge count exceeds 1e8");
  sp.ei_.reserve(estimate);
  sp.ej_.reserve(estimate);
  sp.eta_.reserve(estimate);
  sp.dist_.reserve(estimate);
  for (long long i = 0; i < n; ++i) {
    long long r = i;
    for (int k = dim - 1; k >= 0; --k) {
      idx[k] = static_cast<int>(r % n_per_axis);
      r /= n_per_axis;
    }
    for (std::size_t q = 0; q < offsets.size(); ++q) {
      if (!(off_eta[q] > 0)) continue;
      long long j = 0;
      bool inside = true;
      for (int k = 0; k < dim; ++k) {
        int c = idx[k] + offsets[q][k];
        if (c < 0 || c >= n_per_axis) {
          inside = false;
          break;
        }
        j = j * n_per_axis + c;
      }
      if (!inside) continue;
      sp.ei_.push_back(static_cast<int>(i));
      sp.ej_.push_back(static_cast<int>(j));
      sp.eta_.push_back(off_eta[q]);
      sp.dist_.push_back(off_dist[q]);
    }
  }
  sp.finalize();
  return sp;
}

DiscreteSpace build_cloud(const std::vector<double>& points, const Vec& masses, int dim,
                          const RadialKernel& kernel) {
  if (dim < 1 || points.size() % dim != 0) throw ContractViolation("point array shape mismatch");
  const int n = static_cast<int>(points.size() / dim);
  if (masses.size() != n) throw ContractViolation("need one reference mass per point");
  if ((masses.array() <= 0).any()) throw ContractViolation("reference masses must be positive");
  if (kernel.dim() != dim) throw ContractViolation("kernel dimension does not match points");
  DiscreteSpace sp;
  sp.dim_ = dim;
  sp.n_ = n;
  sp.x_ = points;
  sp.m_ = masses;
  sp.kernel_ = kernel;
  double dmin = INFINITY, dmax = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double r = std::sqrt(sq_dist(&points[std::size_t(i) * dim], &points[std::size_t(j) * dim], dim));
      if (r <= 0) throw ContractViolation("duplicate points in cloud");
      dmin = std::min(dmin, r);
      dmax = std::max(dmax, r);
    }
  sp.min_spacing_ = n > 1 ? dmin : 0.0;
  sp.diameter_ = dmax;
  const double r_min = 0.5 * sp.min_spacing_;
  const double reach = kernel.scale() * (1 + 1e-10);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double r = sp.distance(i, j);
      if (r > reach) continue;
      double w = kernel.eval(std::min(r, kernel.scale()), r_min);
      if (!(w > 0)) continue;
      sp.ei_.push_back(i);
      sp.ej_.push_back(j);
      sp.eta_.push_back(w);
      sp.dist_.push_back(r);
      if (sp.ei_.size() > kMaxEdges) throw ContractViolation("edge count exceeds 1e8");
    }
  sp.finalize();
  return sp;
}

DiscreteSpace build_graph(const std::vector<double>& points, const Vec& masses, int dim,
                          const std::vector<int>& ei, const std::vector<int>& ej,
                          const std::vector<double>& eta) {
  const int n = static_cast<int>(points.size() / dim);
  if (masses.size() != n) throw ContractViolation("need one reference mass per point");
  if ((masses.array() <= 0).any()) throw ContractViolation("reference masses must be positive");
  if (ei.size() != ej.size() || ei.size() != eta.size()) throw ContractViolation("edge arrays mismatch");
  DiscreteSpace sp;
  sp.dim_ = dim;
  sp.n_ = n;
  sp.x_ = points;
  sp.m_ = masses;
  for (std::size_t e = 0; e < ei.size(); ++e) {
    int i = std::min(ei[e], ej[e]), j = std::max(ei[e], ej[e]);
    if (i == j) throw ContractViolation("self edge");
    if (i < 0 || j >= n) throw ContractViolation("edge endpoint out of range");
    if (!(eta[e] > 0)) throw ContractViolation("edge weights must be positive");
    sp.ei_.push_back(i);
    sp.ej_.push_back(j);
    sp.eta_.push_back(eta[e]);
  }
  double dmin = INFINITY, dmax = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double r = sp.distance(i, j);
      dmin = std::min(dmin, r);
      dmax = std::max(dmax, r);
    }
  sp.min_spacing_ = n > 1 ? dmin : 0.0;
  sp.diameter_ = dmax;
  sp.finalize();
  return sp;
}

DiscreteSpace two_point_space(double w) {
  if (!(w > 0)) throw ContractViolation("two-point edge weight must be positive");
  return build_graph({0.0, 1.0}, Vec::Ones(2), 1, {0}, {1}, {w});
}

// ---------------------------------------------------------------- measures

double total_mass(const DiscreteSpace& sp, const Vec& rho) { return rho.dot(sp.mass()); }

Vec dirac_at(const DiscreteSpace& sp, int i) {
  if (i < 0 || i >= sp.size()) throw ContractViolation("dirac node out of range");
  Vec r = Vec::Zero(sp.size());
  r[i] = 1.0 / sp.mass(i);
  return r;
}

Vec uniform_density(const DiscreteSpace& sp) {
  return Vec::Constant(sp.size(), 1.0 / sp.total_reference_mass());
}

Vec uniform_on(const DiscreteSpace& sp, const std::vector<int>& nodes) {
  if (nodes.empty()) throw ContractViolation("uniform measure on an empty node set");
  Vec r = Vec::Zero(sp.size());
  double M = 0;
  for (int i : nodes) M += sp.mass(i);
  for (int i : nodes) r[i] = 1.0 / M;
  return r;
}

Vec uniform_ball(const DiscreteSpace& sp, std::span<const double> x, double rad) {
  std::vector<int> nodes;
  for (int i = 0; i < sp.size(); ++i) {
    auto p = sp.point(i);
    double s2 = 0;
    for (int k = 0; k < sp.dim(); ++k) s2 += (p[k] - x[k]) * (p[k] - x[k]);
    if (std::sqrt(s2) <= rad * (1 + 1e-12)) nodes.push_back(i);
  }
  return uniform_on(sp, nodes);
}

Vec gaussian_bump(const DiscreteSpace& sp, std::span<const double> c, double sigma) {
  Vec r(sp.size());
  for (int i = 0; i < sp.size(); ++i) {
    auto p = sp.point(i);
    double s2 = 0;
    for (int k = 0; k < sp.dim(); ++k) s2 += (p[k] - c[k]) * (p[k] - c[k]);
    r[i] = std::exp(-0.5 * s2 / (sigma * sigma));
  }
  return r / total_mass(sp, r);
}

double tv_distance(const DiscreteSpace& sp, const Vec& a, const Vec& b) {
  double ma = total_mass(sp, a), mb = total_mass(sp, b);
  if (std::abs(ma - mb) > 1e-9 * std::max(1.0, std::abs(ma)))
    throw ContractViolation("tv_distance: total masses differ");
  return 0.5 * ((a - b).cwiseAbs().cwiseProduct(sp.mass())).sum();
}

Vec min_measure(const Vec& a, const Vec& b) { return a.cwiseMin(b); }

int nearest_node(const DiscreteSpace& sp, std::span<const double> x) {
  int best = 0;
  double bd = INFINITY;
  for (int i = 0; i < sp.size(); ++i) {
    auto p = sp.point(i);
    double s2 = 0;
    for (int k = 0; k < sp.dim(); ++k) s2 += (p[k] - x[k]) * (p[k] - x[k]);
    if (s2 < bd - 1e-15) {
      bd = s2;
      best = i;
    }
  }
  return best;
}

// ---------------------------------------------------------------- convolution

Convolution::Convolution(const DiscreteSpace& sp, const SmoothingKernel& k, bool normalize) : sp_(&sp) {
  const int n = sp.size();
  if (k.scale() < 2 * sp.min_spacing()) {
    std::ostringstream o;
    o << "smoothing scale " << k.scale() << " is below twice the point spacing " << sp.min_spacing();
    warning_ = o.str();
  }
  const double r_min = 0.5 * sp.min_spacing();
  P_.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double v = i == j && k.kind() == SmoothingKind::Zeta ? k.eval(r_min) : k.eval(sp.distance(i, j));
      P_(i, j) = P_(j, i) = v;
    }
  if (!normalize) return;
  const Vec& m = sp.mass();
  // symmetric Sinkhorn scaling: d_i sum_j K_ij d_j m_j = 1
  Vec d = Vec::Ones(n);
  double prev = INFINITY;
  for (int it = 0; it < 5000; ++it) {
    Vec row = P_ * d.cwiseProduct(m);
    double err = (d.cwiseProduct(row).array() - 1.0).abs().maxCoeff();
    if (err < 1e-14 || (err < 1e-12 && err >= prev)) break;
    prev = err;
    d = (d.array() / row.array()).sqrt();
  }
  P_ = d.asDiagonal() * P_ * d.asDiagonal();
}

Vec Convolution::apply(const Vec& rho) const { return P_ * rho.cwiseProduct(sp_->mass()); }

Eigen::MatrixXd Convolution::mass_operator() const { return sp_->mass().asDiagonal() * P_; }

}  // namespace nlw
