#include "nlw/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "nlw/errors.hpp"

namespace nlw {

ActionValue action(const DiscreteSpace& sp, const Interpolation& theta, const Vec& rho, const Vec& j,
                   bool breakdown) {
  if (rho.size() != sp.size()) throw ContractViolation("density size does not match space");
  if (j.size() != sp.num_edges()) throw ContractViolation("flux size does not match edge count");
  ActionValue out;
  if (breakdown) out.per_edge.assign(std::size_t(sp.num_edges()), 0.0);
  for (int e = 0; e < sp.num_edges(); ++e) {
    const double f = j[e];
    if (f == 0.0) continue;
    const int a = sp.edge_i(e), b = sp.edge_j(e);
    const double th = theta(rho[a], rho[b]);
    double v = th > 0 ? f * f / th * sp.edge_eta(e) * sp.mass(a) * sp.mass(b) : INFINITY;
    out.total += v;
    if (breakdown) out.per_edge[std::size_t(e)] = v;
  }
  return out;
}

double action_pairs(const DiscreteSpace& sp, const Interpolation& theta, const Vec& rho,
                    const Eigen::MatrixXd& J) {
  double total = 0.0;
  for (int e = 0; e < sp.num_edges(); ++e) {
    const int a = sp.edge_i(e), b = sp.edge_j(e);
    const double th = theta(rho[a], rho[b]);
    const double w = sp.edge_eta(e) * sp.mass(a) * sp.mass(b);
    for (double f : {J(a, b), J(b, a)}) {
      if (f == 0.0) continue;
      total += th > 0 ? 0.5 * f * f / th * w : INFINITY;
    }
  }
  return total;
}

Vec nl_divergence(const DiscreteSpace& sp, const Vec& j) {
  if (j.size() != sp.num_edges()) throw ContractViolation("flux size does not match edge count");
  Vec div = Vec::Zero(sp.size());
  for (int e = 0; e < sp.num_edges(); ++e) {
    const int a = sp.edge_i(e), b = sp.edge_j(e);
    const double w = j[e] * sp.edge_eta(e);
    div[a] += w * sp.mass(b);
    div[b] -= w * sp.mass(a);
  }
  return div;
}

std::vector<double> nce_residuals(const DiscreteSpace& sp, const Path& path) {
  if (path.rho.size() != path.flux.size() + 1) throw ContractViolation("path needs T+1 densities and T fluxes");
  std::vector<double> out;
  const double dt = path.dt();
  for (int k = 0; k < path.steps(); ++k) {
    Vec r = (path.rho[k + 1] - path.rho[k]) / dt + nl_divergence(sp, path.flux[k]);
    out.push_back(r.size() ? r.cwiseAbs().maxCoeff() : 0.0);
  }
  return out;
}

double nce_residual(const DiscreteSpace& sp, const Path& path) {
  auto r = nce_residuals(sp, path);
  return r.empty() ? 0.0 : *std::max_element(r.begin(), r.end());
}

std::vector<double> step_actions(const DiscreteSpace& sp, const Interpolation& theta, const Path& path) {
  std::vector<double> out;
  for (int k = 0; k < path.steps(); ++k) {
    Vec mid = 0.5 * (path.rho[k] + path.rho[k + 1]);
    out.push_back(path.dt() * action(sp, theta, mid, path.flux[k]).total);
  }
  return out;
}

double path_action(const DiscreteSpace& sp, const Interpolation& theta, const Path& path) {
  double s = 0.0;
  for (double v : step_actions(sp, theta, path)) s += v;
  return s;
}

Path scale_path(const Path& p, double c) {
  Path q = p;
  for (auto& r : q.rho) r *= c;
  for (auto& f : q.flux) f *= c;
  return q;
}

// ---------------------------------------------------------------- nonlocalization

Vec grid_divergence(const DiscreteSpace& grid, const Eigen::MatrixXd& J) {
  if (!grid.is_grid()) throw ContractViolation("local divergence needs a grid space");
  const int d = grid.dim(), n = grid.grid_n(), N = grid.size();
  if (J.rows() != N || J.cols() != d) throw ContractViolation("vector field must be (nodes x dim)");
  const double h = grid.grid_h();
  Vec div = Vec::Zero(N);
  int stride = 1;
  for (int k = d - 1; k >= 0; --k) {
    for (int i = 0; i < N; ++i) {
      const int c = (i / stride) % n;
      double v;
      if (c == 0)
        v = (J(i + stride, k) - J(i, k)) / h;
      else if (c == n - 1)
        v = (J(i, k) - J(i - stride, k)) / h;
      else
        v = (J(i + stride, k) - J(i - stride, k)) / (2 * h);
      div[i] += v;
    }
    stride *= n;
  }
  return div;
}

Path nonlocalize(const DiscreteSpace& grid, const RadialKernel& kernel, const std::vector<Vec>& rho,
                 const std::vector<Eigen::MatrixXd>& J, const NonlocalizeOptions& opt) {
  if (rho.size() != J.size() + 1 || J.empty()) throw ContractViolation("need T+1 densities and T flux fields");
  if (kernel.dim() != grid.dim()) throw ContractViolation("kernel dimension does not match grid");
  const int T = static_cast<int>(J.size());
  const double dt = 1.0 / T;

  double rate = 0.0, worst = 0.0;
  for (int k = 0; k < T; ++k) {
    Vec drho = (rho[k + 1] - rho[k]) / dt;
    rate = std::max(rate, drho.cwiseAbs().maxCoeff());
    worst = std::max(worst, (drho + grid_divergence(grid, J[k])).cwiseAbs().maxCoeff());
  }
  if (worst > opt.local_tol * std::max(rate, 1e-300) && worst > 1e-12)
    throw ContractViolation("input does not satisfy the local continuity equation (residual " +
                            std::to_string(worst) + ")");

  Path out;
  if (opt.convolve) {
    Convolution conv(grid, SmoothingKernel::zeta_of(kernel), false);
    for (const Vec& r : rho) out.rho.push_back(conv.apply(r));
  } else {
    out.rho = rho;
  }
  const double c = grid.dim() / kernel.moment(2);
  for (int k = 0; k < T; ++k) {
    Vec f(grid.num_edges());
    for (int e = 0; e < grid.num_edges(); ++e) {
      const int a = grid.edge_i(e), b = grid.edge_j(e);
      auto xa = grid.point(a), xb = grid.point(b);
      double s = 0.0;
      for (int q = 0; q < grid.dim(); ++q) s += (xb[q] - xa[q]) * (J[k](a, q) + J[k](b, q));
      f[e] = c * s;
    }
    out.flux.push_back(std::move(f));
  }
  return out;
}

// ---------------------------------------------------------------- ring

DiscreteSpace build_ring(int n, double length, const RadialKernel& kernel) {
  if (n < 3) throw ContractViolation("ring needs at least 3 nodes");
  if (kernel.dim() != 1) throw ContractViolation("ring kernel must be one-dimensional");
  const double h = length / n;
  const double reach = kernel.scale() * (1 + 1e-10);
  std::vector<double> pts(std::size_t(n), 0.0);
  for (int i = 0; i < n; ++i) pts[std::size_t(i)] = (i + 0.5) * h;
  std::vector<int> ei, ej;
  std::vector<double> eta;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const int k = std::min(j - i, n - (j - i));
      const double r = k * h;
      if (r > reach) continue;
      const double v = kernel.eval(std::min(r, kernel.scale()), 0.5 * h);
      if (v <= 0) continue;
      ei.push_back(i);
      ej.push_back(j);
      eta.push_back(v);
    }
  return build_graph(pts, Vec::Constant(n, h), 1, ei, ej, eta);
}

std::pair<Vec, Vec> ring_translation_average(const DiscreteSpace& ring, const Vec& w, const Vec& rho,
                                             const Vec& j) {
  const int n = ring.size();
  if (w.size() != n) throw ContractViolation("need one weight per shift");
  std::unordered_map<long long, int> index;
  for (int e = 0; e < ring.num_edges(); ++e) index[(long long)ring.edge_i(e) * n + ring.edge_j(e)] = e;
  Vec r = Vec::Zero(n), f = Vec::Zero(ring.num_edges());
  for (int z = 0; z < n; ++z) {
    if (w[z] == 0.0) continue;
    for (int i = 0; i < n; ++i) r[i] += w[z] * rho[((i - z) % n + n) % n];
    for (int e = 0; e < ring.num_edges(); ++e) {
      int a = ((ring.edge_i(e) - z) % n + n) % n, b = ((ring.edge_j(e) - z) % n + n) % n;
      double sign = 1.0;
      if (a > b) {
        std::swap(a, b);
        sign = -1.0;
      }
      auto it = index.find((long long)a * n + b);
      if (it == index.end()) throw ContractViolation("ring edge set is not shift invariant");
      f[e] += w[z] * sign * j[it->second];
    }
  }
  return {r, f};
}

}  // namespace nlw

namespace nlw {

LocalFlow translating_bump(const DiscreteSpace& grid, double c0, double v, double sigma, int T) {
  if (grid.dim() != 1) throw ContractViolation("translating bump is one-dimensional");
  if (T < 1 || !(sigma > 0)) throw ContractViolation("bad bump parameters");
  const int n = grid.size();
  const double norm = 1.0 / (sigma * std::sqrt(2 * M_PI));
  auto dens = [&](double u) { return norm * std::exp(-0.5 * u * u / (sigma * sigma)); };
  auto cdf = [&](double u) { return 0.5 * std::erfc(-u / (sigma * std::sqrt(2.0))); };
  LocalFlow f;
  for (int k = 0; k <= T; ++k) {
    const double t = double(k) / T;
    Vec r(n);
    for (int i = 0; i < n; ++i) r[i] = dens(grid.point(i)[0] - c0 - v * t);
    f.rho.push_back(std::move(r));
  }
  for (int k = 0; k < T; ++k) {
    const double t0 = double(k) / T, t1 = double(k + 1) / T;
    Eigen::MatrixXd J(n, 1);
    for (int i = 0; i < n; ++i) {
      const double x = grid.point(i)[0] - c0;
      J(i, 0) = v == 0.0 ? 0.0 : T * (cdf(x - v * t0) - cdf(x - v * t1));
    }
    f.J.push_back(std::move(J));
  }
  return f;
}

}  // namespace nlw
