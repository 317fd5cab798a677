#include "nlw/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nlw/errors.hpp"

namespace nlw {

namespace {

// Primal network simplex on the complete bipartite graph sources -> sinks, with an
// artificial root joined to every node. Strongly feasible spanning trees (leaving arc
// chosen as the last blocking arc from the apex) prevent cycling on degenerate pivots.
class NetworkSimplex {
 public:
  NetworkSimplex(const Vec& a, const Vec& b, const Eigen::MatrixXd& C)
      : ns_(int(a.size())), nt_(int(b.size())), C_(C) {
    N_ = ns_ + nt_;
    root_ = N_;
    m_ = ns_ * nt_;
    const int arcs = m_ + N_;
    flow_.assign(std::size_t(arcs), 0.0);
    tree_.assign(std::size_t(arcs), 0);
    max_cost_ = C.size() ? C.cwiseAbs().maxCoeff() : 0.0;
    art_ = (max_cost_ + 1.0) * (N_ + 1);
    tol_ = 1e-12 * (max_cost_ + 1.0) * std::sqrt(double(N_));
    adj_.assign(std::size_t(N_ + 1), {});
    for (int i = 0; i < ns_; ++i) {
      flow_[std::size_t(art(i))] = a[i];
      tree_[std::size_t(art(i))] = 1;
      adj_[std::size_t(i)].push_back(art(i));
      adj_[std::size_t(root_)].push_back(art(i));
    }
    for (int j = 0; j < nt_; ++j) {
      flow_[std::size_t(art(ns_ + j))] = b[j];
      tree_[std::size_t(art(ns_ + j))] = 1;
      adj_[std::size_t(ns_ + j)].push_back(art(ns_ + j));
      adj_[std::size_t(root_)].push_back(art(ns_ + j));
    }
    parent_.assign(std::size_t(N_ + 1), -1);
    pred_.assign(std::size_t(N_ + 1), -1);
    depth_.assign(std::size_t(N_ + 1), 0);
    pi_.assign(std::size_t(N_ + 1), 0.0);
    rebuild();
  }

  int run() {
    int pivots = 0;
    const int block = std::max(10, int(std::sqrt(double(m_))));
    int next = 0;
    while (true) {
      int enter = -1;
      double best = -tol_;
      int scanned = 0;
      while (scanned < m_) {
        const int stop = std::min(block, m_ - scanned);
        for (int q = 0; q < stop; ++q) {
          const int e = next;
          next = next + 1 == m_ ? 0 : next + 1;
          if (tree_[std::size_t(e)]) continue;
          const double rc = reduced(e);
          if (rc < best) {
            best = rc;
            enter = e;
          }
        }
        scanned += stop;
        if (enter >= 0) break;
      }
      if (enter < 0) break;
      pivot(enter);
      ++pivots;
    }
    return pivots;
  }

  double flow(int i, int j) const { return flow_[std::size_t(i * nt_ + j)]; }
  double artificial_flow() const {
    double s = 0;
    for (int v = 0; v < N_; ++v) s += flow_[std::size_t(art(v))];
    return s;
  }
  // u_i = -pi_i, v_j = pi_j
  double u(int i) const { return -pi_[std::size_t(i)]; }
  double v(int j) const { return pi_[std::size_t(ns_ + j)]; }

 private:
  int ns_, nt_, N_, root_, m_;
  const Eigen::MatrixXd& C_;
  std::vector<double> flow_;
  std::vector<char> tree_;
  std::vector<std::vector<int>> adj_;  // tree arcs per node
  std::vector<int> parent_, pred_, depth_;
  std::vector<double> pi_;
  double max_cost_, art_, tol_;

  int art(int v) const { return m_ + v; }
  int tail(int e) const {
    if (e < m_) return e / nt_;
    const int v = e - m_;
    return v < ns_ ? v : root_;
  }
  int head(int e) const {
    if (e < m_) return ns_ + e % nt_;
    const int v = e - m_;
    return v < ns_ ? root_ : v;
  }
  double cost(int e) const { return e < m_ ? C_(e / nt_, e % nt_) : art_; }
  double reduced(int e) const { return cost(e) + pi_[std::size_t(tail(e))] - pi_[std::size_t(head(e))]; }
  // pred arc of u points u -> parent
  bool up(int u) const { return tail(pred_[std::size_t(u)]) == u; }

  void rebuild() {
    std::vector<int> queue{root_};
    parent_[std::size_t(root_)] = -1;
    pred_[std::size_t(root_)] = -1;
    depth_[std::size_t(root_)] = 0;
    pi_[std::size_t(root_)] = 0.0;
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const int x = queue[q];
      for (int e : adj_[std::size_t(x)]) {
        if (e == pred_[std::size_t(x)]) continue;
        const int y = tail(e) == x ? head(e) : tail(e);
        parent_[std::size_t(y)] = x;
        pred_[std::size_t(y)] = e;
        depth_[std::size_t(y)] = depth_[std::size_t(x)] + 1;
        // tree arcs have zero reduced cost
        pi_[std::size_t(y)] = tail(e) == x ? pi_[std::size_t(x)] + cost(e) : pi_[std::size_t(x)] - cost(e);
        queue.push_back(y);
      }
    }
  }

  void pivot(int enter) {
    const int first = tail(enter), second = head(enter);
    int a = first, b = second;
    while (a != b) {
      if (depth_[std::size_t(a)] >= depth_[std::size_t(b)])
        a = parent_[std::size_t(a)];
      else
        b = parent_[std::size_t(b)];
    }
    const int join = a;
    double delta = INFINITY;
    int out = -1;
    for (int x = first; x != join; x = parent_[std::size_t(x)]) {
      const double d = up(x) ? flow_[std::size_t(pred_[std::size_t(x)])] : INFINITY;
      if (d < delta) {
        delta = d;
        out = x;
      }
    }
    for (int x = second; x != join; x = parent_[std::size_t(x)]) {
      const double d = up(x) ? INFINITY : flow_[std::size_t(pred_[std::size_t(x)])];
      if (d <= delta) {
        delta = d;
        out = x;
      }
    }
    if (out < 0) throw Error("transport LP is unbounded");
    flow_[std::size_t(enter)] += delta;
    for (int x = first; x != join; x = parent_[std::size_t(x)])
      flow_[std::size_t(pred_[std::size_t(x)])] += up(x) ? -delta : delta;
    for (int x = second; x != join; x = parent_[std::size_t(x)])
      flow_[std::size_t(pred_[std::size_t(x)])] += up(x) ? delta : -delta;
    const int leave = pred_[std::size_t(out)];
    flow_[std::size_t(leave)] = 0.0;
    tree_[std::size_t(leave)] = 0;
    tree_[std::size_t(enter)] = 1;
    for (int x : {tail(leave), head(leave)}) {
      auto& v = adj_[std::size_t(x)];
      v.erase(std::find(v.begin(), v.end(), leave));
    }
    adj_[std::size_t(first)].push_back(enter);
    adj_[std::size_t(second)].push_back(enter);
    rebuild();
  }
};

std::vector<int> support_of(const Vec& w) {
  std::vector<int> s;
  for (int i = 0; i < w.size(); ++i)
    if (w[i] > 0) s.push_back(i);
  return s;
}

double dist2(const DiscreteSpace& sp, int i, int j) {
  const double d = sp.distance(i, j);
  return d * d;
}

void check_measures(const DiscreteSpace& sp, const Vec& mu, const Vec& nu) {
  if (mu.size() != sp.size() || nu.size() != sp.size()) throw ContractViolation("measure size does not match the space");
  if ((mu.array() < 0).any() || (nu.array() < 0).any()) throw ContractViolation("negative density");
  const double a = total_mass(sp, mu), b = total_mass(sp, nu);
  if (std::abs(a - b) > 1e-10 * std::max(a, b)) throw ContractViolation("measures have different mass");
}

// Optimal plan between the supports of mu and nu (masses rho m) for cost c(d(x_i, x_j)).
template <class Cost>
TransportSolution solve_on_space(const DiscreteSpace& sp, const Vec& mu, const Vec& nu, Cost c,
                                 std::vector<int>& S, std::vector<int>& Tg) {
  check_measures(sp, mu, nu);
  Vec a = mu.cwiseProduct(sp.mass()), b = nu.cwiseProduct(sp.mass());
  S = support_of(a);
  Tg = support_of(b);
  if (int(S.size()) > kMaxTransportSupport || int(Tg.size()) > kMaxTransportSupport)
    throw ContractViolation("support exceeds the exact transport size limit");
  Vec as(S.size()), bs(Tg.size());
  Eigen::MatrixXd C(S.size(), Tg.size());
  for (std::size_t p = 0; p < S.size(); ++p) {
    as[Eigen::Index(p)] = a[S[p]];
    for (std::size_t q = 0; q < Tg.size(); ++q) C(Eigen::Index(p), Eigen::Index(q)) = c(S[p], Tg[q]);
  }
  for (std::size_t q = 0; q < Tg.size(); ++q) bs[Eigen::Index(q)] = b[Tg[q]];
  TransportSolution sol = solve_transport(as, bs, C);
  for (auto& e : sol.plan.support) {
    e.i = S[std::size_t(e.i)];
    e.j = Tg[std::size_t(e.j)];
  }
  Vec u = Vec::Constant(sp.size(), NAN), v = Vec::Constant(sp.size(), NAN);
  for (std::size_t p = 0; p < S.size(); ++p) u[S[p]] = sol.u[Eigen::Index(p)];
  for (std::size_t q = 0; q < Tg.size(); ++q) v[Tg[q]] = sol.v[Eigen::Index(q)];
  sol.u = std::move(u);
  sol.v = std::move(v);
  return sol;
}

}  // namespace

TransportSolution solve_transport(const Vec& a, const Vec& b, const Eigen::MatrixXd& C) {
  if (C.rows() != a.size() || C.cols() != b.size()) throw ContractViolation("cost matrix shape mismatch");
  if ((a.array() < 0).any() || (b.array() < 0).any()) throw ContractViolation("negative mass");
  const double sa = a.sum(), sb = b.sum();
  if (std::abs(sa - sb) > 1e-10 * std::max({sa, sb, 1e-300})) throw ContractViolation("unbalanced transport problem");
  TransportSolution out;
  out.u = Vec::Constant(a.size(), NAN);
  out.v = Vec::Constant(b.size(), NAN);
  std::vector<int> S = support_of(a), Tg = support_of(b);
  if (S.empty() || Tg.empty()) return out;
  Vec as(S.size()), bs(Tg.size());
  Eigen::MatrixXd Cs(S.size(), Tg.size());
  for (std::size_t p = 0; p < S.size(); ++p) {
    as[Eigen::Index(p)] = a[S[p]];
    for (std::size_t q = 0; q < Tg.size(); ++q) Cs(Eigen::Index(p), Eigen::Index(q)) = C(S[p], Tg[q]);
  }
  for (std::size_t q = 0; q < Tg.size(); ++q) bs[Eigen::Index(q)] = b[Tg[q]];
  // put the round-off imbalance on the largest sink so the LP is exactly balanced
  Eigen::Index big;
  bs.maxCoeff(&big);
  bs[big] += as.sum() - bs.sum();

  NetworkSimplex ns(as, bs, Cs);
  out.pivots = ns.run();
  if (ns.artificial_flow() > 1e-9 * sa) throw Error("transport LP ended with artificial flow");
  for (std::size_t p = 0; p < S.size(); ++p) {
    out.u[S[p]] = ns.u(int(p));
    for (std::size_t q = 0; q < Tg.size(); ++q) {
      const double f = ns.flow(int(p), int(q));
      if (f > 0) {
        out.plan.support.push_back({S[p], Tg[q], f});
        out.plan.cost += f * Cs(Eigen::Index(p), Eigen::Index(q));
      }
    }
  }
  for (std::size_t q = 0; q < Tg.size(); ++q) out.v[Tg[q]] = ns.v(int(q));
  // shift so the duals are O(cost) instead of carrying the artificial offset
  double shift = 0;
  int cnt = 0;
  for (std::size_t p = 0; p < S.size(); ++p) {
    shift += out.u[S[p]];
    ++cnt;
  }
  shift /= cnt;
  for (int i : S) out.u[i] -= shift;
  for (int j : Tg) out.v[j] += shift;
  return out;
}

W2Result w2(const DiscreteSpace& sp, const Vec& mu, const Vec& nu) {
  std::vector<int> S, T;
  auto sol = solve_on_space(sp, mu, nu, [&](int i, int j) { return dist2(sp, i, j); }, S, T);
  return {std::sqrt(std::max(0.0, sol.plan.cost)), sol.plan};
}

double w1(const DiscreteSpace& sp, const Vec& mu, const Vec& nu) {
  std::vector<int> S, T;
  return solve_on_space(sp, mu, nu, [&](int i, int j) { return sp.distance(i, j); }, S, T).plan.cost;
}

double wp_quantile(std::vector<double> x, Vec a, std::vector<double> y, Vec b, double p) {
  auto sorted = [](std::vector<double>& pos, Vec& w) {
    std::vector<std::size_t> idx(pos.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return pos[i] < pos[j]; });
    std::vector<double> p2(pos.size());
    Vec w2(w.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      p2[k] = pos[idx[k]];
      w2[Eigen::Index(k)] = w[Eigen::Index(idx[k])];
    }
    pos = std::move(p2);
    w = std::move(w2);
  };
  sorted(x, a);
  sorted(y, b);
  std::size_t i = 0, j = 0;
  double ra = a.size() ? a[0] : 0.0, rb = b.size() ? b[0] : 0.0, total = 0;
  while (i < x.size() && j < y.size()) {
    const double q = std::min(ra, rb);
    total += q * std::pow(std::abs(x[i] - y[j]), p);
    ra -= q;
    rb -= q;
    if (ra <= 0 && ++i < x.size()) ra = a[Eigen::Index(i)];
    if (rb <= 0 && ++j < y.size()) rb = b[Eigen::Index(j)];
  }
  return std::pow(total, 1.0 / p);
}

double w2_quantile(const DiscreteSpace& sp, const Vec& mu, const Vec& nu) {
  if (sp.dim() != 1) throw ContractViolation("quantile formula needs a 1D space");
  check_measures(sp, mu, nu);
  std::vector<double> x(sp.coords().begin(), sp.coords().end());
  return wp_quantile(x, mu.cwiseProduct(sp.mass()), x, nu.cwiseProduct(sp.mass()), 2.0);
}

KantorovichPair kantorovich_potential(const DiscreteSpace& sp, const Vec& mu, const Vec& nu) {
  std::vector<int> S, T;
  auto sol = solve_on_space(sp, mu, nu, [&](int i, int j) { return 0.5 * dist2(sp, i, j); }, S, T);
  const int n = sp.size();
  KantorovichPair kp;
  kp.primal = sol.plan.cost;
  // phi1 = v on supp nu; extend by two c-transforms (keeps optimality, gives c-concave pair)
  Vec psi = Vec::Constant(n, INFINITY);
  for (int y : T) {
    double best = INFINITY;
    for (int x : S) best = std::min(best, -sol.u[x] + 0.5 * dist2(sp, x, y));
    psi[y] = best;
  }
  kp.phi0 = Vec(n);
  for (int x = 0; x < n; ++x) {
    double best = -INFINITY;
    for (int y : T) best = std::max(best, psi[y] - 0.5 * dist2(sp, x, y));
    kp.phi0[x] = best;
  }
  kp.phi1 = hopf_lax(sp, kp.phi0, 1.0);
  kp.dual = (kp.phi1.cwiseProduct(nu) - kp.phi0.cwiseProduct(mu)).dot(sp.mass());
  return kp;
}

Vec hopf_lax(const DiscreteSpace& sp, const Vec& phi0, double t) {
  if (!(t > 0)) throw ContractViolation("Hopf-Lax time must be positive");
  const int n = sp.size();
  Vec out(n);
  for (int x = 0; x < n; ++x) {
    double best = INFINITY;
    for (int y = 0; y < n; ++y) best = std::min(best, phi0[y] + dist2(sp, x, y) / (2.0 * t));
    out[x] = best;
  }
  return out;
}

double lipschitz_constant(const DiscreteSpace& sp, const Vec& phi) {
  double L = 0;
  for (int i = 0; i < sp.size(); ++i)
    for (int j = i + 1; j < sp.size(); ++j) L = std::max(L, std::abs(phi[i] - phi[j]) / sp.distance(i, j));
  return L;
}

double edge_lipschitz(const DiscreteSpace& sp, const Vec& phi) {
  double L = 0;
  for (int e = 0; e < sp.num_edges(); ++e)
    L = std::max(L, std::abs(phi[sp.edge_i(e)] - phi[sp.edge_j(e)]) / sp.edge_dist(e));
  return L;
}

}  // namespace nlw
