#include "nlw/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "nlw/errors.hpp"

namespace nlw {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::MaxIters: return "MaxIters";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::InfiniteCost: return "InfiniteCost";
  }
  return "?";
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Trip = Eigen::Triplet<double>;

// Mass coordinates: y_k are the masses the action sees (T+1 vectors, endpoints fixed),
// F_k = j * eta * m_i * m_j the edge mass fluxes. The barrier acts on L y_k.
struct Problem {
  const DiscreteSpace* sp;
  const Interpolation* theta;
  int n = 0, E = 0, T = 0;
  double dt = 0, mass = 0, kappa = 0;
  Vec y0, yT;
  SpMat L;  // empty: identity
  Vec r;              // reference masses inside theta (0 marks a singular node)
  double floor = 0;   // density floor
  std::vector<int> comp, roots;
  std::shared_ptr<Eigen::SimplicialLDLT<SpMat>> lap;
  bool mapped() const { return L.rows() > 0; }
};

struct State {
  std::vector<Vec> y, F;
};

struct EdgeTheta {
  double v, a, b, aa, ab, bb;
};

// Theta(ybar) = theta(r_j ybar_i, r_i ybar_j) + floor m_i m_j and its ybar-derivatives.
EdgeTheta edge_theta(const Problem& P, int e, double ai, double aj, bool with_floor = true) {
  const DiscreteSpace& sp = *P.sp;
  const int i = sp.edge_i(e), j = sp.edge_j(e);
  const double ri = P.r[i], rj = P.r[j];
  const double u = rj * ai, w = ri * aj;
  EdgeTheta t{0, 0, 0, 0, 0, 0};
  if (u <= 0 || w <= 0) {
    // theta(x, 0) = kappa x
    if (u > 0) {
      t.v = P.kappa * u;
      t.a = P.kappa * rj;
    } else if (w > 0) {
      t.v = P.kappa * w;
      t.b = P.kappa * ri;
    }
  } else {
    ThetaDerivs d = P.theta->derivs(u, w);
    t = {d.v, rj * d.a, ri * d.b, rj * rj * d.aa, ri * rj * d.ab, ri * ri * d.bb};
  }
  if (with_floor) t.v += P.floor * sp.mass(i) * sp.mass(j);
  return t;
}

double step_objective(const Problem& P, const State& S, int k, bool with_floor = true) {
  const DiscreteSpace& sp = *P.sp;
  double s = 0;
  for (int e = 0; e < P.E; ++e) {
    const double f = S.F[k][e];
    if (f == 0) continue;
    const int i = sp.edge_i(e), j = sp.edge_j(e);
    const double th = edge_theta(P, e, 0.5 * (S.y[k][i] + S.y[k + 1][i]), 0.5 * (S.y[k][j] + S.y[k + 1][j]),
                                 with_floor).v;
    if (!(th > 0)) return INFINITY;
    s += P.dt * f * f / (sp.edge_eta(e) * th);
  }
  return s;
}

double objective(const Problem& P, const State& S, bool with_floor = true) {
  double s = 0;
  for (int k = 0; k < P.T; ++k) s += step_objective(P, S, k, with_floor);
  return s;
}

Vec barrier_arg(const Problem& P, const Vec& y) { return P.mapped() ? Vec(P.L * y) : y; }

double barrier(const Problem& P, const State& S) {
  double b = 0;
  for (int k = 1; k < P.T; ++k) {
    Vec z = barrier_arg(P, S.y[k]);
    for (int i = 0; i < P.n; ++i) {
      if (!(z[i] > 0)) return INFINITY;
      b -= std::log(z[i]);
    }
  }
  return b;
}

Vec outflow(const Problem& P, const Vec& F) {
  Vec o = Vec::Zero(P.n);
  for (int e = 0; e < P.E; ++e) {
    o[P.sp->edge_i(e)] += F[e];
    o[P.sp->edge_j(e)] -= F[e];
  }
  return o;
}

// max_k,i |y_{k+1} - y_k + dt B F_k| / (dt * mass)
double residual(const Problem& P, const State& S) {
  double r = 0;
  for (int k = 0; k < P.T; ++k) {
    Vec c = S.y[k + 1] - S.y[k] + P.dt * outflow(P, S.F[k]);
    r = std::max(r, c.cwiseAbs().maxCoeff());
  }
  return r / (P.dt * P.mass);
}

void components(Problem& P) {
  const DiscreteSpace& sp = *P.sp;
  P.comp.assign(std::size_t(P.n), -1);
  std::vector<int> stack;
  for (int s = 0; s < P.n; ++s) {
    if (P.comp[s] >= 0) continue;
    const int c = static_cast<int>(P.roots.size());
    P.roots.push_back(s);
    P.comp[s] = c;
    stack.assign(1, s);
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int q = 0; q < sp.degree(v); ++q) {
        int w = sp.neighbor(v, q);
        if (P.comp[w] < 0) {
          P.comp[w] = c;
          stack.push_back(w);
        }
      }
    }
  }
}

// Grounded graph Laplacian B B^T (unweighted incidence), one grounded root per component.
void build_laplacian(Problem& P) {
  const DiscreteSpace& sp = *P.sp;
  std::vector<Trip> t;
  for (int e = 0; e < P.E; ++e) {
    const int i = sp.edge_i(e), j = sp.edge_j(e);
    t.emplace_back(i, i, 1.0);
    t.emplace_back(j, j, 1.0);
    t.emplace_back(i, j, -1.0);
    t.emplace_back(j, i, -1.0);
  }
  for (int root : P.roots) t.emplace_back(root, root, 1.0);
  SpMat Lap(P.n, P.n);
  Lap.setFromTriplets(t.begin(), t.end());
  P.lap = std::make_shared<Eigen::SimplicialLDLT<SpMat>>(Lap);
  if (P.lap->info() != Eigen::Success) throw Error("graph Laplacian factorization failed");
}

// Least-norm flux correction so that y_{k+1} - y_k + dt B F_k = 0 holds to round-off.
// Component masses of interior y_k are first rescaled to their endpoint values.
void restore_feasibility(const Problem& P, State& S, bool fluxes = true) {
  const DiscreteSpace& sp = *P.sp;
  const std::size_t C = P.roots.size();
  std::vector<double> target(C, 0.0), cur(C);
  for (int i = 0; i < P.n; ++i) target[std::size_t(P.comp[i])] += P.y0[i];
  for (int k = 1; k < P.T; ++k) {
    std::fill(cur.begin(), cur.end(), 0.0);
    for (int i = 0; i < P.n; ++i) cur[std::size_t(P.comp[i])] += S.y[k][i];
    for (int i = 0; i < P.n; ++i) {
      const std::size_t c = std::size_t(P.comp[i]);
      if (cur[c] > 0) S.y[k][i] *= target[c] / cur[c];
    }
  }
  if (!fluxes) return;
  // minimal change in the action metric: dF = W B^T phi, (B W B^T) phi = -r / dt, W = eta Theta
  for (int k = 0; k < P.T; ++k) {
    Vec rhs = -(S.y[k + 1] - S.y[k]) / P.dt - outflow(P, S.F[k]);
    if (rhs.cwiseAbs().maxCoeff() == 0.0) continue;
    Vec w(P.E);
    std::vector<Trip> t;
    t.reserve(std::size_t(4 * P.E + P.roots.size()));
    for (int e = 0; e < P.E; ++e) {
      const int i = sp.edge_i(e), j = sp.edge_j(e);
      w[e] = sp.edge_eta(e) * edge_theta(P, e, 0.5 * (S.y[k][i] + S.y[k + 1][i]), 0.5 * (S.y[k][j] + S.y[k + 1][j])).v;
      t.emplace_back(i, i, w[e]);
      t.emplace_back(j, j, w[e]);
      t.emplace_back(i, j, -w[e]);
      t.emplace_back(j, i, -w[e]);
    }
    const double scale = w.maxCoeff();
    for (int root : P.roots) {
      t.emplace_back(root, root, scale);
      rhs[root] = 0;  // implied by the component mass balance
    }
    SpMat Lw(P.n, P.n);
    Lw.setFromTriplets(t.begin(), t.end());
    Eigen::SimplicialLDLT<SpMat> ch(Lw);
    // weights span many decades near singular nodes; refine against the true residual
    for (int pass = 0; pass < 4; ++pass) {
      Vec phi = ch.solve(rhs);
      for (int e = 0; e < P.E; ++e) S.F[k][e] += w[e] * (phi[sp.edge_i(e)] - phi[sp.edge_j(e)]);
      rhs = -(S.y[k + 1] - S.y[k]) / P.dt - outflow(P, S.F[k]);
      for (int root : P.roots) rhs[root] = 0;
      if (rhs.cwiseAbs().maxCoeff() <= 1e-14 * P.mass) break;
    }
  }
}

struct Newton {
  const Problem& P;
  int N = 0;
  SpMat K;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower> ldlt;
  Eigen::SparseLU<SpMat> lu;
  bool ldlt_ready = false, lu_ready = false, use_lu = false;
  std::vector<char> dropped;
  std::vector<double> gF, cI, cJ, dd;  // per edge-step: phi_F, phi_Fa_i, phi_Fa_j, phi_FF

  explicit Newton(const Problem& p) : P(p) {
    N = (2 * P.T - 1) * P.n;
    dropped.assign(std::size_t(N), 0);
    for (int root : P.roots) dropped[std::size_t(nu(P.T - 1, root))] = 1;
    const std::size_t ES = std::size_t(P.T) * std::size_t(P.E);
    gF.resize(ES);
    cI.resize(ES);
    cJ.resize(ES);
    dd.resize(ES);
  }
  int yv(int k, int i) const { return (k >= 1 && k <= P.T - 1) ? (2 * k - 1) * P.n + i : -1; }
  int nu(int k, int i) const { return 2 * k * P.n + i; }

  // LDL^T with a small quasi-definite shift on the multiplier block and iterative refinement;
  // falls back to pivoted LU (for the rest of the run) when the componentwise backward error
  // stays large, which happens for badly scaled floor-dominated problems.
  bool solve_kkt(const Vec& rhs, Vec& x) {
    auto backward_error = [&](const Vec& xx, const Vec& res) {
      Vec den = K.cwiseAbs() * xx.cwiseAbs() + rhs.cwiseAbs();
      double w = 0;
      for (int r = 0; r < N; ++r)
        if (den[r] > 0) w = std::max(w, std::abs(res[r]) / den[r]);
      return w;
    };
    if (!use_lu) {
      const Vec diag = K.diagonal();
      SpMat Ks = K;
      Vec reg = Vec::Zero(N);
      for (int k = 0; k < P.T; ++k)
        for (int i = 0; i < P.n; ++i) {
          const int r = nu(k, i);
          if (!dropped[std::size_t(r)]) reg[r] = 1e-10 * std::abs(diag[r]) + 1e-300;
        }
      for (int r = 0; r < N; ++r)
        if (reg[r] > 0) Ks.coeffRef(r, r) -= reg[r];
      if (!ldlt_ready) {
        ldlt.analyzePattern(Ks);
        ldlt_ready = true;
      }
      ldlt.factorize(Ks);
      if (ldlt.info() == Eigen::Success) {
        x = ldlt.solve(rhs);
        Vec res = rhs - K * x;
        for (int it = 0; it < 5; ++it) {
          x += ldlt.solve(res);
          res = rhs - K * x;
        }
        if (x.allFinite() && backward_error(x, res) <= 1e-11) return true;
      }
      use_lu = true;
    }
    if (!lu_ready) {
      lu.analyzePattern(K);
      lu_ready = true;
    }
    lu.factorize(K);
    if (lu.info() != Eigen::Success) return false;
    x = lu.solve(rhs);
    Vec res = rhs - K * x;
    x += lu.solve(res);
    return x.allFinite();
  }

  // Returns false if the linear solve fails. Fills dy (T+1, endpoints zero), dF, and the
  // Newton decrement lambda^2 = -grad . step.
  bool step(const State& S, double mu, std::vector<Vec>& dy, std::vector<Vec>& dF, double& lambda2) {
    const DiscreteSpace& sp = *P.sp;
    const int n = P.n;
    std::vector<Trip> trip;
    trip.reserve(std::size_t(P.T) * P.E * 36 + std::size_t(P.T) * n * 4);
    Vec rhs = Vec::Zero(N);
    std::vector<Vec> gy(std::size_t(P.T + 1), Vec::Zero(n));

    auto add = [&](int r, int c, double v) {
      if (r < 0 || c < 0) return;
      if (dropped[std::size_t(r)] || dropped[std::size_t(c)]) return;
      trip.emplace_back(r, c, v);
    };

    // edge terms, flux eliminated
    for (int k = 0; k < P.T; ++k) {
      for (int e = 0; e < P.E; ++e) {
        const int i = sp.edge_i(e), j = sp.edge_j(e);
        const double ai = 0.5 * (S.y[k][i] + S.y[k + 1][i]), aj = 0.5 * (S.y[k][j] + S.y[k + 1][j]);
        const EdgeTheta th = edge_theta(P, e, ai, aj);
        const double c = P.dt / sp.edge_eta(e), f = S.F[k][e];
        const double Th = th.v, Th2 = Th * Th, Th3 = Th2 * Th;
        const double pF = 2 * c * f / Th, pFF = 2 * c / Th;
        const double pA = -c * f * f * th.a / Th2, pB = -c * f * f * th.b / Th2;
        const double pAA = c * f * f * (2 * th.a * th.a / Th3 - th.aa / Th2);
        const double pAB = c * f * f * (2 * th.a * th.b / Th3 - th.ab / Th2);
        const double pBB = c * f * f * (2 * th.b * th.b / Th3 - th.bb / Th2);
        const double pFA = -2 * c * f * th.a / Th2, pFB = -2 * c * f * th.b / Th2;
        const std::size_t idx = std::size_t(k) * P.E + e;
        gF[idx] = pF;
        cI[idx] = pFA;
        cJ[idx] = pFB;
        dd[idx] = pFF;
        gy[k][i] += 0.5 * pA;
        gy[k + 1][i] += 0.5 * pA;
        gy[k][j] += 0.5 * pB;
        gy[k + 1][j] += 0.5 * pB;

        const double cv[4] = {pFA, pFB, P.dt, -P.dt};
        double Kl[4][4] = {{pAA, pAB, 0, 0}, {pAB, pBB, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}};
        for (int p = 0; p < 4; ++p)
          for (int q = 0; q < 4; ++q) Kl[p][q] -= cv[p] * cv[q] / pFF;
        // local coordinates -> unknowns: a_i = (y_k,i + y_k+1,i)/2, a_j likewise, nu_k,i, nu_k,j
        int idxs[6] = {yv(k, i), yv(k + 1, i), yv(k, j), yv(k + 1, j), nu(k, i), nu(k, j)};
        double wts[6] = {0.5, 0.5, 0.5, 0.5, 1.0, 1.0};
        int loc[6] = {0, 0, 1, 1, 2, 3};
        for (int p = 0; p < 6; ++p) {
          if (idxs[p] < 0) continue;
          rhs[idxs[p]] += wts[p] * cv[loc[p]] * pF / pFF;
          for (int q = 0; q < 6; ++q)
            if (idxs[q] >= 0) add(idxs[p], idxs[q], wts[p] * wts[q] * Kl[loc[p]][loc[q]]);
        }
      }
    }

    // barrier and constraint structure
    for (int k = 1; k < P.T; ++k) {
      Vec z = barrier_arg(P, S.y[k]);
      Vec inv = z.cwiseInverse();
      if (P.mapped()) {
        gy[k] -= mu * (P.L.transpose() * inv);
        SpMat H = SpMat(P.L.transpose()) * (mu * inv.cwiseAbs2()).asDiagonal() * P.L;
        for (int c = 0; c < H.outerSize(); ++c)
          for (SpMat::InnerIterator it(H, c); it; ++it) add(yv(k, int(it.row())), yv(k, int(it.col())), it.value());
      } else {
        gy[k] -= mu * inv;
        for (int a = 0; a < n; ++a) add(yv(k, a), yv(k, a), mu * inv[a] * inv[a]);
      }
    }
    for (int k = 0; k < P.T; ++k) {
      Vec rk = S.y[k + 1] - S.y[k] + P.dt * outflow(P, S.F[k]);
      for (int i = 0; i < n; ++i) {
        rhs[nu(k, i)] -= rk[i];
        add(nu(k, i), yv(k + 1, i), 1.0);
        add(yv(k + 1, i), nu(k, i), 1.0);
        add(nu(k, i), yv(k, i), -1.0);
        add(yv(k, i), nu(k, i), -1.0);
      }
    }
    for (int k = 1; k < P.T; ++k)
      for (int i = 0; i < n; ++i) rhs[yv(k, i)] -= gy[k][i];
    for (int r = 0; r < N; ++r)
      if (dropped[std::size_t(r)]) {
        trip.emplace_back(r, r, 1.0);
        rhs[r] = 0;
      }

    K.resize(N, N);
    K.setFromTriplets(trip.begin(), trip.end());
    trip.clear();
    trip.shrink_to_fit();
    Vec x;
    if (!solve_kkt(rhs, x)) return false;
    if (!x.allFinite()) return false;

    dy.assign(std::size_t(P.T + 1), Vec::Zero(n));
    for (int k = 1; k < P.T; ++k)
      for (int i = 0; i < n; ++i) dy[k][i] = x[yv(k, i)];
    dF.assign(std::size_t(P.T), Vec::Zero(P.E));
    lambda2 = 0;
    for (int k = 1; k < P.T; ++k) lambda2 -= gy[k].dot(dy[k]);
    for (int k = 0; k < P.T; ++k) {
      for (int e = 0; e < P.E; ++e) {
        const int i = sp.edge_i(e), j = sp.edge_j(e);
        const std::size_t idx = std::size_t(k) * P.E + e;
        const double dai = 0.5 * (dy[k][i] + dy[k + 1][i]), daj = 0.5 * (dy[k][j] + dy[k + 1][j]);
        const double ni = x[nu(k, i)], nj = x[nu(k, j)];
        dF[k][e] = -(gF[idx] + cI[idx] * dai + cJ[idx] * daj + P.dt * (ni - nj)) / dd[idx];
        lambda2 -= gF[idx] * dF[k][e];
      }
    }
    return true;
  }
};

double max_step(const Problem& P, const State& S, const std::vector<Vec>& dy) {
  double t = 1.0;
  for (int k = 1; k < P.T; ++k) {
    Vec z = barrier_arg(P, S.y[k]), dz = barrier_arg(P, dy[k]);
    for (int i = 0; i < P.n; ++i)
      if (dz[i] < 0) t = std::min(t, -0.99 * z[i] / dz[i]);
  }
  return t;
}

struct RunResult {
  SolveStatus status = SolveStatus::Converged;
  double objective = 0, gap = 0;
  int iterations = 0;
  bool stalled = false;
};

// Barrier path-following from a strictly feasible state.
RunResult run_barrier(const Problem& P, State& S, const SolveConfig& cfg, int iter_budget,
                      std::vector<TraceRow>* trace, double mu_start = 0) {
  RunResult out;
  Newton nt(P);
  const double Nbar = double(P.n) * (P.T - 1);
  double obj = objective(P, S);
  double mu = mu_start > 0 ? mu_start : std::max(obj, 1e-300) / Nbar;
  int stalled = 0;
  std::vector<Vec> dy, dF;
  State trial;
  while (true) {
    // centring
    int inner = 0;
    while (true) {
      if (out.iterations >= iter_budget) {
        out.status = SolveStatus::MaxIters;
        out.objective = objective(P, S);
        out.gap = mu * Nbar;
        return out;
      }
      double lambda2 = 0;
      if (!nt.step(S, mu, dy, dF, lambda2)) throw Error("Newton system is singular");
      ++out.iterations;
      ++inner;
      const double phi0 = objective(P, S) + mu * barrier(P, S);
      double t = max_step(P, S, dy);
      bool accepted = false;
      while (t > 1e-14) {
        trial = S;
        for (int k = 1; k < P.T; ++k) trial.y[k] += t * dy[k];
        for (int k = 0; k < P.T; ++k) trial.F[k] += t * dF[k];
        const double phi1 = objective(P, trial) + mu * barrier(P, trial);
        if (std::isfinite(phi1) && phi1 <= phi0 - 0.25 * t * std::max(lambda2, 0.0) + 1e-15 * std::abs(phi0)) {
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (accepted) {
        S = std::move(trial);
        restore_feasibility(P, S);
      }
      stalled = accepted ? 0 : (inner == 1 ? stalled + 1 : stalled);
      if (stalled >= 3) {
        out.status = SolveStatus::MaxIters;
        out.objective = objective(P, S);
        out.gap = mu * Nbar;
        out.stalled = true;
        return out;
      }
      if (trace) trace->push_back({out.iterations, objective(P, S), residual(P, S), mu, P.floor});
      if (!accepted || 0.5 * std::max(lambda2, 0.0) <= 1e-3 * mu * Nbar || inner >= 200) break;
    }
    obj = objective(P, S);
    if (mu * Nbar <= cfg.gap_tol * std::max(obj, 1e-300) && residual(P, S) <= cfg.feas_tol) {
      out.objective = obj;
      out.gap = mu * Nbar;
      return out;
    }
    mu *= cfg.barrier_decrease;
  }
}

SolveReport solve_problem(Problem& P, const Vec& m0, const Vec& m1, const SolveConfig& cfg) {
  const DiscreteSpace& sp = *P.sp;
  SolveReport rep;
  if (cfg.time_steps < 2) throw ConfigError("time_steps must be at least 2");
  if (!(cfg.feas_tol > 0) || !(cfg.gap_tol > 0)) throw ConfigError("tolerances must be positive");
  if ((m0.array() < 0).any() || (m1.array() < 0).any()) throw ContractViolation("negative density");
  P.n = sp.size();
  P.E = sp.num_edges();
  P.T = cfg.time_steps;
  P.dt = 1.0 / P.T;
  P.kappa = P.theta->kappa();
  P.mass = m0.sum();
  P.r = sp.mass();
  for (int s : cfg.singular_nodes) {
    if (s < 0 || s >= P.n) throw ContractViolation("singular node out of range");
    P.r[s] = 0;
  }
  components(P);
  build_laplacian(P);

  // endpoint masses per component must match
  std::vector<double> c0(P.roots.size(), 0.0), c1(P.roots.size(), 0.0);
  for (int i = 0; i < P.n; ++i) {
    c0[std::size_t(P.comp[i])] += m0[i];
    c1[std::size_t(P.comp[i])] += m1[i];
  }
  const double total = std::max(m0.sum(), m1.sum());
  for (std::size_t c = 0; c < c0.size(); ++c) {
    if (std::abs(c0[c] - c1[c]) > 1e-10 * std::max(total, 1e-300)) {
      rep.status = SolveStatus::Infeasible;
      rep.distance = INFINITY;
      rep.objective = INFINITY;
      rep.message = c0.size() > 1 ? "endpoint masses differ on a connected component" : "endpoint masses differ";
      return rep;
    }
  }
  if (!(total > 0)) throw ContractViolation("measures must have positive mass");

  auto fill_report = [&](const State& S) {
    rep.path.rho.clear();
    rep.path.flux.clear();
    for (int k = 0; k <= P.T; ++k) rep.path.rho.push_back(S.y[k].cwiseQuotient(sp.mass()));
    for (int k = 0; k < P.T; ++k) {
      Vec j(P.E);
      for (int e = 0; e < P.E; ++e)
        j[e] = S.F[k][e] / (sp.edge_eta(e) * sp.mass(sp.edge_i(e)) * sp.mass(sp.edge_j(e)));
      rep.path.flux.push_back(j);
    }
    rep.action_per_step.clear();
    for (int k = 0; k < P.T; ++k) rep.action_per_step.push_back(step_objective(P, S, k));
    rep.residual = residual(P, S);
  };

  // identical endpoints: the constant path is optimal with zero action
  if ((P.y0 - P.yT).cwiseAbs().maxCoeff() == 0.0) {
    State S;
    S.y.assign(std::size_t(P.T + 1), P.y0);
    S.F.assign(std::size_t(P.T), Vec::Zero(P.E));
    fill_report(S);
    rep.message = "identical endpoints";
    return rep;
  }

  // strictly positive start: interpolation blended with the uniform measure
  State S;
  const double uniform_density = P.mass / sp.total_reference_mass();
  Vec uni = sp.mass() * uniform_density;
  S.y.resize(std::size_t(P.T + 1));
  Eigen::SparseLU<SpMat> Linv;
  if (P.mapped()) Linv.compute(P.L);
  for (int k = 0; k <= P.T; ++k) {
    const double t = double(k) / P.T;
    Vec M = (1 - t) * m0 + t * m1;
    if (k > 0 && k < P.T) M = 0.5 * M + 0.5 * uni;
    S.y[k] = P.mapped() ? Vec(Linv.solve(M)) : M;
  }
  S.y[0] = P.y0;
  S.y[P.T] = P.yT;
  S.F.assign(std::size_t(P.T), Vec::Zero(P.E));
  const double floor0 = cfg.rho_floor * uniform_density;
  P.floor = floor0;
  restore_feasibility(P, S);
  std::vector<TraceRow>* tr = cfg.record_trace ? &rep.trace : nullptr;
  RunResult rr = run_barrier(P, S, cfg, cfg.max_iters, tr);
  rep.iterations = rr.iterations;
  rep.floor_objectives.push_back(rr.objective);

  const double raw = objective(P, S, false);
  rep.floor_share = std::isfinite(raw) ? std::max(0.0, 1.0 - rr.objective / raw) : 1.0;
  const bool singular_stuck = !cfg.singular_nodes.empty() && P.kappa == 0.0;
  if (rr.status == SolveStatus::Converged && cfg.floor_decades > 0 &&
      (rep.floor_share > cfg.floor_share_trigger || singular_stuck)) {
    bool all_grow = true;
    for (int d = 1; d <= cfg.floor_decades; ++d) {
      P.floor = floor0 * std::pow(10.0, -d);
      RunResult r2 = run_barrier(P, S, cfg, cfg.max_iters - rep.iterations, tr, 1e3 * rr.gap / (double(P.n) * (P.T - 1)));
      rep.iterations += r2.iterations;
      rr = r2;
      const double prev = rep.floor_objectives.back();
      rep.floor_objectives.push_back(r2.objective);
      rep.floor_ratios.push_back(r2.objective / prev);
      if (r2.objective / prev < cfg.divergence_ratio) all_grow = false;
      if (r2.status != SolveStatus::Converged) break;
    }
    if (rr.status == SolveStatus::Converged && all_grow &&
        int(rep.floor_ratios.size()) == cfg.floor_decades) {
      rr.status = SolveStatus::InfiniteCost;
      rep.message = "objective diverges as the floor is removed";
    }
  }
  rep.status = rr.status;
  rep.floor = P.floor;
  rep.gap = rr.gap;
  fill_report(S);
  rep.objective = rr.objective;
  rep.distance = rep.status == SolveStatus::InfiniteCost ? INFINITY : std::sqrt(rr.objective);
  if (rep.status == SolveStatus::MaxIters) rep.message = rr.stalled ? "Newton line search stalled" : "iteration cap reached";
  return rep;
}

}  // namespace

SolveReport solve(const DiscreteSpace& sp, const Interpolation& theta, const Vec& mu0, const Vec& mu1,
                  const SolveConfig& cfg) {
  if (mu0.size() != sp.size() || mu1.size() != sp.size()) throw ContractViolation("density size mismatch");
  Problem P;
  P.sp = &sp;
  P.theta = &theta;
  Vec m0 = mu0.cwiseProduct(sp.mass()), m1 = mu1.cwiseProduct(sp.mass());
  P.y0 = m0;
  P.yT = m1;
  return solve_problem(P, m0, m1, cfg);
}

SolveReport solve_smoothed(const DiscreteSpace& sp, const Interpolation& theta, const Vec& mu0,
                           const Vec& mu1, const Convolution& K, const SolveConfig& cfg) {
  if (mu0.size() != sp.size() || mu1.size() != sp.size()) throw ContractViolation("density size mismatch");
  if (!cfg.singular_nodes.empty()) throw ContractViolation("singular nodes are not supported with smoothing");
  Problem P;
  P.sp = &sp;
  P.theta = &theta;
  Eigen::MatrixXd Q = K.mass_operator();
  // Q^{-1} is sparse for the Laplace kernel in one dimension (tridiagonal); keep what is not round-off
  Eigen::MatrixXd Li = Q.inverse();
  P.L = Li.sparseView(1.0, 1e-13 * Li.cwiseAbs().maxCoeff());
  Vec m0 = mu0.cwiseProduct(sp.mass()), m1 = mu1.cwiseProduct(sp.mass());
  P.y0 = Q * m0;
  P.yT = Q * m1;
  return solve_problem(P, m0, m1, cfg);
}

Path geodesic(const SolveReport& r) {
  if (!r.converged()) throw ContractViolation("geodesic requires a converged report (status " + to_string(r.status) + ")");
  return r.path;
}

Path restrict(const Path& p, double t0, double t1) {
  const int T = p.steps();
  if (!(t0 >= 0 && t1 <= 1 && t0 < t1)) throw ContractViolation("restrict needs 0 <= t0 < t1 <= 1");
  const double a = t0 * T, b = t1 * T;
  const int ka = int(std::lround(a)), kb = int(std::lround(b));
  if (std::abs(a - ka) > 1e-9 || std::abs(b - kb) > 1e-9)
    throw ContractViolation("restrict endpoints must lie on the time grid");
  Path out;
  const double tau = t1 - t0;
  for (int k = ka; k <= kb; ++k) out.rho.push_back(p.rho[std::size_t(k)]);
  for (int k = ka; k < kb; ++k) out.flux.push_back(p.flux[std::size_t(k)] * tau);
  return out;
}

}  // namespace nlw
