#include "nlw/certify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "nlw/constructions.hpp"
#include "nlw/errors.hpp"
#include "nlw/transport.hpp"

namespace nlw {

std::string to_string(Regime r) {
  switch (r) {
    case Regime::Disconnected: return "disconnected";
    case Regime::StrongTopology: return "strong";
    case Regime::WeakTopology: return "weak";
    case Regime::Unclassified: return "unclassified";
  }
  return "?";
}

Regime classify_regime(const RadialKernel& eta, const Interpolation& theta) {
  if (eta.has_blowup()) return Regime::WeakTopology;
  if (!eta.integrable()) return Regime::Unclassified;
  return theta.kappa() > 0 ? Regime::StrongTopology : Regime::Disconnected;
}

BoundCertificate make_certificate(std::string name, double lhs, double rhs, double tolerance, std::string inputs) {
  BoundCertificate c;
  c.name = std::move(name);
  c.lhs = lhs;
  c.rhs = rhs;
  c.margin = rhs - lhs;
  c.tolerance = tolerance;
  c.pass = c.margin >= -tolerance;
  c.inputs = std::move(inputs);
  return c;
}

BoundCertificate skipped_certificate(std::string name, std::string note, std::string inputs) {
  BoundCertificate c;
  c.name = std::move(name);
  c.skipped = true;
  c.pass = true;
  c.lhs = c.rhs = c.margin = NAN;
  c.note = std::move(note);
  c.inputs = std::move(inputs);
  return c;
}

namespace {

std::string digest(const DiscreteSpace& sp, const Interpolation& theta) {
  std::ostringstream o;
  o << "n=" << sp.size() << " d=" << sp.dim();
  if (sp.kernel()) o << " kernel=" << sp.kernel()->name() << " eps=" << sp.kernel()->scale();
  o << " theta=" << theta.name();
  return o.str();
}

std::string digest(const DiscreteSpace& sp) {
  std::ostringstream o;
  o << "n=" << sp.size() << " d=" << sp.dim();
  if (sp.kernel()) o << " kernel=" << sp.kernel()->name() << " eps=" << sp.kernel()->scale();
  return o.str();
}

double dist_tol(double d) { return kDistanceRelTol * std::abs(d) + 1e-9; }

const RadialKernel& need_kernel(const DiscreteSpace& sp) {
  if (!sp.kernel()) throw ContractViolation("certificate needs a space built from a radial kernel");
  return *sp.kernel();
}

std::vector<int> support(const Vec& v) {
  std::vector<int> s;
  for (int i = 0; i < v.size(); ++i)
    if (v[i] > 0) s.push_back(i);
  return s;
}

double support_diameter(const DiscreteSpace& sp, const Vec& a, const Vec& b) {
  std::vector<int> s;
  for (int i = 0; i < sp.size(); ++i)
    if (a[i] > 0 || b[i] > 0) s.push_back(i);
  double d = 0;
  for (std::size_t p = 0; p < s.size(); ++p)
    for (std::size_t q = p + 1; q < s.size(); ++q) d = std::max(d, sp.distance(s[p], s[q]));
  return d;
}

double solved_distance(const DiscreteSpace& sp, const Interpolation& theta, const Vec& a, const Vec& b,
                       const SolveConfig& cfg) {
  const SolveReport r = solve(sp, theta, a, b, cfg);
  if (r.status == SolveStatus::InfiniteCost) return INFINITY;
  if (!r.converged()) throw Error("solver did not converge: " + r.message);
  return r.distance;
}

}  // namespace

std::vector<BoundCertificate> certify_lower_bounds(const DiscreteSpace& sp, const Interpolation& theta,
                                                   const Vec& mu0, const Vec& mu1, double solver_distance) {
  const std::string in = digest(sp, theta);
  std::vector<BoundCertificate> out;
  const double W1 = w1(sp, mu0, mu1);
  auto c = make_certificate("w1_lower", std::sqrt(2.0 / sp.c_tilde()) * W1, solver_distance,
                            dist_tol(solver_distance), in);
  c.note = "sqrt(2/C~) W1 <= W, C~ = " + std::to_string(sp.c_tilde());
  out.push_back(c);
  const double tv = tv_distance(sp, mu0, mu1);
  c = make_certificate("tv_lower", std::sqrt(2.0 / sp.c_const()) * tv, solver_distance, dist_tol(solver_distance), in);
  c.note = "sqrt(2/C) TV <= W, C = " + std::to_string(sp.c_const());
  out.push_back(c);
  return out;
}

BoundCertificate certify_dirac_floor(const DiscreteSpace& sp, const Interpolation& theta, int node, const Vec& nu,
                                     const SolveConfig& cfg, double solver_distance) {
  const RadialKernel& eta = need_kernel(sp);
  const std::string in = digest(sp, theta) + " node=" + std::to_string(node);
  if (classify_regime(eta, theta) != Regime::StrongTopology)
    throw RegimeError("Dirac floor certificate needs an integrable kernel and theta(1,0) > 0");
  if (nu[node] != 0) return skipped_certificate("dirac_floor", "nu has mass at the Dirac node", in);
  double local = 0;
  for (int k = 0; k < sp.degree(node); ++k) local += sp.edge_eta(sp.neighbor_edge(node, k)) * sp.mass(sp.neighbor(node, k));
  const double W = std::isnan(solver_distance) ? solved_distance(sp, theta, dirac_at(sp, node), nu, cfg)
                                               : solver_distance;
  auto c = make_certificate("dirac_floor", 2.0 / std::sqrt(local), W, dist_tol(W), in);
  std::ostringstream o;
  o << "discrete sum eta m = " << local << ", continuum integral = " << eta.integral()
    << ", continuum floor = " << 2.0 / std::sqrt(eta.integral());
  c.note = o.str();
  return c;
}

BoundCertificate certify_disintegration(const DiscreteSpace& sp, const Interpolation& theta, const Vec& mu,
                                        const Vec& nu, const SolveConfig& cfg) {
  const std::string in = digest(sp, theta);
  const std::vector<int> S = support(mu), T = support(nu);
  if (S.size() > 30 || T.size() > 30) throw ContractViolation("disintegration certificate needs supports of <= 30 atoms");
  std::map<std::pair<int, int>, double> cache;
  auto dirac_cost = [&](int i, int j) {
    if (i == j) return 0.0;
    const auto key = std::minmax(i, j);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const double w = solved_distance(sp, theta, dirac_at(sp, key.first), dirac_at(sp, key.second), cfg);
    return cache[key] = w * w;
  };
  Vec a(S.size()), b(T.size());
  Eigen::MatrixXd C(S.size(), T.size());
  for (std::size_t p = 0; p < S.size(); ++p) {
    a[Eigen::Index(p)] = mu[S[p]] * sp.mass(S[p]);
    for (std::size_t q = 0; q < T.size(); ++q) C(Eigen::Index(p), Eigen::Index(q)) = dirac_cost(S[p], T[q]);
  }
  for (std::size_t q = 0; q < T.size(); ++q) b[Eigen::Index(q)] = nu[T[q]] * sp.mass(T[q]);
  double rhs = 0;
  if (!S.empty() && C.allFinite()) rhs = solve_transport(a, b, C).plan.cost;
  else if (!S.empty()) rhs = INFINITY;
  const double W = solved_distance(sp, theta, mu, nu, cfg);
  auto c = make_certificate("disintegration", W * W, rhs, 1e-3, in);
  c.note = std::to_string(cache.size()) + " Dirac-pair solves";
  return c;
}

std::vector<BoundCertificate> certify_phi_bound(const DiscreteSpace& sp, const Interpolation& theta,
                                                const std::vector<std::pair<int, int>>& pairs,
                                                const SolveConfig& cfg) {
  const RadialKernel& eta = need_kernel(sp);
  if (classify_regime(eta, theta) != Regime::WeakTopology)
    throw RegimeError("Phi certificate needs a kernel with algebraic blow-up");
  const ConstantSet cs = assemble_constants(theta, eta);
  std::vector<BoundCertificate> out;
  for (auto [a, b] : pairs) {
    const std::string in = digest(sp, theta) + " pair=" + std::to_string(a) + "," + std::to_string(b);
    const double t = sp.distance(a, b) / eta.scale();
    const double W = a == b ? 0.0 : solved_distance(sp, theta, dirac_at(sp, a), dirac_at(sp, b), cfg);
    auto c = make_certificate("phi_bound", W, phi_bound(cs, t), dist_tol(W), in);
    c.printed_rhs = phi_bound(cs, t, true);
    c.note = "t = |x-y|/eps = " + std::to_string(t);
    out.push_back(c);
  }
  return out;
}

std::vector<BoundCertificate> certify_tv_upper(const DiscreteSpace& sp, const Interpolation& theta, const Vec& mu,
                                               const Vec& nu, double solver_distance) {
  const RadialKernel& eta = need_kernel(sp);
  const std::string in = digest(sp, theta);
  const Regime rg = classify_regime(eta, theta);
  if (rg != Regime::StrongTopology && rg != Regime::WeakTopology)
    throw RegimeError("TV upper bound needs regime (ii) or (iii)");
  const ConstantSet cs = assemble_constants(theta, eta);
  const double diam = support_diameter(sp, mu, nu);
  const double C = tv_upper_constant(cs, diam / eta.scale());
  const double tv = tv_distance(sp, mu, nu);
  const double W2sq = solver_distance * solver_distance;
  std::vector<BoundCertificate> out;
  auto c = make_certificate("tv_upper", W2sq, C * tv, 2 * dist_tol(W2sq), in);
  c.printed_rhs = tv_upper_constant(cs, diam / eta.scale(), true) * tv;
  c.note = "C = " + std::to_string(C) + ", diam/eps = " + std::to_string(diam / eta.scale());
  out.push_back(c);
  // overlap curve: min(mu, nu) stays, the difference moves along the mixture
  try {
    MixtureLeg leg(sp, theta, mu, nu);
    const double act = leg.trivial() ? 0.0 : leg.length() * leg.length();
    auto a = make_certificate("tv_upper_curve", W2sq, act, 2 * dist_tol(W2sq), in);
    a.note = "W^2 <= action of the mixture curve through min(mu, nu)";
    out.push_back(a);
    auto b = make_certificate("tv_upper_curve_vs_constant", act, C * tv, 1e-12 * C * tv, in);
    b.note = "mixture curve action <= C TV";
    out.push_back(b);
  } catch (const ContractViolation& e) {
    out.push_back(skipped_certificate("tv_upper_curve", std::string("mixture curve unavailable: ") + e.what(), in));
  }
  return out;
}

std::vector<BoundCertificate> convolution_w2_estimates(const DiscreteSpace& sp, const Vec& mu, double s) {
  const RadialKernel& eta = need_kernel(sp);
  const int d = sp.dim();
  const std::string in = digest(sp);
  std::vector<BoundCertificate> out;
  auto one = [&](const std::string& name, const Convolution& K, double bound) {
    const Vec kmu = K.apply(mu);
    const double W = w2(sp, mu, kmu).distance;
    // product coupling mu(x) P(x, y) m(y)
    double plan = 0;
    const Eigen::MatrixXd& P = K.matrix();
    for (int i = 0; i < sp.size(); ++i) {
      if (mu[i] == 0) continue;
      double row = 0;
      for (int j = 0; j < sp.size(); ++j) {
        const double r = sp.distance(i, j);
        row += P(i, j) * sp.mass(j) * r * r;
      }
      plan += mu[i] * sp.mass(i) * row;
    }
    auto c = make_certificate(name, W, bound, 1e-10, in);
    c.note = "product coupling cost^(1/2) = " + std::to_string(std::sqrt(plan));
    out.push_back(c);
  };
  one("w2_laplace", Convolution(sp, SmoothingKernel::laplace(d, s)), std::sqrt(laplace_moment(d, 2)) * s);
  const double M2 = eta.unscaled_moment(2), M4 = eta.unscaled_moment(4);
  if (std::isfinite(M4) && std::isfinite(M2))
    one("w2_zeta", Convolution(sp, SmoothingKernel::zeta_of(eta)),
        std::sqrt(double(d) / (d + 2) * M4 / M2) * eta.scale());
  return out;
}

BoundCertificate certify_holder(const DiscreteSpace& sp, const SolveReport& rep, int samples, std::uint64_t seed) {
  const Path p = geodesic(rep);
  const double C = sp.c_const(), W = rep.distance;
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> U(0, 1);
  std::uniform_int_distribution<int> K(0, p.steps());
  double worst = -INFINITY;
  BoundCertificate best;
  for (int q = 0; q < samples; ++q) {
    int k0 = K(gen), k1 = K(gen);
    if (k0 == k1) continue;
    if (k0 > k1) std::swap(k0, k1);
    const double frac = 0.1 + 0.8 * U(gen);
    double diff = 0;
    for (int i = 0; i < sp.size(); ++i)
      if (U(gen) < frac) diff += (p.rho[std::size_t(k1)][i] - p.rho[std::size_t(k0)][i]) * sp.mass(i);
    const double dt = p.time(k1) - p.time(k0);
    const double rhs = std::sqrt(C / 2) * W * std::sqrt(dt);
    const double lhs = std::abs(diff);
    if (lhs - rhs > worst) {
      worst = lhs - rhs;
      best = make_certificate("holder_half", lhs, rhs, dist_tol(rhs), digest(sp));
      best.printed_rhs = std::sqrt(2 / C) * W * std::sqrt(dt);
      best.note = "worst of " + std::to_string(samples) + " sampled (set, t0, t1); t1-t0 = " + std::to_string(dt);
    }
  }
  if (worst == -INFINITY) return skipped_certificate("holder_half", "no time pairs sampled", digest(sp));
  return best;
}

std::vector<BoundCertificate> certify_hj(const HJReport& r) {
  std::vector<BoundCertificate> out;
  auto a = make_certificate("hj_subsolution", r.max_lhs, 0.0, r.slack_tol);
  a.note = "max over " + std::to_string(r.samples) + " sampled (t, mu); A = " + std::to_string(r.constants.A) +
           ", C = " + std::to_string(r.constants.C);
  out.push_back(a);
  auto b = make_certificate("hj_pairing", r.pairing, 0.5 * r.w_smoothed * r.w_smoothed, 1e-4);
  b.note = "pairing <= W_{eta,eps,s}^2 / 2";
  out.push_back(b);
  auto c = make_certificate("hj_headline", r.headline_lhs, r.headline_rhs, 0.0);
  c.note = "R = " + std::to_string(r.R);
  out.push_back(c);
  return out;
}

double upper_envelope(const ConstantSet& c, const RadialKernel& eta_eps, double W2, bool printed) {
  const int d = eta_eps.dim();
  const double eps = eta_eps.scale();
  const double M2 = eta_eps.unscaled_moment(2), M4 = eta_eps.unscaled_moment(4);
  const double se = std::sqrt(eps);
  const double lead = printed ? (1 + se) * (1 + se) : (1 + 3 * se) * (1 + 3 * se);
  const double slope = (printed ? c.C_dtheta_printed : c.C_dtheta) / std::sqrt(c.eta_half);
  const double offset = printed ? c.C_dtheta_eta_printed : c.C_dtheta_eta;
  const double shift = std::sqrt(double(d) * d + d) * se + std::sqrt(double(d) / (d + 2) * M4 / M2) * eps;
  const double extra = 2 * std::sqrt(2.0) * slope / eps * shift + 2 * std::sqrt(2.0) * offset;
  return lead * W2 + eps * std::sqrt(M2 / (2.0 * d)) * extra;
}

ConvergeResult converge_experiment(const RadialKernel& eta, const Interpolation& theta, const DensityBuilder& mu0,
                                   const DensityBuilder& mu1, const std::vector<double>& eps_list,
                                   const ConvergeOptions& opt) {
  if (eta.dim() != 1) throw ContractViolation("convergence experiment runs on 1D grids");
  if (eps_list.empty()) throw ContractViolation("empty eps list");
  if (!opt.n_override.empty() && opt.n_override.size() != eps_list.size())
    throw ContractViolation("n_override must match eps_list");
  ConvergeResult res;
  std::vector<int> ns;
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    const double eps = eps_list[k];
    if (!(eps > 0 && eps <= 1)) throw ContractViolation("eps must lie in (0, 1]");
    const int n = opt.n_override.empty() ? int(std::ceil(opt.extent * opt.nodes_per_eps / eps - 1e-9))
                                         : opt.n_override[k];
    const double h = opt.extent / n;
    if (h > eps / 10 * (1 + 1e-9)) {
      std::ostringstream o;
      o << "resolution precondition h <= eps/10 violated: eps = " << eps << ", h = " << h;
      throw ContractViolation(o.str());
    }
    ns.push_back(n);
  }
  const int d = 1;
  const double M2 = eta.unscaled_moment(2);
  // R from the finest grid
  {
    const std::size_t f = std::size_t(std::max_element(ns.begin(), ns.end()) - ns.begin());
    auto sp = build_grid(1, opt.extent, ns[f], eta.rescaled(eps_list[f]));
    res.R = opt.R > 0 ? opt.R : support_diameter(sp, mu0(sp), mu1(sp));
  }
  const double R = res.R;
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    const double eps = eps_list[k];
    const RadialKernel ke = eta.rescaled(eps);
    auto sp = build_grid(1, opt.extent, ns[k], ke);
    const Vec a = mu0(sp), b = mu1(sp);
    ConvergeRow row;
    row.eps = eps;
    row.n = ns[k];
    row.h = sp.grid_h();
    const SolveReport r = solve(sp, theta, a, b, opt.solve);
    row.status = r.status;
    row.distance = r.distance;
    row.scaled = eps * std::sqrt(M2 / (2.0 * d)) * r.distance;
    row.w2 = w2(sp, a, b).distance;
    row.error = std::abs(row.scaled - row.w2);
    const ConstantSet cs = assemble_constants(theta, ke);
    row.upper_env = upper_envelope(cs, ke, row.w2);
    row.upper_env_printed = upper_envelope(cs, ke, row.w2, true);
    const double err = (1.75 * d * R * R + 8 * d * R) * std::sqrt(eps);
    row.lower_env = row.scaled * row.scaled + err;
    const bool conv = r.converged();
    row.upper_ok = conv && row.scaled <= row.upper_env * (1 + kDistanceRelTol);
    row.lower_ok = conv && row.w2 * row.w2 <= row.lower_env;
    res.envelopes = res.envelopes && row.upper_ok && row.lower_ok;
    res.rows.push_back(row);
  }
  // sort by decreasing eps for the monotonicity check
  std::vector<ConvergeRow> by = res.rows;
  std::sort(by.begin(), by.end(), [](const ConvergeRow& x, const ConvergeRow& y) { return x.eps > y.eps; });
  for (std::size_t k = 1; k < by.size(); ++k)
    if (by[k].error > 1.1 * by[k - 1].error) res.monotone = false;
  return res;
}

std::vector<BoundCertificate> run_battery(
    const std::vector<std::function<std::vector<BoundCertificate>()>>& tasks, int threads) {
  std::vector<std::vector<BoundCertificate>> parts(tasks.size());
  std::vector<std::string> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next++) < tasks.size();) {
      try {
        parts[k] = tasks[k]();
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
  };
  const int nt = std::max(1, std::min<int>(threads, int(tasks.size())));
  if (nt == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::vector<BoundCertificate> out;
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    if (!errors[k].empty()) {
      BoundCertificate c = make_certificate("task_" + std::to_string(k), NAN, NAN, 0);
      c.pass = false;
      c.note = "error: " + errors[k];
      out.push_back(c);
    }
    for (auto& c : parts[k]) out.push_back(std::move(c));
  }
  return out;
}

}  // namespace nlw
