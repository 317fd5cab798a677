#include "nlw/hj.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "nlw/errors.hpp"
#include "nlw/transport.hpp"

namespace nlw {

double hj_constant(const RadialKernel& eta) {
  const int d = eta.dim();
  const double M2 = eta.unscaled_moment(2), M3 = eta.unscaled_moment(3), M4 = eta.unscaled_moment(4),
               M5 = eta.unscaled_moment(5);
  const double tail = M4 + 1.5 * M5;
  return double(d) * d / (M2 * M2) * (0.375 * M3 + std::sqrt((M2 / d + 1.5 * M3) * tail) + 0.25 * tail);
}

HJConstants hj_constants(const RadialKernel& eta_eps, double s, double A) {
  HJConstants c;
  c.d = eta_eps.dim();
  c.M2 = eta_eps.unscaled_moment(2);
  c.M3 = eta_eps.unscaled_moment(3);
  c.M4 = eta_eps.unscaled_moment(4);
  c.M5 = eta_eps.unscaled_moment(5);
  if (!std::isfinite(c.M5)) throw ContractViolation("M5(eta) must be finite");
  c.C = hj_constant(eta_eps);
  c.A = A;
  c.s = s;
  c.eps = eta_eps.scale();
  return c;
}

PotentialPath hopf_lax_path(const DiscreteSpace& sp, const Vec& phi0, int T) {
  if (T < 2) throw ContractViolation("Hopf-Lax path needs at least 2 intervals");
  PotentialPath p;
  for (int k = 0; k <= T; ++k) {
    const double t = double(k) / T;
    p.t.push_back(t);
    p.phi.push_back(k == 0 ? phi0 : hopf_lax(sp, phi0, t));
  }
  return p;
}

namespace {

void require_grid(const DiscreteSpace& sp) {
  if (!sp.is_grid()) throw ContractViolation("finite-difference HJ checks need a grid space");
}

// stride of axis a; build_grid stores the last axis fastest
long stride(const DiscreteSpace& sp, int a) {
  long st = 1;
  for (int k = sp.dim() - 1; k > a; --k) st *= sp.grid_n();
  return st;
}

int axis_index(const DiscreteSpace& sp, int i, int a) { return int((i / stride(sp, a)) % sp.grid_n()); }

double sup_abs(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

double local_hj_residual(const DiscreteSpace& sp, const Vec& phi0, int T, double rel_step) {
  require_grid(sp);
  const int n = sp.size(), N = sp.grid_n(), d = sp.dim();
  const double h = sp.grid_h(), dt = rel_step / T;
  double worst = -INFINITY;
  for (int k = 1; k < T; ++k) {
    const double t = double(k) / T;
    const Vec f = hopf_lax(sp, phi0, t), fp = hopf_lax(sp, phi0, t + dt), fm = hopf_lax(sp, phi0, t - dt);
    for (int i = 0; i < n; ++i) {
      double g2 = 0;
      bool interior = true;
      for (int a = 0; a < d; ++a) {
        const int q = axis_index(sp, i, a);
        if (q == 0 || q == N - 1) {
          interior = false;
          break;
        }
        const long st = stride(sp, a);
        const double g = (f[i + st] - f[i - st]) / (2 * h);
        g2 += g * g;
      }
      if (!interior) continue;
      worst = std::max(worst, (fp[i] - fm[i]) / (2 * dt) + 0.5 * g2);
    }
  }
  return worst;
}

double path_gradient_bound(const DiscreteSpace& sp, const PotentialPath& path) {
  double A = 0;
  for (const Vec& f : path.phi) A = std::max(A, lipschitz_constant(sp, f));
  return A;
}

PotentialPath nl_hj_subsolution(const PotentialPath& path, const Convolution& Ks, const HJConstants& c) {
  PotentialPath out;
  out.t = path.t;
  const double pre = c.M2 > 0 ? c.prefactor() : 0.0;
  for (std::size_t k = 0; k < path.phi.size(); ++k)
    out.phi.push_back(pre * Ks.apply(path.phi[k]) - Vec::Constant(path.phi[k].size(), c.drift() * path.t[k]));
  return out;
}

double nl_hj_lhs(const DiscreteSpace& sp, const Interpolation& theta, const PotentialPath& phi, int k,
                 const Vec& mu, const Convolution& Ks) {
  if (k < 1 || k + 1 >= int(phi.phi.size())) throw ContractViolation("time index must be interior");
  const Vec rho = Ks.apply(mu);
  const Vec dtphi = (phi.phi[std::size_t(k) + 1] - phi.phi[std::size_t(k) - 1]) / (2 * phi.dt());
  const Vec& f = phi.phi[std::size_t(k)];
  double lhs = dtphi.cwiseProduct(rho).dot(sp.mass());
  double kin = 0;
  for (int e = 0; e < sp.num_edges(); ++e) {
    const int i = sp.edge_i(e), j = sp.edge_j(e);
    const double df = f[j] - f[i];
    kin += df * df * theta(rho[i], rho[j]) * sp.edge_eta(e) * sp.mass(i) * sp.mass(j);
  }
  // 1/4 over ordered pairs = 1/2 over stored edges
  return lhs + 0.5 * kin;
}

SmoothingGradientCheck smoothing_gradient_check(const DiscreteSpace& sp, const Convolution& Ks, double s,
                                                const Vec& phi, double margin) {
  require_grid(sp);
  if (sp.dim() != 1) throw ContractViolation("smoothing gradient check is 1D");
  const int n = sp.size();
  const double h = sp.grid_h(), L = sp.extent();
  const Vec g = Ks.apply(phi);
  SmoothingGradientCheck c;
  for (int i = 0; i + 1 < n; ++i) c.grad_phi = std::max(c.grad_phi, std::abs(phi[i + 1] - phi[i]) / h);
  for (int i = 1; i + 1 < n; ++i) {
    const double x = sp.point(i)[0];
    if (x - h < margin || x + h > L - margin) continue;
    c.grad_smoothed = std::max(c.grad_smoothed, std::abs(g[i + 1] - g[i - 1]) / (2 * h));
    c.hess_smoothed = std::max(c.hess_smoothed, std::abs(g[i + 1] - 2 * g[i] + g[i - 1]) / (h * h));
  }
  c.hess_bound = c.grad_phi / s;
  return c;
}

HJReport hj_lower_bound(const DiscreteSpace& sp, const Interpolation& theta, const Vec& mu0, const Vec& mu1,
                        double solver_distance, const HJOptions& opt) {
  if (!sp.kernel()) throw ContractViolation("HJ pipeline needs a space built from a radial kernel");
  require_grid(sp);
  const RadialKernel& eta = *sp.kernel();
  const int d = sp.dim();
  const double eps = eta.scale();
  const double s = opt.s > 0 ? opt.s : std::sqrt(eps);
  if (!(eps > 0 && eps <= 1)) throw ContractViolation("HJ pipeline needs eps in (0, 1]");
  if (s < eps) throw ContractViolation("HJ pipeline needs s >= eps");
  for (const Vec* m : {&mu0, &mu1})
    if (std::abs(total_mass(sp, *m) - 1.0) > 1e-8) throw ContractViolation("HJ pipeline needs probability measures");

  HJReport r;
  std::vector<int> supp;
  for (int i = 0; i < sp.size(); ++i)
    if (mu0[i] > 0 || mu1[i] > 0) supp.push_back(i);
  double diam = 0;
  for (std::size_t a = 0; a < supp.size(); ++a)
    for (std::size_t b = a + 1; b < supp.size(); ++b) diam = std::max(diam, sp.distance(supp[a], supp[b]));
  r.R = opt.R > 0 ? opt.R : diam;

  const KantorovichPair kp = kantorovich_potential(sp, mu0, mu1);
  for (std::size_t a = 0; a < supp.size(); ++a)
    for (std::size_t b = a + 1; b < supp.size(); ++b)
      r.lip_phi0 = std::max(r.lip_phi0, std::abs(kp.phi0[supp[a]] - kp.phi0[supp[b]]) /
                                            sp.distance(supp[a], supp[b]));

  const PotentialPath path = hopf_lax_path(sp, kp.phi0, opt.T);
  const double A = path_gradient_bound(sp, path);
  const double h = sp.grid_h();
  r.local_residual = local_hj_residual(sp, kp.phi0, opt.T);
  // discrete minimization error O(h A) in dt phi, O(h) relative in the gradient
  r.local_tol = 1e-6 + 10 * h * std::max(1.0, A * A);
  if (r.local_residual > r.local_tol)
    throw ContractViolation("Hopf-Lax path violates the local HJ inequality beyond tolerance");

  Convolution Ks(sp, SmoothingKernel::laplace(d, s));
  r.constants = hj_constants(eta, s, A);
  const PotentialPath chk = nl_hj_subsolution(path, Ks, r.constants);

  double scale = 0;
  for (const Vec& f : chk.phi) scale = std::max(scale, sup_abs(f));
  r.slack_tol = 1e-6 + 10 * h * scale;

  std::mt19937_64 gen(opt.seed);
  std::uniform_int_distribution<int> tpick(1, opt.T - 1), node(0, sp.size() - 1);
  std::uniform_real_distribution<double> U(0, 1);
  r.max_lhs = -INFINITY;
  for (int q = 0; q < opt.samples; ++q) {
    Vec mu;
    switch (q % 4) {
      case 0: mu = dirac_at(sp, node(gen)); break;
      case 1: mu = uniform_density(sp); break;
      case 2: {
        mu = Vec(sp.size());
        for (int i = 0; i < sp.size(); ++i) mu[i] = U(gen);
        mu /= total_mass(sp, mu);
        break;
      }
      default: {
        std::vector<double> c(static_cast<std::size_t>(d));
        for (auto& v : c) v = U(gen) * sp.extent();
        mu = gaussian_bump(sp, c, (0.02 + 0.2 * U(gen)) * sp.extent());
      }
    }
    r.max_lhs = std::max(r.max_lhs, nl_hj_lhs(sp, theta, chk, tpick(gen), mu, Ks));
    ++r.samples;
  }

  r.pairing = chk.phi.back().cwiseProduct(Ks.apply(mu1)).dot(sp.mass()) -
              chk.phi.front().cwiseProduct(Ks.apply(mu0)).dot(sp.mass());
  r.w_dual_lower = 2 * r.pairing;
  r.w = solver_distance;
  if (opt.w_smoothed) {
    r.w_smoothed = *opt.w_smoothed;
  } else {
    const SolveReport sr = solve_smoothed(sp, theta, mu0, mu1, Ks, opt.solve);
    if (!sr.converged()) throw Error("smoothed solve did not converge: " + sr.message);
    r.w_smoothed = sr.distance;
  }
  r.w2 = w2(sp, mu0, mu1).distance;
  const double M2 = r.constants.M2;
  r.headline_lhs = r.w2 * r.w2;
  r.headline_rhs = eps * eps * M2 / (2 * d) * r.w * r.w + (1.75 * d * r.R * r.R + 8 * d * r.R) * std::sqrt(eps);
  return r;
}

}  // namespace nlw
