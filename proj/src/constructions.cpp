#include "nlw/constructions.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <map>

#include "nlw/errors.hpp"

namespace nlw {

namespace {

constexpr int kTable = 256;

double u_to_p(double u) { return 0.5 * (1.0 - std::cos(M_PI * u)); }

std::vector<double> to_vector(std::span<const double> x) { return {x.begin(), x.end()}; }

}  // namespace

std::string to_string(Construction c) {
  switch (c) {
    case Construction::TwoPoint: return "TwoPoint";
    case Construction::ExpelAnnuli: return "ExpelAnnuli";
    case Construction::ExpelBoundary: return "ExpelBoundary";
    case Construction::DiracChain: return "DiracChain";
    case Construction::Nonlocalized: return "Nonlocalized";
    case Construction::Superposition: return "Superposition";
  }
  return "?";
}

// ---------------------------------------------------------------- mixture leg

MixtureLeg::MixtureLeg(const DiscreteSpace& sp, const Interpolation& theta, const Vec& mu, const Vec& nu)
    : theta_(theta), mu_(mu), nu_(nu), unit_flux_(Vec::Zero(sp.num_edges())) {
  const int n = sp.size();
  if (mu.size() != n || nu.size() != n) throw ContractViolation("mixture endpoints must live on the space");
  std::vector<int> minus, plus;
  double zm = 0, zp = 0;
  for (int i = 0; i < n; ++i) {
    const double w = (mu[i] - nu[i]) * sp.mass(i);
    if (w > 0) {
      minus.push_back(i);
      zm += w;
    } else if (w < 0) {
      plus.push_back(i);
      zp -= w;
    }
  }
  if (std::abs(zm - zp) > 1e-10 * std::max({1.0, total_mass(sp, mu), total_mass(sp, nu)}))
    throw ContractViolation("mixture endpoints have different mass");
  if (minus.empty()) {
    trivial_ = true;
    return;
  }
  std::map<std::pair<double, double>, int> gm, gp;
  std::vector<int> id_m, id_p;
  for (int a : minus) id_m.push_back(gm.emplace(std::make_pair(mu[a], nu[a]), int(gm.size())).first->second);
  for (int b : plus) id_p.push_back(gp.emplace(std::make_pair(mu[b], nu[b]), int(gp.size())).first->second);
  std::vector<double> S(gm.size() * gp.size(), 0.0);

  std::vector<int> slot(std::size_t(n), -1);
  std::vector<int> stamp(std::size_t(n), -1);
  std::vector<int> pos_of(std::size_t(n), -1);
  for (std::size_t q = 0; q < plus.size(); ++q) pos_of[std::size_t(plus[q])] = int(q);
  for (std::size_t r = 0; r < minus.size(); ++r) {
    const int a = minus[r];
    for (int k = 0; k < sp.degree(a); ++k) {
      stamp[std::size_t(sp.neighbor(a, k))] = a;
      slot[std::size_t(sp.neighbor(a, k))] = sp.neighbor_edge(a, k);
    }
    const double wa = (mu[a] - nu[a]) * sp.mass(a);
    for (int b : plus) {
      if (stamp[std::size_t(b)] != a)
        throw ContractViolation("mixture step needs every source/target pair to be an edge");
      const int e = slot[std::size_t(b)];
      const double wb = (nu[b] - mu[b]) * sp.mass(b);
      const double F = wa * wb / zm;
      const double mm = sp.edge_eta(e) * sp.mass(a) * sp.mass(b);
      unit_flux_[e] = (sp.edge_i(e) == a ? 1.0 : -1.0) * F / mm;
      S[std::size_t(id_m[r]) * gp.size() + std::size_t(id_p[std::size_t(pos_of[std::size_t(b)])])] += F * F / mm;
    }
  }
  for (auto& [km, im] : gm)
    for (auto& [kp, ip] : gp) {
      double v = S[std::size_t(im) * gp.size() + std::size_t(ip)];
      if (v > 0) groups_.push_back({km.first, km.second, kp.first, kp.second, v});
    }

  auto f = [this](double u) {
    const double v = speed2(u_to_p(u));
    return std::sqrt(v) * 0.5 * M_PI * std::sin(M_PI * u);
  };
  u_.resize(kTable + 1);
  s_.assign(kTable + 1, 0.0);
  for (int k = 0; k <= kTable; ++k) u_[std::size_t(k)] = double(k) / kTable;
  for (int k = 0; k < kTable; ++k) {
    double err = 0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, u_[std::size_t(k)], u_[std::size_t(k) + 1], 8, 1e-12, &err);
    s_[std::size_t(k) + 1] = s_[std::size_t(k)] + v;
  }
  length_ = s_.back();
}

double MixtureLeg::speed2(double p) const {
  double total = 0.0;
  for (const Group& g : groups_) {
    const double a = std::max(0.0, g.ma + p * (g.na - g.ma));
    const double b = std::max(0.0, g.mb + p * (g.nb - g.mb));
    const double th = theta_(a, b);
    if (!(th > 0)) return INFINITY;
    total += g.S / th;
  }
  return total;
}

double MixtureLeg::param_at(double frac) const {
  if (trivial_ || frac <= 0) return 0.0;
  if (frac >= 1) return 1.0;
  const double target = frac * length_;
  auto it = std::upper_bound(s_.begin(), s_.end(), target);
  std::size_t k = std::min<std::size_t>(std::size_t(it - s_.begin()), s_.size() - 1);
  if (k == 0) k = 1;
  const double ds = s_[k] - s_[k - 1];
  const double w = ds > 0 ? (target - s_[k - 1]) / ds : 0.0;
  return u_to_p(u_[k - 1] + w * (u_[k] - u_[k - 1]));
}

// ---------------------------------------------------------------- sampling

Path sample_legs(const DiscreteSpace& sp, const std::vector<MixtureLeg>& legs, int T) {
  if (legs.empty()) throw ContractViolation("no legs to sample");
  if (T < 1) throw ContractViolation("need at least one time step");
  std::vector<const MixtureLeg*> live;
  for (const auto& l : legs) {
    if (l.trivial()) continue;
    if (!std::isfinite(l.length())) throw RegimeError("a leg of the construction has infinite length");
    live.push_back(&l);
  }
  Path path;
  if (live.empty()) {
    for (int k = 0; k <= T; ++k) path.rho.push_back(legs.front().from());
    for (int k = 0; k < T; ++k) path.flux.push_back(Vec::Zero(sp.num_edges()));
    return path;
  }
  std::vector<double> cum{0.0};
  for (auto* l : live) cum.push_back(cum.back() + l->length());
  const double total = cum.back();

  // (leg, p) at time t; zero-length legs are traversed instantly
  auto where = [&](double t) -> std::pair<int, double> {
    if (t >= 1.0) return {int(live.size()) - 1, 1.0};
    const double target = t * total;
    int l = int(std::upper_bound(cum.begin(), cum.end(), target) - cum.begin()) - 1;
    l = std::clamp(l, 0, int(live.size()) - 1);
    const double len = live[std::size_t(l)]->length();
    return {l, len > 0 ? live[std::size_t(l)]->param_at((target - cum[std::size_t(l)]) / len) : 1.0};
  };
  std::vector<std::pair<int, double>> pos;
  for (int k = 0; k <= T; ++k) {
    pos.push_back(where(double(k) / T));
    path.rho.push_back(live[std::size_t(pos.back().first)]->density(pos.back().second));
  }
  path.rho.front() = live.front()->from();
  path.rho.back() = live.back()->to();
  for (int k = 0; k < T; ++k) {
    auto [l0, p0] = pos[std::size_t(k)];
    auto [l1, p1] = pos[std::size_t(k) + 1];
    Vec f = Vec::Zero(sp.num_edges());
    if (l0 == l1) {
      f += (p1 - p0) * live[std::size_t(l0)]->unit_flux();
    } else {
      f += (1.0 - p0) * live[std::size_t(l0)]->unit_flux();
      for (int l = l0 + 1; l < l1; ++l) f += live[std::size_t(l)]->unit_flux();
      f += p1 * live[std::size_t(l1)]->unit_flux();
    }
    path.flux.push_back(f * T);
  }
  return path;
}

Path sample_schedule(const DiscreteSpace& sp, const MixtureLeg& leg, int T,
                     const std::function<double(double)>& q) {
  Path path;
  std::vector<double> p;
  for (int k = 0; k <= T; ++k) {
    p.push_back(k == 0 ? 0.0 : k == T ? 1.0 : q(double(k) / T));
    path.rho.push_back(leg.density(p.back()));
  }
  for (int k = 0; k < T; ++k) path.flux.push_back((p[std::size_t(k) + 1] - p[std::size_t(k)]) * T * leg.unit_flux());
  (void)sp;
  return path;
}

namespace {

void finish(CurveCertificate& c, const DiscreteSpace& sp, const Interpolation& theta) {
  c.discrete_action = path_action(sp, theta, c.path);
  c.residual = nce_residual(sp, c.path);
}

// Annuli legs from the Dirac at center to the uniform ball; outer radii recorded.
std::vector<MixtureLeg> annuli_legs(const DiscreteSpace& sp, const Interpolation& theta, int center,
                                    double delta, int n_levels, std::vector<double>* radii, int* levels) {
  auto x0 = sp.point(center);
  std::vector<std::vector<int>> ann;
  for (int lvl = 0; lvl < n_levels; ++lvl) {
    const double hi = delta * std::ldexp(1.0, -lvl), lo = 0.5 * hi;
    std::vector<int> nodes;
    double rmax = 0;
    for (int i = 0; i < sp.size(); ++i) {
      if (i == center) continue;
      const double r = sp.distance(i, center);
      if (r > lo && r <= hi * (1 + 1e-12)) {
        nodes.push_back(i);
        rmax = std::max(rmax, r);
      }
    }
    if (nodes.empty()) break;
    ann.push_back(std::move(nodes));
    if (radii) radii->push_back(rmax);
  }
  if (ann.empty()) throw ContractViolation("no nodes in the outer annulus: grid too coarse for delta");
  if (levels) *levels = int(ann.size());
  std::vector<MixtureLeg> legs;
  Vec prev = dirac_at(sp, center);
  for (int lvl = int(ann.size()) - 1; lvl >= 0; --lvl) {
    Vec next = uniform_on(sp, ann[std::size_t(lvl)]);
    legs.emplace_back(sp, theta, prev, next);
    prev = next;
  }
  legs.emplace_back(sp, theta, prev, uniform_ball(sp, x0, delta * (1 + 1e-12)));
  return legs;
}

double total_length(const std::vector<MixtureLeg>& legs) {
  double s = 0;
  for (const auto& l : legs) s += l.length();
  return s;
}

}  // namespace

// ---------------------------------------------------------------- constructions

CurveCertificate two_point_curve(const Interpolation& theta, double w, int T) {
  auto sp = two_point_space(w);
  std::vector<MixtureLeg> legs{MixtureLeg(sp, theta, dirac_at(sp, 0), dirac_at(sp, 1))};
  CurveCertificate c;
  c.construction = Construction::TwoPoint;
  c.path = sample_legs(sp, legs, T);
  c.length = legs[0].length();
  c.action_integral = c.length * c.length;
  const double oracle = std::sqrt(2.0 / w) * theta.c_theta();
  c.claimed_bound = oracle * oracle;
  c.printed_bound = c.claimed_bound;
  finish(c, sp, theta);
  return c;
}

CurveCertificate expel_curve_boundary(const DiscreteSpace& sp, const RadialKernel& kernel,
                                      const Interpolation& theta, int center, double delta,
                                      double g_exponent, int T) {
  if (!(theta.kappa() > 0))
    throw RegimeError("boundary expel bound needs theta(1,0) > 0; with theta(1,0) = 0 and integrable eta the expel cost is infinite");
  const double ratio = delta / kernel.scale();
  if (!(ratio > 0 && ratio <= 1)) throw ContractViolation("expel radius must lie in (0, eps]");
  if (!(g_exponent > 0)) throw ContractViolation("mass profile exponent must be positive");
  Vec ball = uniform_ball(sp, sp.point(center), delta * (1 + 1e-12));
  if ((ball.array() > 0).count() < 2) throw ContractViolation("ball around the center contains no other node");
  MixtureLeg leg(sp, theta, dirac_at(sp, center), ball);
  auto q = [g_exponent](double t) { return 1.0 - std::pow(1.0 - t, g_exponent); };
  auto qdot = [g_exponent](double t) { return g_exponent * std::pow(1.0 - t, g_exponent - 1.0); };

  CurveCertificate c;
  c.construction = Construction::ExpelBoundary;
  c.path = sample_schedule(sp, leg, T, q);
  c.length = leg.length();
  boost::math::quadrature::tanh_sinh<double> ts;
  c.action_integral = ts.integrate([&](double t) {
    const double v = qdot(t);
    return v == 0.0 ? 0.0 : v * v * leg.speed2(q(t));
  }, 0.0, 1.0);
  auto cs = assemble_constants(theta, kernel);
  const double b = expel_boundary_length_bound(cs, kernel, ratio);
  const double bp = expel_boundary_length_bound(cs, kernel, ratio, true);
  c.claimed_bound = b * b;
  c.printed_bound = bp * bp;
  c.radii.push_back(delta);
  finish(c, sp, theta);
  return c;
}

CurveCertificate expel_curve_annuli(const DiscreteSpace& sp, const RadialKernel& kernel,
                                    const Interpolation& theta, int center, double delta, int n_levels,
                                    int T) {
  if (!kernel.has_blowup()) throw RegimeError("annuli expel needs a kernel with algebraic blow-up");
  const double ratio = delta / kernel.scale();
  if (!(ratio > 0 && ratio <= 2.0 / 3.0)) throw ContractViolation("annuli expel needs 0 < delta/eps <= 2/3");
  CurveCertificate c;
  c.construction = Construction::ExpelAnnuli;
  int levels = 0;
  auto legs = annuli_legs(sp, theta, center, delta, n_levels, &c.radii, &levels);
  if (levels < n_levels)
    c.notes.push_back("chain stopped after " + std::to_string(levels) + " annuli: next annulus has no nodes");
  c.path = sample_legs(sp, legs, T);
  c.length = total_length(legs);
  c.action_integral = c.length * c.length;
  auto cs = assemble_constants(theta, kernel);
  const double b = expel_annuli_length_bound(cs, ratio), bp = expel_annuli_length_bound(cs, ratio, true);
  c.claimed_bound = b * b;
  c.printed_bound = bp * bp;
  finish(c, sp, theta);
  return c;
}

std::vector<MixtureLeg> dirac_chain_legs(const DiscreteSpace& sp, const RadialKernel& kernel,
                                         const Interpolation& theta, int a, int b) {
  if (a == b) return {};
  const bool kappa = theta.kappa() > 0;
  if (!kappa && !kernel.has_blowup())
    throw RegimeError("theta(1,0) = 0 with an integrable kernel: Diracs cannot be expelled at finite cost");
  const double eps = kernel.scale(), delta = eps / 6.0;
  if (delta < sp.min_spacing()) throw ContractViolation("Dirac chain needs eps >= 6 x node spacing");

  auto expel = [&](int node) {
    if (kappa)
      return std::vector<MixtureLeg>{MixtureLeg(sp, theta, dirac_at(sp, node),
                                                uniform_ball(sp, sp.point(node), delta * (1 + 1e-12)))};
    return annuli_legs(sp, theta, node, delta, 64, nullptr, nullptr);
  };
  std::vector<MixtureLeg> legs = expel(a);

  const auto xa = to_vector(sp.point(a)), xb = to_vector(sp.point(b));
  const double dist = sp.distance(a, b);
  const int K = std::max(1, int(std::ceil(dist / delta - 1e-12)));
  Vec prev = uniform_ball(sp, xa, delta * (1 + 1e-12));
  for (int k = 1; k <= K; ++k) {
    std::vector<double> z = xb;
    if (k < K)
      for (std::size_t q = 0; q < z.size(); ++q) z[q] = xa[q] + double(k) / K * (xb[q] - xa[q]);
    Vec next = uniform_ball(sp, z, delta * (1 + 1e-12));
    legs.emplace_back(sp, theta, prev, next);
    prev = next;
  }
  auto tail = expel(b);
  for (auto it = tail.rbegin(); it != tail.rend(); ++it) legs.emplace_back(sp, theta, it->to(), it->from());
  return legs;
}

CurveCertificate dirac_chain_curve(const DiscreteSpace& sp, const RadialKernel& kernel,
                                   const Interpolation& theta, int a, int b, int T) {
  CurveCertificate c;
  c.construction = Construction::DiracChain;
  auto legs = dirac_chain_legs(sp, kernel, theta, a, b);
  if (legs.empty()) {
    for (int k = 0; k <= T; ++k) c.path.rho.push_back(dirac_at(sp, a));
    for (int k = 0; k < T; ++k) c.path.flux.push_back(Vec::Zero(sp.num_edges()));
    c.claimed_bound = c.printed_bound = 0.0;
    finish(c, sp, theta);
    return c;
  }
  c.path = sample_legs(sp, legs, T);
  c.length = total_length(legs);
  c.action_integral = c.length * c.length;
  auto cs = assemble_constants(theta, kernel);
  const double t = sp.distance(a, b) / kernel.scale();
  const double bd = dirac_chain_bound(cs, t), bp = dirac_chain_bound(cs, t, true);
  c.claimed_bound = bd * bd;
  c.printed_bound = bp * bp;
  c.notes.push_back(std::to_string(legs.size()) + " legs");
  finish(c, sp, theta);
  return c;
}

}  // namespace nlw
