// nlw: command-line front end for distances, geodesics, certificates and sweeps.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "nlw/certify.hpp"
#include "nlw/errors.hpp"
#include "nlw/hj.hpp"
#include "nlw/io.hpp"
#include "nlw/transport.hpp"

using namespace nlw;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0, kConfigError = 1, kMaxIters = 2, kInfiniteCost = 3, kFailed = 4;

const std::vector<std::string> kCertificateNames = {"lower-bounds", "dirac-floor", "disintegration", "phi-bound",
                                                    "tv-upper",     "convolution", "holder",         "hj"};

struct Context {
  RunConfig cfg;
  fs::path out;
};

int status_code(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return kOk;
    case SolveStatus::InfiniteCost: return kInfiniteCost;
    default: return kMaxIters;
  }
}

void print_summary(const SolveReport& r) {
  std::printf("distance=%.6f status=%s\n", r.distance, to_string(r.status).c_str());
}

int argmax(const Vec& v) {
  Eigen::Index k = 0;
  v.maxCoeff(&k);
  return int(k);
}

int support_size(const Vec& v) { return int((v.array() > 0).count()); }

std::string stream_to_string(const std::function<void(std::ostream&)>& f) {
  std::ostringstream o;
  f(o);
  return o.str();
}

// ---- distance / geodesic

struct Instance {
  DiscreteSpace sp;
  Interpolation theta;
  Vec mu0, mu1;
};

Instance instance(const RunConfig& c) {
  Instance in{make_space(c), make_theta(c.theta, c.base_dir), {}, {}};
  in.mu0 = make_density(in.sp, c.mu0, c.base_dir);
  in.mu1 = make_density(in.sp, c.mu1, c.base_dir);
  return in;
}

int cmd_distance(const Context& ctx) {
  const Instance in = instance(ctx.cfg);
  const SolveReport r = solve(in.sp, in.theta, in.mu0, in.mu1, ctx.cfg.solve);
  write_json(ctx.out / "report.json", to_json(r));
  write_text(ctx.out / "geodesic.csv", stream_to_string([&](std::ostream& o) { write_path_csv(o, r.path); }));
  if (ctx.cfg.solve.record_trace)
    write_text(ctx.out / "trace.csv", stream_to_string([&](std::ostream& o) { write_trace_csv(o, r.trace); }));
  print_summary(r);
  if (!r.converged() && !r.message.empty()) std::cerr << r.message << "\n";
  return status_code(r.status);
}

int cmd_geodesic(const Context& ctx) {
  const Instance in = instance(ctx.cfg);
  const SolveReport r = solve(in.sp, in.theta, in.mu0, in.mu1, ctx.cfg.solve);
  write_json(ctx.out / "geodesic.json", to_json(r, true));
  write_text(ctx.out / "geodesic.csv", stream_to_string([&](std::ostream& o) { write_path_csv(o, r.path); }));
  if (in.sp.dim() == 1 && r.path.steps() > 0) {
    SvgPlot p;
    p.title = "geodesic snapshots";
    p.xlabel = "x";
    p.ylabel = "density";
    const char* colors[] = {"#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#d62728"};
    const int T = r.path.steps();
    for (int q = 0; q <= 4; ++q) {
      const int k = int(std::lround(q * T / 4.0));
      SvgSeries s;
      s.label = "t=" + format_number(double(k) / T);
      s.color = colors[q];
      s.markers = false;
      for (int i = 0; i < in.sp.size(); ++i) {
        s.x.push_back(in.sp.point(i)[0]);
        s.y.push_back(r.path.rho[k][i]);
      }
      p.series.push_back(s);
    }
    write_text(ctx.out / "geodesic.svg", render_svg(p));
  }
  print_summary(r);
  return status_code(r.status);
}

// ---- certify

std::vector<std::string> parse_selector(const std::string& which) {
  std::vector<std::string> sel;
  std::stringstream ss(which);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item == "all") return kCertificateNames;
    if (std::find(kCertificateNames.begin(), kCertificateNames.end(), item) == kCertificateNames.end())
      throw ConfigError("unknown certificate '" + item + "' (run with an empty --which to list names)");
    if (std::find(sel.begin(), sel.end(), item) == sel.end()) sel.push_back(item);
  }
  return sel;
}

void rescale_rhs(BoundCertificate& c, double scale) {
  if (c.skipped || scale == 1.0) return;
  c.rhs *= scale;
  c.margin = c.rhs - c.lhs;
  c.pass = c.margin >= -c.tolerance;
  c.note += (c.note.empty() ? "" : "; ") + std::string("rhs scaled by ") + format_number(scale);
}

int cmd_certify(const Context& ctx, const std::string& which) {
  const auto sel = parse_selector(which);
  if (sel.empty()) {
    for (auto& n : kCertificateNames) std::cout << n << "\n";
    std::cout << "all\n";
    return kOk;
  }
  const RunConfig& cfg = ctx.cfg;
  const Instance in = instance(cfg);
  auto wants = [&](const char* n) { return std::find(sel.begin(), sel.end(), n) != sel.end(); };

  std::optional<Regime> regime;
  if (in.sp.kernel()) regime = classify_regime(*in.sp.kernel(), in.theta);

  SolveReport rep;
  const bool need_solve = wants("lower-bounds") || wants("tv-upper") || wants("holder") || wants("hj") ||
                          (wants("dirac-floor") && support_size(in.mu0) == 1);
  if (need_solve) rep = solve(in.sp, in.theta, in.mu0, in.mu1, cfg.solve);
  const bool usable = rep.converged() || rep.status == SolveStatus::InfiniteCost;

  using Task = std::function<std::vector<BoundCertificate>()>;
  std::vector<Task> tasks;
  auto single = [](BoundCertificate c) { return std::vector<BoundCertificate>{std::move(c)}; };
  auto skip = [&](const std::string& name, const std::string& why) {
    tasks.push_back([=] { return std::vector<BoundCertificate>{skipped_certificate(name, why)}; });
  };
  const std::string kernel_needed = "needs a grid space built from a radial kernel";

  if (need_solve && !usable) {
    BoundCertificate c;
    c.name = "solver";
    c.lhs = c.rhs = c.margin = NAN;
    c.note = "solver status " + to_string(rep.status) + ": " + rep.message;
    tasks.push_back([=] { return std::vector<BoundCertificate>{c}; });
  }
  for (const auto& name : sel) {
    if (name == "lower-bounds") {
      if (usable) tasks.push_back([&] { return certify_lower_bounds(in.sp, in.theta, in.mu0, in.mu1, rep.distance); });
    } else if (name == "dirac-floor") {
      if (!regime) skip("dirac_floor", kernel_needed);
      else if (*regime != Regime::StrongTopology) skip("dirac_floor", "applies to regime (ii) only, instance is " + to_string(*regime));
      else {
        const int node = argmax(in.mu0);
        const double given = support_size(in.mu0) == 1 && usable ? rep.distance : NAN;
        tasks.push_back([&, node, given] {
          return single(certify_dirac_floor(in.sp, in.theta, node, in.mu1, cfg.solve, given));
        });
      }
    } else if (name == "disintegration") {
      if (!in.sp.kernel()) skip("disintegration", kernel_needed);
      else if (support_size(in.mu0) > 30 || support_size(in.mu1) > 30) skip("disintegration", "supports exceed 30 atoms");
      else tasks.push_back([&] { return single(certify_disintegration(in.sp, in.theta, in.mu0, in.mu1, cfg.solve)); });
    } else if (name == "phi-bound") {
      if (!regime) skip("phi_bound", kernel_needed);
      else if (*regime != Regime::WeakTopology) skip("phi_bound", "applies to regime (iii) only, instance is " + to_string(*regime));
      else {
        auto pairs = cfg.certify.pairs;
        if (pairs.empty()) pairs.emplace_back(argmax(in.mu0), argmax(in.mu1));
        for (auto& [a, b] : pairs)
          if (a < 0 || b < 0 || a >= in.sp.size() || b >= in.sp.size()) throw ConfigError("certify.pairs: node out of range");
        tasks.push_back([&, pairs] { return certify_phi_bound(in.sp, in.theta, pairs, cfg.solve); });
      }
    } else if (name == "tv-upper") {
      if (!regime) skip("tv_upper", kernel_needed);
      else if (*regime == Regime::Disconnected) skip("tv_upper", "not defined in regime (i)");
      else if (usable) tasks.push_back([&] { return certify_tv_upper(in.sp, in.theta, in.mu0, in.mu1, rep.distance); });
    } else if (name == "convolution") {
      if (!in.sp.kernel()) skip("convolution_w2", kernel_needed);
      else {
        const double s = cfg.certify.s > 0 ? cfg.certify.s : in.sp.kernel()->scale();
        tasks.push_back([&, s] { return convolution_w2_estimates(in.sp, in.mu0, s); });
      }
    } else if (name == "holder") {
      if (!rep.converged()) skip("holder", "needs a converged geodesic");
      else tasks.push_back([&] { return single(certify_holder(in.sp, rep, cfg.certify.holder_samples, cfg.seed)); });
    } else if (name == "hj") {
      if (!in.sp.kernel()) skip("hj", kernel_needed);
      else if (usable) {
        tasks.push_back([&] {
          HJOptions o;
          o.T = cfg.hj.T;
          o.samples = cfg.hj.samples;
          o.s = cfg.hj.s;
          o.R = cfg.hj.R;
          o.seed = cfg.seed;
          o.solve = cfg.solve;
          return certify_hj(hj_lower_bound(in.sp, in.theta, in.mu0, in.mu1, rep.distance, o));
        });
      }
    }
  }

  auto certs = run_battery(tasks, cfg.threads);
  for (auto& c : certs) rescale_rhs(c, cfg.certify.rhs_scale);

  write_json(ctx.out / "certificates.json", to_json(certs));
  write_text(ctx.out / "certificates.csv", stream_to_string([&](std::ostream& o) { write_certificates_csv(o, certs); }));
  write_certificate_table(std::cout, certs);
  std::vector<BoundCertificate> failed;
  for (auto& c : certs)
    if (!c.pass) failed.push_back(c);
  if (!failed.empty()) {
    std::cerr << "failed certificates:\n";
    write_certificate_table(std::cerr, failed);
    for (auto& c : failed)
      if (!c.note.empty()) std::cerr << "  " << c.name << ": " << c.note << "\n";
    return kFailed;
  }
  return kOk;
}

// ---- converge

int cmd_converge(const Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  if (!cfg.kernel) throw ConfigError("converge needs a kernel");
  if (cfg.space.type != "grid" || cfg.space.dim != 1) throw ConfigError("converge runs on 1D grids");
  const RadialKernel eta = make_kernel(*cfg.kernel, cfg.base_dir).rescaled(1.0);
  const Interpolation theta = make_theta(cfg.theta, cfg.base_dir);
  ConvergeOptions o;
  o.extent = cfg.space.extent;
  o.nodes_per_eps = cfg.converge.nodes_per_eps;
  o.n_override = cfg.converge.n_list;
  o.R = cfg.converge.R;
  o.solve = cfg.solve;
  const fs::path base = cfg.base_dir;
  const MeasureSpec m0 = cfg.mu0, m1 = cfg.mu1;
  ConvergeResult r;
  try {
    r = converge_experiment(
        eta, theta, [&](const DiscreteSpace& sp) { return make_density(sp, m0, base); },
        [&](const DiscreteSpace& sp) { return make_density(sp, m1, base); }, cfg.converge.eps_list, o);
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
  write_json(ctx.out / "converge.json", to_json(r));
  write_text(ctx.out / "converge.csv", stream_to_string([&](std::ostream& os) { write_converge_csv(os, r); }));
  write_text(ctx.out / "converge.svg", render_svg(converge_plot(r)));
  std::printf("%-8s %-6s %-12s %-12s %-12s %-12s %-12s\n", "eps", "n", "scaled", "w2", "error", "upper_env",
              "lower_env");
  for (auto& w : r.rows)
    std::printf("%-8g %-6d %-12.6g %-12.6g %-12.6g %-12.6g %-12.6g\n", w.eps, w.n, w.scaled, w.w2, w.error,
                w.upper_env, w.lower_env);
  std::printf("monotone=%d envelopes=%d\n", int(r.monotone), int(r.envelopes));
  if (!r.monotone) std::cerr << "warning: error sequence is not monotone within 10% slack\n";
  if (!r.envelopes) {
    std::cerr << "envelope violations:\n";
    for (auto& w : r.rows)
      if (!w.upper_ok || !w.lower_ok)
        std::cerr << "  eps=" << w.eps << (w.upper_ok ? "" : " upper") << (w.lower_ok ? "" : " lower")
                  << " status=" << to_string(w.status) << "\n";
    return kFailed;
  }
  return kOk;
}

// ---- hj-lower

int cmd_hj_lower(const Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const Instance in = instance(cfg);
  const SolveReport full = solve(in.sp, in.theta, in.mu0, in.mu1, cfg.solve);
  if (!full.converged()) {
    print_summary(full);
    std::cerr << "full solve did not converge: " << full.message << "\n";
    return status_code(full.status);
  }
  HJOptions o;
  o.T = cfg.hj.T;
  o.samples = cfg.hj.samples;
  o.s = cfg.hj.s;
  o.R = cfg.hj.R;
  o.seed = cfg.seed;
  o.solve = cfg.solve;
  HJReport r;
  try {
    r = hj_lower_bound(in.sp, in.theta, in.mu0, in.mu1, full.distance, o);
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
  const auto certs = certify_hj(r);
  json j = to_json(r);
  j["certificates"] = to_json(certs);
  write_json(ctx.out / "hj.json", j);
  std::printf("w=%.6f w_smoothed=%.6f w2=%.6f pairing=%.6g\n", r.w, r.w_smoothed, r.w2, r.pairing);
  write_certificate_table(std::cout, certs);
  for (auto& c : certs)
    if (!c.pass) return kFailed;
  return kOk;
}

// ---- nonlocalize

int cmd_nonlocalize(const Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  if (!cfg.kernel || cfg.space.type != "grid" || cfg.space.dim != 1)
    throw ConfigError("nonlocalize needs a 1D grid and a kernel");
  const RadialKernel eta = make_kernel(*cfg.kernel, cfg.base_dir);
  const NonlocalizeSpec& s = cfg.nonlocalize;
  json rows = json::array();
  std::ostringstream csv;
  csv << "n,h,residual,control_residual\n";
  std::printf("%-6s %-12s %-14s %-14s\n", "n", "h", "residual", "control");
  double prev = NAN;
  for (int n : s.n_list) {
    if (n < 2) throw ConfigError("nonlocalize.n_list: sizes must be >= 2");
    const DiscreteSpace grid = build_grid(1, cfg.space.extent, n, eta);
    const LocalFlow flow = translating_bump(grid, s.c0, s.v, s.sigma, s.T);
    NonlocalizeOptions on;
    on.convolve = s.convolve;
    const double res = nce_residual(grid, nonlocalize(grid, eta, flow.rho, flow.J, on));
    on.convolve = false;
    const double ctl = nce_residual(grid, nonlocalize(grid, eta, flow.rho, flow.J, on));
    json row = {{"n", n}, {"h", grid.grid_h()}, {"residual", res}, {"control_residual", ctl}};
    if (std::isfinite(prev)) row["ratio"] = prev / res;
    rows.push_back(row);
    prev = res;
    csv << n << ',' << format_number(grid.grid_h()) << ',' << format_number(res) << ',' << format_number(ctl) << '\n';
    std::printf("%-6d %-12.6g %-14.6g %-14.6g\n", n, grid.grid_h(), res, ctl);
  }
  write_json(ctx.out / "nonlocalize.json", {{"rows", rows}});
  write_text(ctx.out / "nonlocalize.csv", csv.str());
  return kOk;
}

// ---- kernel-info

template <class F>
json guarded(F f) {
  try {
    const double v = f();
    if (std::isfinite(v)) return v;
    return format_number(v);
  } catch (const DivergentIntegral&) {
    return "inf";
  } catch (const Error&) {
    return nullptr;
  }
}

int cmd_kernel_info(const Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  if (!cfg.kernel) throw ConfigError("kernel-info needs a kernel");
  const RadialKernel eta = make_kernel(*cfg.kernel, cfg.base_dir);
  const Interpolation theta = make_theta(cfg.theta, cfg.base_dir);
  json j;
  j["kernel"] = {{"name", eta.name()}, {"family", to_string(eta.family())}, {"dim", eta.dim()},
                 {"scale", eta.scale()}, {"integrable", eta.integrable()}, {"monotone", eta.is_monotone()}};
  json m = json::array(), ms = json::array();
  for (int p = 0; p <= 5; ++p) {
    m.push_back(guarded([&] { return eta.unscaled_moment(p); }));
    ms.push_back(guarded([&] { return eta.moment(p); }));
  }
  j["moments_unscaled"] = m;
  j["moments_scaled"] = ms;
  j["zeta_mass"] = guarded([&] { return SmoothingKernel::zeta_of(eta).unnormalized_mass(); });
  j["hj_constant"] = guarded([&] { return hj_constant(eta); });
  j["theta"] = {{"name", theta.name()}, {"kappa", theta.kappa()}, {"c_theta", theta.c_theta()}};
  j["regime"] = to_string(classify_regime(eta, theta));
  try {
    j["constants"] = to_json(assemble_constants(theta, eta));
  } catch (const Error& e) {
    j["constants"] = nullptr;
    j["constants_note"] = e.what();
  }
  if (cfg.space.type == "grid") {
    const DiscreteSpace sp = make_space(cfg);
    j["discrete"] = {{"nodes", sp.size()}, {"edges", sp.num_edges()}, {"C", sp.c_const()}, {"C_tilde", sp.c_tilde()}};
  }
  write_json(ctx.out / "kernel_info.json", j);
  std::cout << j.dump(2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal Wasserstein distances on discretized domains"};
  app.require_subcommand(1);
  std::string config_path, out_dir, which;
  int threads = 0;
  std::int64_t seed = -1;

  struct Cmd {
    const char* name;
    const char* help;
    CLI::App* app;
  };
  std::vector<Cmd> cmds = {{"distance", "solve for the distance between mu0 and mu1", nullptr},
                           {"geodesic", "solve and export the full optimizer path", nullptr},
                           {"certify", "run a certificate battery (--which)", nullptr},
                           {"converge", "eps-sweep against the classical W2 distance", nullptr},
                           {"hj-lower", "Hamilton-Jacobi dual lower bound pipeline", nullptr},
                           {"nonlocalize", "exact nonlocalization of a translating bump", nullptr},
                           {"kernel-info", "moments and assembled constants of the kernel", nullptr}};
  for (auto& c : cmds) {
    c.app = app.add_subcommand(c.name, c.help);
    c.app->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    c.app->add_option("--out", out_dir, "output directory (overrides config.output)");
    c.app->add_option("--threads", threads, "worker cap (overrides config.threads)")->check(CLI::PositiveNumber);
    c.app->add_option("--seed", seed, "random seed (overrides config.seed)")->check(CLI::NonNegativeNumber);
    if (std::string(c.name) == "certify")
      c.app->add_option("--which", which, "comma-separated certificates or 'all'; empty lists names");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }

  try {
    Context ctx;
    ctx.cfg = load_config(config_path);
    if (threads > 0) ctx.cfg.threads = threads;
    if (seed >= 0) ctx.cfg.seed = std::uint64_t(seed);
    if (!out_dir.empty()) ctx.cfg.output = out_dir;
    ctx.out = ctx.cfg.output;
    if (ctx.out.is_relative() && out_dir.empty()) ctx.out = ctx.cfg.base_dir / ctx.out;

    std::string name;
    for (auto& c : cmds)
      if (c.app->parsed()) name = c.name;
    if (name == "certify" && parse_selector(which).empty()) return cmd_certify(ctx, which);

    write_json(ctx.out / "config.resolved.json", to_json(ctx.cfg));
    if (name == "distance") return cmd_distance(ctx);
    if (name == "geodesic") return cmd_geodesic(ctx);
    if (name == "certify") return cmd_certify(ctx, which);
    if (name == "converge") return cmd_converge(ctx);
    if (name == "hj-lower") return cmd_hj_lower(ctx);
    if (name == "nonlocalize") return cmd_nonlocalize(ctx);
    if (name == "kernel-info") return cmd_kernel_info(ctx);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ContractViolation& e) {
    std::cerr << "precondition violated: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return kConfigError;
}
