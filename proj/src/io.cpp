#include "nlw/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "nlw/errors.hpp"

namespace nlw {

namespace fs = std::filesystem;

namespace {

// Tracks consumed keys so that leftovers can be reported.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& raw(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void get(const char* key, int& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) fail(key, "an integer");
    out = v.get<int>();
  }
  void get(const char* key, std::uint64_t& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) fail(key, "a nonnegative integer");
    out = v.get<std::uint64_t>();
  }
  void get(const char* key, double& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) fail(key, "a number");
    out = v.get<double>();
  }
  void get(const char* key, bool& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_boolean()) fail(key, "a boolean");
    out = v.get<bool>();
  }
  void get(const char* key, std::string& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_string()) fail(key, "a string");
    out = v.get<std::string>();
  }
  void get(const char* key, std::vector<double>& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array()) fail(key, "an array of numbers");
    out.clear();
    for (auto& x : v) {
      if (!x.is_number()) fail(key, "an array of numbers");
      out.push_back(x.get<double>());
    }
  }
  void get(const char* key, std::vector<int>& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array()) fail(key, "an array of integers");
    out.clear();
    for (auto& x : v) {
      if (!x.is_number_integer()) fail(key, "an array of integers");
      out.push_back(x.get<int>());
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(where_ + "." + key + ": expected " + what);
  }
  const std::string& where() const { return where_; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;

  bool take(const char* key) {
    if (!j_.contains(key)) return false;
    seen_.insert(key);
    return true;
  }
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

SpaceSpec parse_space(const json& j) {
  SpaceSpec s;
  Reader r(j, "space");
  r.get("type", s.type);
  r.get("dim", s.dim);
  r.get("extent", s.extent);
  r.get("n", s.n);
  r.get("w", s.w);
  r.finish();
  require(s.type == "grid" || s.type == "two_point", "space.type: expected 'grid' or 'two_point'");
  if (s.type == "two_point") {
    s.dim = 1;
    require(s.w > 0, "space.w: must be positive");
  } else {
    require(s.dim >= 1 && s.dim <= 3, "space.dim: must be 1, 2 or 3");
    require(s.extent > 0, "space.extent: must be positive");
    require(s.n >= 2, "space.n: must be at least 2");
  }
  return s;
}

KernelSpec parse_kernel(const json& j, int default_dim) {
  KernelSpec k;
  k.dim = default_dim;
  Reader r(j, "kernel");
  r.get("family", k.family);
  r.get("dim", k.dim);
  r.get("scale", k.scale);
  r.get("s", k.s);
  r.get("c_s", k.c_s);
  r.get("file", k.file);
  r.finish();
  require(k.family == "indicator" || k.family == "smooth_bump" || k.family == "fractional" || k.family == "custom",
          "kernel.family: expected indicator, smooth_bump, fractional or custom");
  require(k.dim == default_dim, "kernel.dim: must match space.dim");
  require(k.scale > 0, "kernel.scale: must be positive");
  if (k.family == "fractional") require(k.s > 0 && k.s < 2 && k.c_s > 0, "kernel: fractional needs 0 < s < 2, c_s > 0");
  if (k.family == "custom") require(!k.file.empty(), "kernel.file: custom kernels need a profile CSV");
  return k;
}

ThetaSpec parse_theta(const json& j) {
  ThetaSpec t;
  if (j.is_string()) {
    t.name = j.get<std::string>();
    require(t.name == "arithmetic" || t.name == "geometric" || t.name == "logarithmic" || t.name == "harmonic",
            "theta: expected arithmetic, geometric, logarithmic, harmonic or a custom table");
    return t;
  }
  Reader r(j, "theta");
  std::string kind;
  r.get("custom", kind);
  r.get("file", t.table_file);
  r.finish();
  require(kind == "table" && !t.table_file.empty(), "theta: custom form is {\"custom\": \"table\", \"file\": ...}");
  t.name = "table";
  return t;
}

MeasureSpec parse_measure(const json& j, const std::string& where, int dim) {
  MeasureSpec m;
  Reader r(j, where);
  r.get("shape", m.shape);
  if (r.has("node")) {
    int n = 0;
    r.get("node", n);
    m.node = n;
  }
  r.get("center", m.center);
  r.get("radius", m.radius);
  r.get("sigma", m.sigma);
  r.get("support", m.support);
  r.get("file", m.file);
  r.finish();
  const bool centered = int(m.center.size()) == dim;
  if (m.shape == "dirac") {
    require(m.node.has_value() || centered, where + ": dirac needs 'node' or a 'center' of length dim");
  } else if (m.shape == "uniform") {
  } else if (m.shape == "uniform-ball") {
    require(centered && m.radius >= 0, where + ": uniform-ball needs 'center' of length dim and 'radius' >= 0");
  } else if (m.shape == "gaussian-bump") {
    require(centered && m.sigma > 0, where + ": gaussian-bump needs 'center' of length dim and 'sigma' > 0");
  } else if (m.shape == "cos-bump") {
    require(dim == 1 && m.support.size() == 2 && m.support[0] < m.support[1],
            where + ": cos-bump needs a 1D space and 'support' [a, b] with a < b");
  } else if (m.shape == "from-csv") {
    require(!m.file.empty(), where + ": from-csv needs 'file'");
  } else {
    throw ConfigError(where + ".shape: expected dirac, uniform, uniform-ball, gaussian-bump, cos-bump or from-csv");
  }
  return m;
}

SolveConfig parse_solve(const json& j) {
  SolveConfig c;
  Reader r(j, "solver");
  r.get("time_steps", c.time_steps);
  r.get("max_iters", c.max_iters);
  r.get("feas_tol", c.feas_tol);
  r.get("gap_tol", c.gap_tol);
  r.get("rho_floor", c.rho_floor);
  r.get("barrier_decrease", c.barrier_decrease);
  r.get("floor_decades", c.floor_decades);
  r.get("floor_share_trigger", c.floor_share_trigger);
  r.get("divergence_ratio", c.divergence_ratio);
  r.get("singular_nodes", c.singular_nodes);
  r.get("record_trace", c.record_trace);
  r.finish();
  require(c.time_steps >= 1, "solver.time_steps: must be >= 1");
  require(c.max_iters >= 1, "solver.max_iters: must be >= 1");
  require(c.feas_tol > 0 && c.gap_tol > 0 && c.rho_floor > 0, "solver: tolerances and floor must be positive");
  require(c.barrier_decrease > 0 && c.barrier_decrease < 1, "solver.barrier_decrease: must lie in (0, 1)");
  require(c.floor_decades >= 0, "solver.floor_decades: must be >= 0");
  require(c.divergence_ratio > 1, "solver.divergence_ratio: must exceed 1");
  return c;
}

CertifySpec parse_certify(const json& j) {
  CertifySpec c;
  Reader r(j, "certify");
  if (r.has("pairs")) {
    const json& p = r.raw("pairs");
    if (!p.is_array()) r.fail("pairs", "an array of [i, j] node pairs");
    for (auto& e : p) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
        r.fail("pairs", "an array of [i, j] node pairs");
      c.pairs.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
  }
  r.get("s", c.s);
  r.get("holder_samples", c.holder_samples);
  r.get("rhs_scale", c.rhs_scale);
  r.finish();
  require(c.s >= 0, "certify.s: must be >= 0");
  require(c.holder_samples >= 1, "certify.holder_samples: must be >= 1");
  return c;
}

ConvergeSpec parse_converge(const json& j) {
  ConvergeSpec c;
  Reader r(j, "converge");
  r.get("eps_list", c.eps_list);
  r.get("nodes_per_eps", c.nodes_per_eps);
  r.get("n_list", c.n_list);
  r.get("R", c.R);
  r.finish();
  require(!c.eps_list.empty(), "converge.eps_list: must not be empty");
  require(c.nodes_per_eps > 0, "converge.nodes_per_eps: must be positive");
  require(c.n_list.empty() || c.n_list.size() == c.eps_list.size(), "converge.n_list: must match eps_list");
  return c;
}

HJSpec parse_hj(const json& j) {
  HJSpec h;
  Reader r(j, "hj");
  r.get("T", h.T);
  r.get("samples", h.samples);
  r.get("s", h.s);
  r.get("R", h.R);
  r.finish();
  require(h.T >= 2 && h.samples >= 1, "hj: T >= 2 and samples >= 1");
  return h;
}

NonlocalizeSpec parse_nonlocalize(const json& j) {
  NonlocalizeSpec n;
  Reader r(j, "nonlocalize");
  r.get("n_list", n.n_list);
  r.get("c0", n.c0);
  r.get("v", n.v);
  r.get("sigma", n.sigma);
  r.get("T", n.T);
  r.get("convolve", n.convolve);
  r.finish();
  require(!n.n_list.empty() && n.sigma > 0 && n.T >= 1, "nonlocalize: needs n_list, sigma > 0, T >= 1");
  return n;
}

fs::path resolve(const fs::path& base, const std::string& file) {
  fs::path p(file);
  return p.is_absolute() || base.empty() ? p : base / p;
}

json measure_json(const MeasureSpec& m) {
  json j;
  j["shape"] = m.shape;
  if (m.node) j["node"] = *m.node;
  j["center"] = m.center;
  j["radius"] = m.radius;
  j["sigma"] = m.sigma;
  j["support"] = m.support;
  j["file"] = m.file;
  return j;
}

json num(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

json nums(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

json nums(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

}  // namespace

RunConfig parse_config(const json& j, const fs::path& base_dir) {
  RunConfig c;
  c.base_dir = base_dir;
  Reader r(j, "config");
  if (r.has("space")) c.space = parse_space(r.raw("space"));
  if (r.has("kernel")) c.kernel = parse_kernel(r.raw("kernel"), c.space.dim);
  if (r.has("theta")) c.theta = parse_theta(r.raw("theta"));
  if (r.has("mu0")) c.mu0 = parse_measure(r.raw("mu0"), "mu0", c.space.dim);
  if (r.has("mu1")) c.mu1 = parse_measure(r.raw("mu1"), "mu1", c.space.dim);
  if (r.has("solver")) c.solve = parse_solve(r.raw("solver"));
  if (r.has("certify")) c.certify = parse_certify(r.raw("certify"));
  if (r.has("converge")) c.converge = parse_converge(r.raw("converge"));
  if (r.has("hj")) c.hj = parse_hj(r.raw("hj"));
  if (r.has("nonlocalize")) c.nonlocalize = parse_nonlocalize(r.raw("nonlocalize"));
  r.get("seed", c.seed);
  r.get("threads", c.threads);
  r.get("output", c.output);
  r.finish();
  require(c.threads >= 1, "config.threads: must be >= 1");
  require(c.space.type == "two_point" || c.kernel.has_value(), "config.kernel: grid spaces need a kernel");
  return c;
}

RunConfig load_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + file.string() + ": " + e.what());
  }
  return parse_config(j, file.parent_path());
}

json to_json(const RunConfig& c) {
  json j;
  j["space"] = {{"type", c.space.type}, {"dim", c.space.dim}, {"extent", c.space.extent}, {"n", c.space.n},
                {"w", c.space.w}};
  if (c.kernel)
    j["kernel"] = {{"family", c.kernel->family}, {"dim", c.kernel->dim}, {"scale", c.kernel->scale},
                   {"s", c.kernel->s},           {"c_s", c.kernel->c_s}, {"file", c.kernel->file}};
  if (c.theta.table_file.empty())
    j["theta"] = c.theta.name;
  else
    j["theta"] = {{"custom", "table"}, {"file", c.theta.table_file}};
  j["mu0"] = measure_json(c.mu0);
  j["mu1"] = measure_json(c.mu1);
  const SolveConfig& s = c.solve;
  j["solver"] = {{"time_steps", s.time_steps},
                 {"max_iters", s.max_iters},
                 {"feas_tol", s.feas_tol},
                 {"gap_tol", s.gap_tol},
                 {"rho_floor", s.rho_floor},
                 {"barrier_decrease", s.barrier_decrease},
                 {"floor_decades", s.floor_decades},
                 {"floor_share_trigger", s.floor_share_trigger},
                 {"divergence_ratio", s.divergence_ratio},
                 {"singular_nodes", s.singular_nodes},
                 {"record_trace", s.record_trace}};
  json pairs = json::array();
  for (auto& [a, b] : c.certify.pairs) pairs.push_back({a, b});
  j["certify"] = {{"pairs", pairs},
                  {"s", c.certify.s},
                  {"holder_samples", c.certify.holder_samples},
                  {"rhs_scale", c.certify.rhs_scale}};
  j["converge"] = {{"eps_list", c.converge.eps_list},
                   {"nodes_per_eps", c.converge.nodes_per_eps},
                   {"n_list", c.converge.n_list},
                   {"R", c.converge.R}};
  j["hj"] = {{"T", c.hj.T}, {"samples", c.hj.samples}, {"s", c.hj.s}, {"R", c.hj.R}};
  const NonlocalizeSpec& n = c.nonlocalize;
  j["nonlocalize"] = {{"n_list", n.n_list}, {"c0", n.c0}, {"v", n.v},
                      {"sigma", n.sigma},   {"T", n.T},   {"convolve", n.convolve}};
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["output"] = c.output;
  return j;
}

RadialKernel make_kernel(const KernelSpec& k, const fs::path& base_dir) {
  try {
    if (k.family == "indicator") return RadialKernel::indicator(k.dim, k.scale);
    if (k.family == "smooth_bump") return RadialKernel::smooth_bump(k.dim, k.scale);
    if (k.family == "fractional") return RadialKernel::fractional(k.dim, k.s, k.c_s, k.scale);
    if (k.family == "custom") return RadialKernel::custom_csv(k.dim, resolve(base_dir, k.file).string(), k.scale);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("kernel: ") + e.what());
  }
  throw ConfigError("kernel.family: unknown family '" + k.family + "'");
}

Interpolation make_theta(const ThetaSpec& t, const fs::path& base_dir) {
  try {
    if (!t.table_file.empty()) return Interpolation::from_table_csv(resolve(base_dir, t.table_file).string());
    return Interpolation::by_name(t.name);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("theta: ") + e.what());
  }
}

DiscreteSpace make_space(const RunConfig& c) {
  if (c.space.type == "two_point") return two_point_space(c.space.w);
  return build_grid(c.space.dim, c.space.extent, c.space.n, make_kernel(*c.kernel, c.base_dir));
}

Vec read_density_csv(const DiscreteSpace& sp, const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open measure CSV " + file.string());
  Vec rho = Vec::Zero(sp.size());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError(file.string() + ":" + std::to_string(lineno) + ": expected 'node,density'");
    int node = 0;
    double v = 0;
    const char* b = line.data();
    auto r1 = std::from_chars(b, b + comma, node);
    std::string rest = line.substr(comma + 1);
    while (!rest.empty() && (rest.back() == '\r' || rest.back() == ' ')) rest.pop_back();
    auto r2 = std::from_chars(rest.data(), rest.data() + rest.size(), v);
    if (r1.ec != std::errc() || r2.ec != std::errc() || r1.ptr != b + comma || r2.ptr != rest.data() + rest.size()) {
      if (lineno == 1) continue;  // header
      throw ConfigError(file.string() + ":" + std::to_string(lineno) + ": expected 'node,density'");
    }
    if (node < 0 || node >= sp.size()) throw ConfigError(file.string() + ": node index out of range");
    if (!(v >= 0) || !std::isfinite(v)) throw ConfigError(file.string() + ": densities must be finite and >= 0");
    rho[node] = v;
  }
  return rho;
}

namespace {
Vec raw_density(const DiscreteSpace& sp, const MeasureSpec& m, const fs::path& base_dir) {
  Vec rho;
  if (m.shape == "dirac") {
    const int node = m.node ? *m.node : nearest_node(sp, m.center);
    if (node < 0 || node >= sp.size()) throw ConfigError("dirac node out of range");
    rho = dirac_at(sp, node);
  } else if (m.shape == "uniform") {
    rho = uniform_density(sp);
  } else if (m.shape == "uniform-ball") {
    rho = uniform_ball(sp, m.center, m.radius);
  } else if (m.shape == "gaussian-bump") {
    rho = gaussian_bump(sp, m.center, m.sigma);
  } else if (m.shape == "cos-bump") {
    if (sp.dim() != 1) throw ConfigError("cos-bump needs a 1D space");
    const double a = m.support[0], b = m.support[1];
    rho = Vec::Zero(sp.size());
    for (int i = 0; i < sp.size(); ++i) {
      const double x = sp.point(i)[0];
      if (x > a && x < b) rho[i] = 1 - std::cos(2 * M_PI * (x - a) / (b - a));
    }
  } else if (m.shape == "from-csv") {
    rho = read_density_csv(sp, resolve(base_dir, m.file));
  } else {
    throw ConfigError("unknown measure shape '" + m.shape + "'");
  }
  return rho;
}
}  // namespace

Vec make_density(const DiscreteSpace& sp, const MeasureSpec& m, const fs::path& base_dir) {
  Vec rho;
  try {
    rho = raw_density(sp, m, base_dir);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("measure '" + m.shape + "': " + e.what());
  }
  const double mass = total_mass(sp, rho);
  if (!(mass > 0)) throw ConfigError("measure '" + m.shape + "' has no mass on this space");
  return rho / mass;
}

// ---- serialization

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

json to_json(const Path& p) {
  json j;
  j["steps"] = p.steps();
  json rho = json::array(), flux = json::array();
  for (auto& r : p.rho) rho.push_back(nums(r));
  for (auto& f : p.flux) flux.push_back(nums(f));
  j["rho"] = rho;
  j["flux"] = flux;
  return j;
}

json to_json(const SolveReport& r, bool with_path) {
  json j;
  j["status"] = to_string(r.status);
  j["distance"] = num(r.distance);
  j["objective"] = num(r.objective);
  j["iterations"] = r.iterations;
  j["residual"] = num(r.residual);
  j["gap"] = num(r.gap);
  j["floor"] = num(r.floor);
  j["floor_share"] = num(r.floor_share);
  j["floor_objectives"] = nums(r.floor_objectives);
  j["floor_ratios"] = nums(r.floor_ratios);
  j["action_per_step"] = nums(r.action_per_step);
  j["message"] = r.message;
  json trace = json::array();
  for (auto& t : r.trace)
    trace.push_back({{"iteration", t.iteration},
                     {"objective", num(t.objective)},
                     {"residual", num(t.residual)},
                     {"barrier", num(t.barrier)},
                     {"floor", num(t.floor)}});
  j["trace"] = trace;
  if (with_path) j["path"] = to_json(r.path);
  return j;
}

json to_json(const BoundCertificate& c) {
  return {{"name", c.name},         {"lhs", num(c.lhs)},
          {"rhs", num(c.rhs)},      {"margin", num(c.margin)},
          {"tolerance", num(c.tolerance)}, {"pass", c.pass},
          {"skipped", c.skipped},   {"printed_rhs", num(c.printed_rhs)},
          {"inputs", c.inputs},     {"note", c.note}};
}

json to_json(const std::vector<BoundCertificate>& cs) {
  json a = json::array();
  bool all = true;
  for (auto& c : cs) {
    a.push_back(to_json(c));
    all = all && c.pass;
  }
  return {{"all_pass", all}, {"certificates", a}};
}

json to_json(const HJReport& r) {
  const HJConstants& c = r.constants;
  json j;
  j["constants"] = {{"d", c.d},         {"M2", num(c.M2)},
                    {"M3", num(c.M3)},  {"M4", num(c.M4)},
                    {"M5", num(c.M5)},  {"C", num(c.C)},
                    {"A", num(c.A)},    {"s", num(c.s)},
                    {"eps", num(c.eps)}, {"prefactor", num(c.prefactor())},
                    {"drift", num(c.drift())}};
  j["R"] = num(r.R);
  j["lip_phi0"] = num(r.lip_phi0);
  j["local_residual"] = num(r.local_residual);
  j["local_tol"] = num(r.local_tol);
  j["samples"] = r.samples;
  j["max_lhs"] = num(r.max_lhs);
  j["slack_tol"] = num(r.slack_tol);
  j["pairing"] = num(r.pairing);
  j["w"] = num(r.w);
  j["w_smoothed"] = num(r.w_smoothed);
  j["w2"] = num(r.w2);
  j["headline_lhs"] = num(r.headline_lhs);
  j["headline_rhs"] = num(r.headline_rhs);
  j["w_dual_lower"] = num(r.w_dual_lower);
  j["checks"] = {{"subsolution", r.subsolution_ok()}, {"pairing", r.pairing_ok()}, {"headline", r.headline_ok()}};
  return j;
}

json to_json(const ConvergeResult& r) {
  json rows = json::array();
  for (auto& w : r.rows)
    rows.push_back({{"eps", num(w.eps)},
                    {"h", num(w.h)},
                    {"n", w.n},
                    {"distance", num(w.distance)},
                    {"scaled", num(w.scaled)},
                    {"w2", num(w.w2)},
                    {"error", num(w.error)},
                    {"upper_env", num(w.upper_env)},
                    {"upper_env_printed", num(w.upper_env_printed)},
                    {"lower_env", num(w.lower_env)},
                    {"upper_ok", w.upper_ok},
                    {"lower_ok", w.lower_ok},
                    {"status", to_string(w.status)}});
  return {{"R", num(r.R)}, {"monotone", r.monotone}, {"envelopes", r.envelopes}, {"ok", r.ok()}, {"rows", rows}};
}

json to_json(const ConstantSet& c) {
  return {{"d", c.d},
          {"alpha_d", num(c.alpha_d)},
          {"c_theta", num(c.c_theta)},
          {"kappa", num(c.kappa)},
          {"blowup", c.blowup},
          {"s", num(c.s)},
          {"c_s", num(c.c_s)},
          {"eta_half", num(c.eta_half)},
          {"eta_sixth", num(c.eta_sixth)},
          {"set_step", num(c.set_step)},
          {"C_ds", num(c.C_ds)},
          {"C_dtheta", num(c.C_dtheta)},
          {"C_dtheta_eta", num(c.C_dtheta_eta)},
          {"C_dtheta_s", num(c.C_dtheta_s)},
          {"C_ds_tilde", num(c.C_ds_tilde)},
          {"C_ds_printed", num(c.C_ds_printed)},
          {"C_dtheta_printed", num(c.C_dtheta_printed)},
          {"C_dtheta_eta_printed", num(c.C_dtheta_eta_printed)},
          {"C_dtheta_s_printed", num(c.C_dtheta_s_printed)}};
}

json to_json(const CurveCertificate& c) {
  return {{"construction", to_string(c.construction)},
          {"length", num(c.length)},
          {"action_integral", num(c.action_integral)},
          {"discrete_action", num(c.discrete_action)},
          {"claimed_bound", num(c.claimed_bound)},
          {"printed_bound", num(c.printed_bound)},
          {"residual", num(c.residual)},
          {"holds", c.holds()},
          {"radii", nums(c.radii)},
          {"notes", c.notes},
          {"path", to_json(c.path)}};
}

void write_path_csv(std::ostream& os, const Path& p) {
  os << "t,node,density\n";
  const int T = static_cast<int>(p.rho.size()) - 1;
  for (int k = 0; k <= T; ++k) {
    const std::string t = format_number(T > 0 ? double(k) / T : 0.0);
    for (Eigen::Index i = 0; i < p.rho[k].size(); ++i) os << t << ',' << i << ',' << format_number(p.rho[k][i]) << '\n';
  }
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace) {
  os << "iteration,objective,residual\n";
  for (auto& t : trace) os << t.iteration << ',' << format_number(t.objective) << ',' << format_number(t.residual) << '\n';
}

namespace {
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + '"';
}
}  // namespace

void write_certificates_csv(std::ostream& os, const std::vector<BoundCertificate>& cs) {
  os << "name,lhs,rhs,margin,tolerance,pass,skipped,printed_rhs,inputs,note\n";
  for (auto& c : cs)
    os << csv_field(c.name) << ',' << format_number(c.lhs) << ',' << format_number(c.rhs) << ','
       << format_number(c.margin) << ',' << format_number(c.tolerance) << ',' << (c.pass ? 1 : 0) << ','
       << (c.skipped ? 1 : 0) << ',' << format_number(c.printed_rhs) << ',' << csv_field(c.inputs) << ','
       << csv_field(c.note) << '\n';
}

void write_converge_csv(std::ostream& os, const ConvergeResult& r) {
  os << "eps,distance,scaled,w2,upper_env,lower_env\n";
  for (auto& w : r.rows)
    os << format_number(w.eps) << ',' << format_number(w.distance) << ',' << format_number(w.scaled) << ','
       << format_number(w.w2) << ',' << format_number(w.upper_env) << ',' << format_number(w.lower_env) << '\n';
}

void write_certificate_table(std::ostream& os, const std::vector<BoundCertificate>& cs) {
  std::size_t width = 4;
  for (auto& c : cs) width = std::max(width, c.name.size());
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s %14s %14s %14s  %s\n", int(width), "name", "lhs", "rhs", "margin", "pass");
  os << buf;
  for (auto& c : cs) {
    std::snprintf(buf, sizeof buf, "%-*s %14.6g %14.6g %14.6g  %s\n", int(width), c.name.c_str(), c.lhs, c.rhs,
                  c.margin, c.skipped ? "skip" : (c.pass ? "yes" : "NO"));
    os << buf;
  }
}

// ---- SVG

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string o;
  for (char ch : s) {
    switch (ch) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      case '"': o += "&quot;"; break;
      default: o += ch;
    }
  }
  return o;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::string render_svg(const SvgPlot& plot, int width, int height) {
  const double L = 70, R = 20, T = 40, B = 55;
  auto tx = [&](double v) { return plot.logx ? std::log10(v) : v; };
  auto ty = [&](double v) { return plot.logy ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!plot.logx || x > 0) && (!plot.logy || y > 0);
  };

  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (auto& s : plot.series)
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k)
      if (usable(s.x[k], s.y[k])) {
        x0 = std::min(x0, tx(s.x[k]));
        x1 = std::max(x1, tx(s.x[k]));
        y0 = std::min(y0, ty(s.y[k]));
        y1 = std::max(y1, ty(s.y[k]));
      }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  auto pad = [](double& lo, double& hi, bool log) {
    if (log) {
      lo = std::floor(lo);
      hi = std::ceil(hi);
      if (hi <= lo) hi = lo + 1;
    } else {
      const double w = hi > lo ? hi - lo : std::max(1.0, std::abs(lo));
      lo -= 0.05 * w;
      hi += 0.05 * w;
    }
  };
  pad(x0, x1, plot.logx);
  pad(y0, y1, plot.logy);

  const double pw = width - L - R, ph = height - T - B;
  auto px = [&](double v) { return L + (tx(v) - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return T + (1 - (ty(v) - y0) / (y1 - y0)) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << fmt(width / 2.0) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
    << escape(plot.title) << "</text>\n";
  o << "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n";
  o << "<line x1=\"" << fmt(L) << "\" y1=\"" << fmt(T + ph) << "\" x2=\"" << fmt(L + pw) << "\" y2=\"" << fmt(T + ph)
    << "\"/>\n";
  o << "<line x1=\"" << fmt(L) << "\" y1=\"" << fmt(T) << "\" x2=\"" << fmt(L) << "\" y2=\"" << fmt(T + ph) << "\"/>\n";
  o << "</g>\n";

  auto ticks = [](double lo, double hi, bool log) {
    std::vector<double> t;
    if (log) {
      for (double e = lo; e <= hi + 1e-9; e += 1) t.push_back(std::pow(10.0, e));
    } else {
      const double raw = (hi - lo) / 5;
      const double mag = std::pow(10.0, std::floor(std::log10(raw)));
      const double step = raw / mag < 2 ? 2 * mag : raw / mag < 5 ? 5 * mag : 10 * mag;
      for (double v = std::ceil(lo / step) * step; v <= hi + 1e-12; v += step) t.push_back(std::abs(v) < 1e-14 ? 0 : v);
    }
    return t;
  };
  o << "<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (double v : ticks(x0, x1, plot.logx)) {
    const double X = px(v);
    o << "<line x1=\"" << fmt(X) << "\" y1=\"" << fmt(T + ph) << "\" x2=\"" << fmt(X) << "\" y2=\"" << fmt(T + ph + 5)
      << "\" stroke=\"black\"/><text x=\"" << fmt(X) << "\" y=\"" << fmt(T + ph + 18) << "\" text-anchor=\"middle\">"
      << tick_label(v) << "</text>\n";
  }
  for (double v : ticks(y0, y1, plot.logy)) {
    const double Y = py(v);
    o << "<line x1=\"" << fmt(L - 5) << "\" y1=\"" << fmt(Y) << "\" x2=\"" << fmt(L) << "\" y2=\"" << fmt(Y)
      << "\" stroke=\"black\"/><text x=\"" << fmt(L - 8) << "\" y=\"" << fmt(Y + 4) << "\" text-anchor=\"end\">"
      << tick_label(v) << "</text>\n";
  }
  o << "</g>\n";
  o << "<text x=\"" << fmt(L + pw / 2) << "\" y=\"" << fmt(height - 12.0)
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << escape(plot.xlabel) << "</text>\n";
  o << "<text transform=\"translate(16," << fmt(T + ph / 2)
    << ") rotate(-90)\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << escape(plot.ylabel)
    << "</text>\n";

  int legend = 0;
  for (auto& s : plot.series) {
    o << "<g class=\"series\" data-label=\"" << escape(s.label) << "\">\n";
    std::string pts;
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k)
      if (usable(s.x[k], s.y[k])) pts += fmt(px(s.x[k])) + "," + fmt(py(s.y[k])) + " ";
    if (!pts.empty()) pts.pop_back();
    o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
      << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"" << pts << "\"/>\n";
    if (s.markers)
      for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k)
        if (usable(s.x[k], s.y[k]))
          o << "<circle class=\"point\" cx=\"" << fmt(px(s.x[k])) << "\" cy=\"" << fmt(py(s.y[k]))
            << "\" r=\"3.5\" fill=\"" << s.color << "\"/>\n";
    const double ly = T + 14 + 16 * legend++;
    o << "<line x1=\"" << fmt(L + pw - 150) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(L + pw - 128) << "\" y2=\""
      << fmt(ly) << "\" stroke=\"" << s.color << "\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
    o << "<text x=\"" << fmt(L + pw - 122) << "\" y=\"" << fmt(ly + 4)
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(s.label) << "</text>\n";
    o << "</g>\n";
  }
  o << "</svg>\n";
  return o.str();
}

SvgPlot converge_plot(const ConvergeResult& r) {
  SvgPlot p;
  p.title = "nonlocal-to-local convergence";
  p.xlabel = "eps";
  p.ylabel = "|scaled distance - W2|";
  p.logx = p.logy = true;
  SvgSeries err{"error", {}, {}, "#1f77b4", true, false};
  for (auto& w : r.rows) {
    err.x.push_back(w.eps);
    err.y.push_back(w.error);
  }
  p.series.push_back(err);
  // guide through the largest-eps point with a positive error
  double e0 = 0, y0 = 0;
  for (auto& w : r.rows)
    if (w.error > 0 && w.eps > e0) e0 = w.eps, y0 = w.error;
  if (e0 > 0) {
    SvgSeries guide{"slope 1/2", {}, {}, "#888888", false, true};
    double lo = e0;
    for (auto& w : r.rows) lo = std::min(lo, w.eps);
    for (double e : {lo, e0}) {
      guide.x.push_back(e);
      guide.y.push_back(y0 * std::sqrt(e / e0));
    }
    p.series.push_back(guide);
  }
  return p;
}

void write_text(const fs::path& file, const std::string& text) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
  out << text;
}

void write_json(const fs::path& file, const json& j) { write_text(file, j.dump(2) + "\n"); }

}  // namespace nlw
