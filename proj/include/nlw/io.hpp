#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlw/certify.hpp"
#include "nlw/constructions.hpp"
#include "nlw/hj.hpp"
#include "nlw/solver.hpp"

namespace nlw {

using json = nlohmann::ordered_json;

// ---- run configuration

struct SpaceSpec {
  std::string type = "grid";  // grid | two_point
  int dim = 1;
  double extent = 1.0;
  int n = 64;
  double w = 0.5;  // two_point edge weight
};

struct KernelSpec {
  std::string family = "indicator";  // indicator | smooth_bump | fractional | custom
  int dim = 1;
  double scale = 1.0;
  double s = 0.5, c_s = 1.0;
  std::string file;  // custom profile CSV (r, value)
};

struct ThetaSpec {
  std::string name = "arithmetic";
  std::string table_file;  // custom table CSV (x, h) when non-empty
};

// dirac | uniform | uniform-ball | gaussian-bump | cos-bump | from-csv
struct MeasureSpec {
  std::string shape = "uniform";
  std::optional<int> node;
  std::vector<double> center;
  double radius = 0, sigma = 0.1;
  std::vector<double> support;  // cos-bump interval [a, b] (1D)
  std::string file;
};

struct CertifySpec {
  std::vector<std::pair<int, int>> pairs;  // phi-bound pairs; default: argmax mu0, argmax mu1
  double s = 0;                            // convolution scale; 0: kernel scale
  int holder_samples = 200;
  // Multiplies every right-hand side; 1 except in negative-path fixtures.
  double rhs_scale = 1.0;
};

struct ConvergeSpec {
  std::vector<double> eps_list{0.4, 0.2, 0.1};
  double nodes_per_eps = 10;
  std::vector<int> n_list;
  double R = 0;
};

struct HJSpec {
  int T = 32;
  int samples = 100;
  double s = 0;
  double R = 0;
};

struct NonlocalizeSpec {
  std::vector<int> n_list{64, 128, 256};
  double c0 = 0.35, v = 0.3, sigma = 0.06;
  int T = 16;
  bool convolve = true;
};

struct RunConfig {
  SpaceSpec space;
  std::optional<KernelSpec> kernel;
  ThetaSpec theta;
  MeasureSpec mu0, mu1;
  SolveConfig solve;
  CertifySpec certify;
  ConvergeSpec converge;
  HJSpec hj;
  NonlocalizeSpec nonlocalize;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string output = "out";
  std::filesystem::path base_dir;  // relative file paths resolve against this
};

// Strict parse: unknown keys and ill-typed values raise ConfigError.
RunConfig parse_config(const json& j, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& file);
// Every field with its resolved value.
json to_json(const RunConfig& c);

RadialKernel make_kernel(const KernelSpec& k, const std::filesystem::path& base_dir = {});
Interpolation make_theta(const ThetaSpec& t, const std::filesystem::path& base_dir = {});
DiscreteSpace make_space(const RunConfig& c);
// Density w.r.t. the reference masses, normalized to unit mass.
Vec make_density(const DiscreteSpace& sp, const MeasureSpec& m, const std::filesystem::path& base_dir = {});

// (node index, density) rows; nodes not listed get 0.
Vec read_density_csv(const DiscreteSpace& sp, const std::filesystem::path& file);

// ---- serialization

json to_json(const SolveReport& r, bool with_path = false);
json to_json(const Path& p);
json to_json(const BoundCertificate& c);
json to_json(const std::vector<BoundCertificate>& cs);
json to_json(const HJReport& r);
json to_json(const ConvergeResult& r);
json to_json(const ConstantSet& c);
json to_json(const CurveCertificate& c);

void write_path_csv(std::ostream& os, const Path& p);                        // t,node,density
void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace);  // iteration,objective,residual
void write_certificates_csv(std::ostream& os, const std::vector<BoundCertificate>& cs);
void write_converge_csv(std::ostream& os, const ConvergeResult& r);
// Aligned plain-text table (name, lhs, rhs, margin, pass).
void write_certificate_table(std::ostream& os, const std::vector<BoundCertificate>& cs);

// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite values.
std::string format_number(double v);

// ---- SVG

struct SvgSeries {
  std::string label;
  std::vector<double> x, y;
  std::string color = "#1f77b4";
  bool markers = true;
  bool dashed = false;
};

struct SvgPlot {
  std::string title, xlabel, ylabel;
  bool logx = false, logy = false;
  std::vector<SvgSeries> series;
};

std::string render_svg(const SvgPlot& plot, int width = 640, int height = 440);

// Log-log error vs eps with a slope-1/2 guide through the largest-eps point.
SvgPlot converge_plot(const ConvergeResult& r);

void write_text(const std::filesystem::path& file, const std::string& text);
void write_json(const std::filesystem::path& file, const json& j);

}  // namespace nlw
