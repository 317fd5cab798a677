#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nlw/constants.hpp"
#include "nlw/hj.hpp"
#include "nlw/solver.hpp"

namespace nlw {

enum class Regime { Disconnected, StrongTopology, WeakTopology, Unclassified };
std::string to_string(Regime r);

// (i) kappa = 0 and eta integrable, (ii) kappa > 0 and eta integrable, (iii) algebraic blow-up.
Regime classify_regime(const RadialKernel& eta, const Interpolation& theta);

// One inequality lhs <= rhs; pass iff margin = rhs - lhs >= -tolerance.
struct BoundCertificate {
  std::string name;
  double lhs = 0, rhs = 0, margin = 0, tolerance = 0;
  bool pass = false;
  bool skipped = false;
  double printed_rhs = NAN;  // rhs with constants as originally stated, when they differ
  std::string inputs;        // short digest of the instance
  std::string note;
};

BoundCertificate make_certificate(std::string name, double lhs, double rhs, double tolerance,
                                  std::string inputs = {});
BoundCertificate skipped_certificate(std::string name, std::string note, std::string inputs = {});

// Solver distances carry time-discretization error; lower bounds are judged with this
// relative tolerance.
constexpr double kDistanceRelTol = 2e-3;

// sqrt(2/C~) W1 <= W and sqrt(2/C) TV <= W.
std::vector<BoundCertificate> certify_lower_bounds(const DiscreteSpace& sp, const Interpolation& theta,
                                                   const Vec& mu0, const Vec& mu1, double solver_distance);

// W(delta_node, nu) >= 2 / sqrt(sum_j eta m_j) for nu with no mass at the node (regime ii).
// Solves the distance unless given.
BoundCertificate certify_dirac_floor(const DiscreteSpace& sp, const Interpolation& theta, int node, const Vec& nu,
                                     const SolveConfig& cfg = {}, double solver_distance = NAN);

// W^2(mu, nu) <= min_pi sum pi_ij W^2(delta_i, delta_j); supports up to 30 atoms.
BoundCertificate certify_disintegration(const DiscreteSpace& sp, const Interpolation& theta, const Vec& mu,
                                        const Vec& nu, const SolveConfig& cfg = {});

// W(delta_a, delta_b) <= Phi(|a - b| / eps) for fractional kernels, one certificate per pair.
std::vector<BoundCertificate> certify_phi_bound(const DiscreteSpace& sp, const Interpolation& theta,
                                                const std::vector<std::pair<int, int>>& pairs,
                                                const SolveConfig& cfg = {});

// W^2 <= C TV on the hull of the supports, plus the mixture curve through min(mu, nu):
// W^2 <= curve action <= C TV.
std::vector<BoundCertificate> certify_tv_upper(const DiscreteSpace& sp, const Interpolation& theta, const Vec& mu,
                                               const Vec& nu, double solver_distance);

// W2(mu, K_s * mu) <= sqrt(d(d+1)) s and W2(mu, zeta_bar * mu) <= sqrt(d/(d+2) M4/M2) eps,
// with the product-coupling cost reported in the note.
std::vector<BoundCertificate> convolution_w2_estimates(const DiscreteSpace& sp, const Vec& mu, double s);

// |rho_t0(A) - rho_t1(A)| <= sqrt(C/2) W sqrt(t1 - t0) along a converged geodesic, over
// `samples` random node sets and time pairs. printed_rhs carries the sqrt(2/C) form.
BoundCertificate certify_holder(const DiscreteSpace& sp, const SolveReport& geodesic_report, int samples = 200,
                                std::uint64_t seed = 1);

// HJ pipeline as three certificates: sampled subsolution inequality, pairing <= W_s^2 / 2,
// and W2^2 <= eps^2 M2/(2d) W^2 + (7/4 d R^2 + 8 d R) sqrt(eps).
std::vector<BoundCertificate> certify_hj(const HJReport& r);

// ---- convergence experiment

struct ConvergeOptions {
  double extent = 1.0;
  double nodes_per_eps = 10;  // h = eps / nodes_per_eps
  std::vector<int> n_override;  // explicit grid sizes (checked against h <= eps/10)
  double R = 0;                 // 0: diameter of the union of supports on the finest grid
  SolveConfig solve;
};

struct ConvergeRow {
  double eps = 0, h = 0;
  int n = 0;
  double distance = 0, scaled = 0, w2 = 0, error = 0;
  double upper_env = 0, upper_env_printed = 0;  // bound on `scaled`
  double lower_env = 0;                         // bound on W2^2: scaled^2 + err
  bool upper_ok = false, lower_ok = false;
  SolveStatus status = SolveStatus::MaxIters;
};

struct ConvergeResult {
  std::vector<ConvergeRow> rows;
  bool monotone = true;  // error nonincreasing as eps decreases, 10% slack
  bool envelopes = true;
  double R = 0;
  bool ok() const { return monotone && envelopes; }
};

// Upper envelope for eps * sqrt(M2/2d) * W in terms of W2 (corrected constants);
// printed = true uses (1 + sqrt eps)^2 and the constants as stated.
double upper_envelope(const ConstantSet& c, const RadialKernel& eta_eps, double w2, bool printed = false);

using DensityBuilder = std::function<Vec(const DiscreteSpace&)>;
// 1D grids on [0, extent] with h = eps / nodes_per_eps; eta is the unscaled profile.
ConvergeResult converge_experiment(const RadialKernel& eta, const Interpolation& theta, const DensityBuilder& mu0,
                                   const DensityBuilder& mu1, const std::vector<double>& eps_list,
                                   const ConvergeOptions& opt = {});

// Run independent certificate tasks on up to `threads` workers; order of results is
// the order of tasks.
std::vector<BoundCertificate> run_battery(
    const std::vector<std::function<std::vector<BoundCertificate>()>>& tasks, int threads = 1);

}  // namespace nlw
