#pragma once

#include "rrsim/dynamics.hpp"
#include "rrsim/integrator.hpp"

#include <json.hpp>

#include <array>
#include <limits>
#include <utility>
#include <vector>

namespace rrsim {

// ---------------------------------------------------------------------------
// Trajectory comparison and verdicts
// ---------------------------------------------------------------------------

/// Sup-norm dwell-time sweep result: one trajectory gap per tested tau.
struct DivergenceReport {
  std::vector<double> taus;
  std::vector<double> gaps;
  std::array<double, 2> window{0.0, 0.0};
};

/// max over shared grid points in [wa, wb] of the Euclidean state gap.
/// Both trajectories must cover the window on the same grid (shared points are
/// matched to within a small time tolerance); throws AnalysisError otherwise.
double sup_norm_gap(const Trajectory& a, const Trajectory& b, double wa, double wb);

struct StabilityVerdict {
  enum class Kind { StaysInBall, ConvergesTo0, Diverges, Blowup };
  Kind kind = Kind::StaysInBall;
  double epsilon = 0.0;
  double eta = 0.0;
  double sup_norm = 0.0;
  double first_exit_time = std::numeric_limits<double>::quiet_NaN();  ///< Diverges
  double settled_time = std::numeric_limits<double>::quiet_NaN();     ///< ConvergesTo0
  double blowup_time = std::numeric_limits<double>::quiet_NaN();      ///< Blowup
};

/// Ball-containment / decay classification of a trajectory:
///  - Blowup if the run was truncated by the integrator,
///  - Diverges (with first exit time) if some sample leaves the epsilon-ball,
///  - ConvergesTo0 if additionally every sample beyond
///    settle_fraction * horizon stays within eta,
///  - StaysInBall otherwise.
/// Norms are taken over state components [norm_offset, norm_offset+norm_len)
/// (norm_len = -1 means the full state).
StabilityVerdict stability_verdict(const Trajectory& traj, double epsilon, double eta,
                                   double settle_fraction, int norm_offset = 0,
                                   int norm_len = -1);

/// Least-squares fit of log ||x(t)|| vs t over the window; returns (slope 1/s,
/// coefficient of determination). Zero norms shrink the window to the last
/// all-positive prefix.
std::pair<double, double> decay_fit(const Trajectory& traj, double wa, double wb,
                                    int norm_offset = 0, int norm_len = -1);

// ---------------------------------------------------------------------------
// Contraction-rate constants and decay bound formulas
// ---------------------------------------------------------------------------

struct ContractionConstants {
  double lambda_g = 0.0;      ///< min over eigenvalues of -Re(lambda(Df(0)))
  double lambda_prime = 0.0;  ///< fraction * lambda_g
  double kappa = 0.0;
  double overshoot_C = 1.0;   ///< sup_t ||e^{Df(0) t}|| e^{lambda' t}
  double lambda = 0.0;        ///< (1 - kappa) / C^2 * lambda'
};

/// Computes the linearized contraction-rate constants of the nominal closed
/// loop at the origin. Uses the analytic Jacobian when the system carries one,
/// central finite differences otherwise; C is estimated as the max of
/// ||e^{Df(0)t}|| e^{lambda' t} over `grid_points` samples of [0, 50/lambda'].
/// Throws std::domain_error if the Jacobian is not Hurwitz.
ContractionConstants contraction_constants(const ControlAffineSystem& sys, double kappa,
                                           double lambda_prime_fraction, int grid_points = 2000);

struct GeometricBound {
  double at_blocks = 0.0;        ///< gamma_bar * sum_{i=0}^{n-1} (K1 e^{-lambda T})^i
  double at_general_time = 0.0;  ///< gamma_bar + K1 * (block sum)
  double limit = std::numeric_limits<double>::quiet_NaN();  ///< gamma_bar (1 + K1/(1-theta))
  bool has_limit = false;        ///< theta = K1 e^{-lambda T} < 1
};

GeometricBound geometric_bound(double gamma_bar, double K1, double lambda, double T, int n);

struct GeometricBoundTv {
  double full_sum = 0.0;   ///< beta^n g + K1 g sum_i beta^{n-1-i} K1^i e^{-i lambda T}
  double collapsed = std::numeric_limits<double>::quiet_NaN();  ///< beta^n g (1 + K1/(1-theta))
  bool has_bound = false;  ///< theta = (K1/beta) e^{-lambda T} < 1
};

GeometricBoundTv geometric_bound_tv(double gamma_bar, double K1, double lambda, double T,
                                    double beta, int n);

/// max(T_prime, log(eta / (2 K2 gamma_bar)) / log(beta)), in block units.
double settling_time(double eta, double K2, double gamma_bar, double beta, double T_prime);

// ---------------------------------------------------------------------------
// Chattering subdivision and integral defect
// ---------------------------------------------------------------------------

/// Partition of [begin, end] into equal blocks, each block split into m
/// contiguous sub-intervals whose lengths are the given convex weights times
/// the block length, ordered by field index.
class ChatterSubdivision {
 public:
  ChatterSubdivision(double begin, double end, std::vector<double> weights, int block_count);

  double begin() const { return begin_; }
  double end() const { return end_; }
  int block_count() const { return blocks_; }
  int field_count() const { return static_cast<int>(weights_.size()); }
  const std::vector<double>& weights() const { return weights_; }

  double block_length() const { return block_length_; }
  double block_boundary(int j) const;     ///< j = 0..block_count
  double sub_boundary(int j, int i) const;///< start of sub-interval i (0..m) in block j
  int assignment(double t) const;         ///< active field index in 1..m

 private:
  friend std::pair<int, double> locate_in_blocks(const ChatterSubdivision& s, double t);
  double begin_, end_, block_length_;
  int blocks_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;  // cumulative_[0] = 0, cumulative_[m] = 1
};

ChatterSubdivision chatter_subdivide(double begin, double end, const std::vector<double>& weights,
                                     int block_count);

/// Exact piecewise-constant quadrature of
///   || int_{t'}^{t''} ( sum_i alpha_i F_i  -  F_{sigma(t)} ) dt ||
/// for frozen fields F_i, maximized over the given (t', t'') pairs. Whole
/// blocks contribute exactly zero by the subdivision's construction.
double chatter_defect(const std::vector<Eigen::VectorXd>& fields,
                      const std::vector<double>& weights, const ChatterSubdivision& sub,
                      const std::vector<std::pair<double, double>>& t_pairs);

/// Supremum of the defect over all pairs (t', t'') in [begin, end]: the running
/// defect integral is piecewise linear with vertices at sub-interval
/// boundaries and repeats identically per block, so the supremum is the
/// diameter of the single-block vertex set.
double max_chatter_defect(const std::vector<Eigen::VectorXd>& fields,
                          const std::vector<double>& weights, const ChatterSubdivision& sub);

// ---------------------------------------------------------------------------
// Empirical probes
// ---------------------------------------------------------------------------

struct SwitchProbeConfig {
  double tau_lo = 0.0;
  double tau_hi = 0.0;
  double horizon = 0.0;
  double step = 0.0;
  double eta = 0.0;
  double settle_fraction = 0.8;
  double rel_tol = 1e-2;
  double t0 = 0.0;
  int norm_offset = 0;
  int norm_len = -1;
};

struct SwitchProbeResult {
  bool nominal_converges = false;
  bool found = false;
  double critical_tau = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::pair<double, bool>> observations;  ///< (tau, succeeded), in test order
  bool monotone = true;  ///< tested successes form a lower interval in tau
};

/// Bisection probe for the largest constant dwell time from which the m-scaled
/// round-robin run still settles into the eta-ball by the horizon. Monotone
/// success in tau is not assumed: the probe reports the largest tested success
/// and flags non-monotone observations. The nominal loop is verified first.
SwitchProbeResult max_switching_time_probe(const ControlAffineSystem& sys, const StateVec& x0,
                                           const SwitchProbeConfig& cfg);

/// Runs the m-scaled round-robin system once per tau against the nominal run
/// and records sup-norm gaps over the window. Fans out over taus in parallel
/// (capped by RR_SIM_THREADS); results are merged by input order.
DivergenceReport tau_sweep(const ControlAffineSystem& sys, const StateVec& x0, double t0,
                           const std::vector<double>& taus, const std::array<double, 2>& window,
                           double step);

// ---------------------------------------------------------------------------
// Report serialization (JSON wire formats)
// ---------------------------------------------------------------------------

nlohmann::json to_json(const DivergenceReport& r);
nlohmann::json to_json(const StabilityVerdict& v);
nlohmann::json to_json(const ContractionConstants& c);
std::string to_string(StabilityVerdict::Kind kind);

/// Deterministic parallel map: body(i) for i in [0, n), executed on up to
/// RR_SIM_THREADS workers (machine parallelism by default).
void parallel_for(int n, const std::function<void(int)>& body);

}  // namespace rrsim
