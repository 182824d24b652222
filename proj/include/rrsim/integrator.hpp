#pragma once

#include "rrsim/dynamics.hpp"
#include "rrsim/schedule.hpp"
#include "rrsim/types.hpp"

#include <functional>
#include <limits>
#include <vector>

namespace rrsim {

/// Any state component beyond this magnitude (or non-finite) terminates the
/// run as divergent.
inline constexpr double kBlowupThreshold = 1e12;

struct IntegratorConfig {
  double step = 0.0;     ///< base step h, s
  double horizon = 0.0;  ///< integration length from t0, s
  int record_stride = 1; ///< keep every record_stride-th accepted step
};

/// Uniformly recorded solution samples. `active` holds the scheduled channel
/// index at each sample time (0 for nominal runs). If the run blew up the
/// trajectory is truncated at the last finite state and flagged.
struct Trajectory {
  std::vector<double> times;
  std::vector<StateVec> states;
  std::vector<int> active;
  bool blowup = false;
  double blowup_time = std::numeric_limits<double>::quiet_NaN();

  int dim() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }
  std::size_t size() const { return times.size(); }
};

/// One accepted RK4 step [begin, end] and the channel frozen across it.
struct StepRecord {
  double begin;
  double end;
  int channel;
};

/// Channel-frozen right-hand side: dx = F(t, x) with channel k held constant
/// for the whole step (k = 0 means nominal / unscheduled evaluation).
using ChannelRhs = std::function<void(double t, const StateVec& x, int k, StateVec& dx)>;

/// Classical fixed-step RK4. When a schedule is given, each base step is
/// shortened to end exactly at the next switch instant, so the active channel
/// is constant within every accepted step and no stage straddles a
/// discontinuity. Times come from index arithmetic, not repeated addition.
Trajectory integrate(const ChannelRhs& rhs, const StateVec& x0, double t0,
                     const IntegratorConfig& cfg, const Schedule* schedule = nullptr,
                     const ProjectionFn* projection = nullptr,
                     std::vector<StepRecord>* step_log = nullptr);

/// Builds the closed-loop right-hand side for a system in the given mode and
/// integrates it. The system's post-step projection (if any) is applied after
/// every accepted step.
Trajectory integrate_closed_loop(const ControlAffineSystem& sys, const ClosedLoopMode& mode,
                                 const StateVec& x0, double t0, const IntegratorConfig& cfg,
                                 std::vector<StepRecord>* step_log = nullptr);

/// Channel-frozen closed-loop RHS for a system (reusable by callers that need
/// direct field access; allocates its scratch once per returned object).
ChannelRhs make_closed_loop_rhs(const ControlAffineSystem& sys, double gain_factor);

/// Integrates a sparse run under a piecewise schedule segment by segment,
/// with the base step adapted to h_k = min(base_step, tau_k / 2) in each
/// segment and the recording stride chosen to land samples roughly every
/// `record_dt` seconds. Returns one concatenated trajectory.
Trajectory integrate_closed_loop_per_segment(const ControlAffineSystem& sys,
                                             const PiecewiseSchedule& schedule, bool scaled,
                                             const StateVec& x0, double t0, double base_step,
                                             double horizon, double record_dt);

struct OrderEstimate {
  double order = 0.0;
  bool exact = false;  ///< errors were identically zero (e.g. constant field)
};

/// Empirical convergence order: integrates with steps h and h/2 against a
/// reference at h/8 and returns log2(err(h) / err(h/2)). Expect ~4 for smooth
/// fields.
OrderEstimate convergence_order(const ChannelRhs& rhs, const StateVec& x0, double t0, double t1,
                                double h = 0.0);

}  // namespace rrsim
