#include "rrsim/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <memory>

namespace rrsim {

namespace {

// y = x + c * k, written as a raw loop: the integrator is the hot path and the
// vectors are small.
inline void axpy(const StateVec& x, double c, const StateVec& k, StateVec& y) {
  const auto n = x.size();
  for (Eigen::Index i = 0; i < n; ++i) y(i) = x(i) + c * k(i);
}

inline bool state_ok(const StateVec& x) {
  const auto n = x.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = x(i);
    if (!std::isfinite(v) || std::abs(v) > kBlowupThreshold) return false;
  }
  return true;
}

struct Rk4Workspace {
  StateVec k1, k2, k3, k4, xs;
  explicit Rk4Workspace(Eigen::Index d) : k1(d), k2(d), k3(d), k4(d), xs(d) {}
};

// One classical RK4 step over [a, a+h] with the channel frozen at `chan`.
inline void rk4_step(const ChannelRhs& rhs, double a, double h, int chan, StateVec& x,
                     Rk4Workspace& w) {
  rhs(a, x, chan, w.k1);
  axpy(x, 0.5 * h, w.k1, w.xs);
  rhs(a + 0.5 * h, w.xs, chan, w.k2);
  axpy(x, 0.5 * h, w.k2, w.xs);
  rhs(a + 0.5 * h, w.xs, chan, w.k3);
  axpy(x, h, w.k3, w.xs);
  rhs(a + h, w.xs, chan, w.k4);
  const double c = h / 6.0;
  const auto n = x.size();
  for (Eigen::Index i = 0; i < n; ++i)
    x(i) += c * (w.k1(i) + 2.0 * w.k2(i) + 2.0 * w.k3(i) + w.k4(i));
}

}  // namespace

Trajectory integrate(const ChannelRhs& rhs, const StateVec& x0, double t0,
                     const IntegratorConfig& cfg, const Schedule* schedule,
                     const ProjectionFn* projection, std::vector<StepRecord>* step_log) {
  if (!(cfg.step > 0.0) || !(cfg.horizon >= cfg.step))
    throw ConfigError("integrator: requires 0 < step <= horizon");
  if (cfg.record_stride < 1) throw ConfigError("integrator: record_stride must be >= 1");
  if (!all_finite(x0)) throw ConfigError("integrator: initial state is not finite");
  if (schedule && cfg.step > tau_at(*schedule, t0))
    std::cerr << "[rrsim] warning: step " << cfg.step << " exceeds initial dwell time "
              << tau_at(*schedule, t0) << "\n";

  Trajectory traj;
  const auto n_macro = static_cast<long>(std::ceil(cfg.horizon / cfg.step - 1e-9));
  traj.times.reserve(static_cast<std::size_t>(n_macro / cfg.record_stride + 2));

  StateVec x = x0;
  StateVec x_prev = x0;
  Rk4Workspace w(x0.size());

  auto record = [&](double t, const StateVec& s) {
    traj.times.push_back(t);
    traj.states.push_back(s);
    traj.active.push_back(schedule ? active_index(*schedule, t) : 0);
  };
  record(t0, x);

  long accepted = 0;
  double last_recorded = t0;
  for (long i = 0; i < n_macro; ++i) {
    // Macro grid by index arithmetic; the final point lands exactly on horizon.
    const double macro_end = (i + 1 == n_macro) ? t0 + cfg.horizon
                                                : t0 + static_cast<double>(i + 1) * cfg.step;
    double a = (i == 0) ? t0 : t0 + static_cast<double>(i) * cfg.step;
    while (a < macro_end) {
      double b = macro_end;
      int chan = 0;
      if (schedule) {
        chan = active_index(*schedule, a);
        const double ns = next_switch_time(*schedule, a);
        if (ns > a && ns < b) b = ns;
      }
      x_prev = x;
      rk4_step(rhs, a, b - a, chan, x, w);
      if (!state_ok(x)) {
        // Truncate at the last finite state and flag; make sure it is recorded.
        if (last_recorded < a) record(a, x_prev);
        traj.blowup = true;
        traj.blowup_time = a;
        return traj;
      }
      if (projection && *projection) (*projection)(x);
      if (step_log) step_log->push_back({a, b, chan});
      ++accepted;
      a = b;
      const bool final_point = (i + 1 == n_macro) && !(a < macro_end);
      if ((accepted % cfg.record_stride == 0 || final_point) && a > last_recorded) {
        record(a, x);
        last_recorded = a;
      }
    }
  }
  return traj;
}

ChannelRhs make_closed_loop_rhs(const ControlAffineSystem& sys, double gain_factor) {
  if (static_cast<int>(sys.channels.size()) != sys.m)
    throw ConfigError("system channel list does not match m");
  // Scratch lives in the closure; each returned ChannelRhs instance serves one
  // integration at a time.
  auto g = std::make_shared<StateVec>(sys.d);
  auto u = std::make_shared<Eigen::VectorXd>(sys.m);
  const double c = gain_factor;
  return [&sys, g, u, c](double /*t*/, const StateVec& x, int k, StateVec& dx) {
    sys.drift(x, dx);
    sys.feedback(x, *u);
    const auto n = dx.size();
    if (k > 0) {
      sys.channels[static_cast<std::size_t>(k - 1)](x, *g);
      const double uk = c * (*u)(k - 1);
      for (Eigen::Index i = 0; i < n; ++i) dx(i) += uk * (*g)(i);
    } else {
      for (int j = 0; j < sys.m; ++j) {
        sys.channels[static_cast<std::size_t>(j)](x, *g);
        const double uj = (*u)(j);
        for (Eigen::Index i = 0; i < n; ++i) dx(i) += uj * (*g)(i);
      }
    }
  };
}

Trajectory integrate_closed_loop(const ControlAffineSystem& sys, const ClosedLoopMode& mode,
                                 const StateVec& x0, double t0, const IntegratorConfig& cfg,
                                 std::vector<StepRecord>* step_log) {
  const Schedule* schedule = nullptr;
  double factor = 1.0;
  if (mode.switched()) {
    if (!mode.schedule) throw ConfigError("switched mode requires a schedule");
    if (channel_count(*mode.schedule) != sys.m)
      throw ConfigError("schedule channel count does not match the system");
    schedule = &*mode.schedule;
    factor = mode.gain_factor(sys.m);
  }
  const ChannelRhs rhs = make_closed_loop_rhs(sys, factor);
  const ProjectionFn* proj = sys.post_step_projection ? &sys.post_step_projection : nullptr;
  return integrate(rhs, x0, t0, cfg, schedule, proj, step_log);
}

Trajectory integrate_closed_loop_per_segment(const ControlAffineSystem& sys,
                                             const PiecewiseSchedule& schedule, bool scaled,
                                             const StateVec& x0, double t0, double base_step,
                                             double horizon, double record_dt) {
  const double T = schedule.segment_length();
  const auto n_seg = static_cast<long>(std::ceil(horizon / T - 1e-9));
  Trajectory out;
  StateVec x = x0;
  const ClosedLoopMode mode = scaled ? ClosedLoopMode::sparse(schedule)
                                     : ClosedLoopMode::sparse_unscaled(schedule);
  for (long seg = 0; seg < n_seg; ++seg) {
    const double seg_t0 = t0 + static_cast<double>(seg) * T;
    const double seg_len = std::min(T, horizon - static_cast<double>(seg) * T);
    const double tau = schedule.tau_at(seg_t0);
    IntegratorConfig cfg;
    cfg.step = std::min(base_step, tau / 2.0);
    cfg.horizon = seg_len;
    cfg.record_stride = std::max(1, static_cast<int>(std::llround(record_dt / cfg.step)));
    Trajectory part = integrate_closed_loop(sys, mode, x, seg_t0, cfg);

    const std::size_t skip = (seg == 0) ? 0 : 1;  // segment start duplicates previous end
    for (std::size_t i = skip; i < part.size(); ++i) {
      out.times.push_back(part.times[i]);
      out.states.push_back(std::move(part.states[i]));
      out.active.push_back(part.active[i]);
    }
    if (part.blowup) {
      out.blowup = true;
      out.blowup_time = part.blowup_time;
      return out;
    }
    x = out.states.back();
  }
  return out;
}

OrderEstimate convergence_order(const ChannelRhs& rhs, const StateVec& x0, double t0, double t1,
                                double h) {
  if (!(t1 > t0)) throw ConfigError("convergence_order: needs t1 > t0");
  if (h <= 0.0) h = (t1 - t0) / 64.0;

  auto final_state = [&](double step) {
    IntegratorConfig cfg;
    cfg.step = step;
    cfg.horizon = t1 - t0;
    cfg.record_stride = std::max(1, static_cast<int>(std::llround((t1 - t0) / step)));
    return integrate(rhs, x0, t0, cfg).states.back();
  };

  const StateVec ref = final_state(h / 8.0);
  const double err_h = (final_state(h) - ref).norm();
  const double err_h2 = (final_state(h / 2.0) - ref).norm();
  if (err_h == 0.0 && err_h2 == 0.0) return {0.0, true};
  if (err_h2 == 0.0) return {std::numeric_limits<double>::infinity(), false};
  return {std::log2(err_h / err_h2), false};
}

}  // namespace rrsim
