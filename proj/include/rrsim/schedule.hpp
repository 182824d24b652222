#pragma once

#include "rrsim/types.hpp"

#include <json.hpp>

#include <variant>
#include <vector>

namespace rrsim {

/// Relative tolerance used to snap times sitting just below a switch instant
/// onto the instant itself, so that integration steps landing within one snap
/// of a boundary adopt the post-switch index deterministically.
inline constexpr double kSwitchSnapRel = 1e-12;

/// Round-robin schedule with constant dwell time tau per channel:
/// the active index cycles 1,2,...,m with period m*tau, starting at t0.
struct ConstantSchedule {
  double tau;
  int m;
  double t0;

  ConstantSchedule(double tau_, int m_, double t0_ = 0.0) : tau(tau_), m(m_), t0(t0_) {
    if (!(tau > 0.0)) throw ConfigError("ConstantSchedule: tau must be > 0");
    if (m < 1) throw ConfigError("ConstantSchedule: m must be >= 1");
  }
};

/// Piecewise-constant, non-increasing dwell-time function held constant on
/// consecutive segments of equal length. Beyond the last segment the final
/// dwell time persists indefinitely.
class PiecewiseSchedule {
 public:
  PiecewiseSchedule(std::vector<double> taus, double segment_length, int m, double t0 = 0.0);

  double segment_length() const { return segment_length_; }
  int channel_count() const { return m_; }
  double start_time() const { return t0_; }
  const std::vector<double>& taus() const { return taus_; }

  /// Dwell time in effect at absolute time t (right-continuous at boundaries).
  double tau_at(double t) const;

 private:
  std::vector<double> taus_;
  double segment_length_;
  int m_;
  double t0_;
};

/// Active channel index in 1..m at time t (requires t >= t0 up to snap).
int active_index(const ConstantSchedule& s, double t);
int active_index(const PiecewiseSchedule& s, double t);

/// Smallest t' > t at which the active index changes or a segment boundary occurs.
double next_switch_time(const ConstantSchedule& s, double t);
double next_switch_time(const PiecewiseSchedule& s, double t);

/// True iff a's dwell time is <= b's at every time (uniformly faster switching).
/// Requires identical t0 and channel count.
bool dominates(const PiecewiseSchedule& a, const PiecewiseSchedule& b);

using Schedule = std::variant<ConstantSchedule, PiecewiseSchedule>;

int active_index(const Schedule& s, double t);
double next_switch_time(const Schedule& s, double t);
int channel_count(const Schedule& s);
double start_time(const Schedule& s);
double tau_at(const Schedule& s, double t);

/// JSON wire format: {"type":"constant","tau":0.5} or
/// {"type":"piecewise","segment_length":5.0,"taus":[0.1,0.01,...]}.
nlohmann::json schedule_to_json(const Schedule& s);
Schedule schedule_from_json(const nlohmann::json& j, int m, double t0);

}  // namespace rrsim
