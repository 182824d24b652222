#include "rrsim/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace rrsim {

namespace {

// Elapsed time since t0 with the snap applied; throws if t lies more than one
// snap before t0. The snap is floored at a few ulps of the elapsed time itself
// so that boundary adoption stays deterministic when t >> tau and the relative
// term under-resolves double spacing.
double snapped_elapsed(double t, double t0, double snap_scale) {
  const double s = t - t0;
  const double snap = kSwitchSnapRel * snap_scale +
                      4.0 * std::numeric_limits<double>::epsilon() * std::abs(s);
  if (s < -snap) throw std::domain_error("schedule queried before its start time");
  return std::max(s, 0.0) + snap;
}

// 1 + floor((s - m*tau*floor(s/(m*tau))) / tau) for snapped elapsed time s.
int round_robin_index(double s, double tau, int m) {
  const double cycle = static_cast<double>(m) * tau;
  const double r = std::fmod(s, cycle);
  int idx = 1 + static_cast<int>(r / tau);
  return std::min(idx, m);  // guards the floor against roundoff at the last sub-interval
}

}  // namespace

PiecewiseSchedule::PiecewiseSchedule(std::vector<double> taus, double segment_length, int m,
                                     double t0)
    : taus_(std::move(taus)), segment_length_(segment_length), m_(m), t0_(t0) {
  if (taus_.empty()) throw ConfigError("PiecewiseSchedule: needs at least one segment");
  if (!(segment_length_ > 0.0)) throw ConfigError("PiecewiseSchedule: segment length must be > 0");
  if (m_ < 1) throw ConfigError("PiecewiseSchedule: m must be >= 1");
  for (std::size_t i = 0; i < taus_.size(); ++i) {
    if (!(taus_[i] > 0.0)) throw ConfigError("PiecewiseSchedule: dwell times must be > 0");
    if (i > 0 && taus_[i] > taus_[i - 1])
      throw ConfigError("PiecewiseSchedule: dwell times must be non-increasing");
  }
}

double PiecewiseSchedule::tau_at(double t) const {
  const double s = snapped_elapsed(t, t0_, segment_length_);
  auto seg = static_cast<long>(s / segment_length_);
  seg = std::clamp<long>(seg, 0, static_cast<long>(taus_.size()) - 1);
  return taus_[static_cast<std::size_t>(seg)];
}

int active_index(const ConstantSchedule& s, double t) {
  const double cycle = static_cast<double>(s.m) * s.tau;
  return round_robin_index(snapped_elapsed(t, s.t0, cycle), s.tau, s.m);
}

int active_index(const PiecewiseSchedule& s, double t) {
  const double tau = s.tau_at(t);
  const double cycle = static_cast<double>(s.channel_count()) * tau;
  return round_robin_index(snapped_elapsed(t, s.start_time(), cycle), tau, s.channel_count());
}

double next_switch_time(const ConstantSchedule& s, double t) {
  const double cycle = static_cast<double>(s.m) * s.tau;
  const double se = snapped_elapsed(t, s.t0, cycle);
  const double k = std::floor(se / s.tau);
  return s.t0 + (k + 1.0) * s.tau;
}

double next_switch_time(const PiecewiseSchedule& s, double t) {
  const double tau = s.tau_at(t);
  const double cycle = static_cast<double>(s.channel_count()) * tau;
  const double se = snapped_elapsed(t, s.start_time(), cycle);
  const double k = std::floor(se / tau);
  double cand = s.start_time() + (k + 1.0) * tau;

  // A segment boundary also ends the current step even if the index would not
  // change there: the dwell time itself changes.
  const double seg_se = snapped_elapsed(t, s.start_time(), s.segment_length());
  const auto seg = static_cast<long>(seg_se / s.segment_length());
  if (seg + 1 < static_cast<long>(s.taus().size())) {
    const double boundary = s.start_time() + static_cast<double>(seg + 1) * s.segment_length();
    cand = std::min(cand, boundary);
  }
  return cand;
}

bool dominates(const PiecewiseSchedule& a, const PiecewiseSchedule& b) {
  if (a.start_time() != b.start_time() || a.channel_count() != b.channel_count())
    throw ConfigError("dominates: schedules must share t0 and channel count");

  // Both dwell functions are right-continuous step functions, so comparing at
  // the union of their breakpoints (plus one point beyond the last) suffices.
  std::set<double> probes{0.0};
  for (std::size_t i = 1; i <= a.taus().size(); ++i)
    probes.insert(static_cast<double>(i) * a.segment_length());
  for (std::size_t i = 1; i <= b.taus().size(); ++i)
    probes.insert(static_cast<double>(i) * b.segment_length());
  for (double p : probes) {
    const double t = a.start_time() + p;
    if (a.tau_at(t) > b.tau_at(t)) return false;
  }
  return true;
}

int active_index(const Schedule& s, double t) {
  return std::visit([t](const auto& sch) { return active_index(sch, t); }, s);
}

double next_switch_time(const Schedule& s, double t) {
  return std::visit([t](const auto& sch) { return next_switch_time(sch, t); }, s);
}

int channel_count(const Schedule& s) {
  return std::visit(
      [](const auto& sch) {
        if constexpr (std::is_same_v<std::decay_t<decltype(sch)>, ConstantSchedule>)
          return sch.m;
        else
          return sch.channel_count();
      },
      s);
}

double start_time(const Schedule& s) {
  return std::visit(
      [](const auto& sch) {
        if constexpr (std::is_same_v<std::decay_t<decltype(sch)>, ConstantSchedule>)
          return sch.t0;
        else
          return sch.start_time();
      },
      s);
}

double tau_at(const Schedule& s, double t) {
  return std::visit(
      [t](const auto& sch) {
        if constexpr (std::is_same_v<std::decay_t<decltype(sch)>, ConstantSchedule>)
          return sch.tau;
        else
          return sch.tau_at(t);
      },
      s);
}

nlohmann::json schedule_to_json(const Schedule& s) {
  nlohmann::json j;
  if (const auto* c = std::get_if<ConstantSchedule>(&s)) {
    j["type"] = "constant";
    j["tau"] = c->tau;
  } else {
    const auto& p = std::get<PiecewiseSchedule>(s);
    j["type"] = "piecewise";
    j["segment_length"] = p.segment_length();
    j["taus"] = p.taus();
  }
  return j;
}

Schedule schedule_from_json(const nlohmann::json& j, int m, double t0) {
  if (!j.is_object() || !j.contains("type"))
    throw ConfigError("schedule: expected an object with a \"type\" field");
  const std::string type = j.at("type").get<std::string>();
  if (type == "constant") {
    for (const auto& [key, _] : j.items())
      if (key != "type" && key != "tau") throw ConfigError("schedule: unknown field \"" + key + "\"");
    return ConstantSchedule(j.at("tau").get<double>(), m, t0);
  }
  if (type == "piecewise") {
    for (const auto& [key, _] : j.items())
      if (key != "type" && key != "segment_length" && key != "taus")
        throw ConfigError("schedule: unknown field \"" + key + "\"");
    return PiecewiseSchedule(j.at("taus").get<std::vector<double>>(),
                             j.at("segment_length").get<double>(), m, t0);
  }
  throw ConfigError("schedule: unknown type \"" + type + "\"");
}

}  // namespace rrsim
