#include "rrsim/dynamics.hpp"

#include <cmath>

namespace rrsim {

namespace {

void check_dims(const ControlAffineSystem& sys, const StateVec& x) {
  if (x.size() != sys.d)
    throw ConfigError("state has length " + std::to_string(x.size()) + ", system expects " +
                      std::to_string(sys.d));
  if (static_cast<int>(sys.channels.size()) != sys.m)
    throw ConfigError("system has " + std::to_string(sys.channels.size()) +
                      " channels, expected m = " + std::to_string(sys.m));
}

}  // namespace

StateVec eval_nominal_rhs(const ControlAffineSystem& sys, const StateVec& x) {
  check_dims(sys, x);
  StateVec dx(sys.d), g(sys.d);
  Eigen::VectorXd u(sys.m);
  sys.drift(x, dx);
  sys.feedback(x, u);
  for (int k = 0; k < sys.m; ++k) {
    sys.channels[static_cast<std::size_t>(k)](x, g);
    dx.noalias() += u(k) * g;
  }
  return dx;
}

StateVec eval_switched_rhs(const ControlAffineSystem& sys, const StateVec& x, double t,
                           const Schedule& schedule, bool scaled) {
  check_dims(sys, x);
  if (channel_count(schedule) != sys.m)
    throw ConfigError("schedule channel count does not match the system");
  const int k = active_index(schedule, t);  // throws std::domain_error when t < t0
  const double c = scaled ? static_cast<double>(sys.m) : 1.0;

  StateVec dx(sys.d), g(sys.d);
  Eigen::VectorXd u(sys.m);
  sys.drift(x, dx);
  sys.feedback(x, u);
  sys.channels[static_cast<std::size_t>(k - 1)](x, g);
  dx.noalias() += (c * u(k - 1)) * g;
  return dx;
}

std::vector<PremiseViolation> validate_premise(const ControlAffineSystem& sys) {
  std::vector<PremiseViolation> violated;

  const StateVec zero = StateVec::Zero(sys.d);
  StateVec f0(sys.d);
  Eigen::VectorXd u0(sys.m);
  sys.drift(zero, f0);
  sys.feedback(zero, u0);
  if (f0.lpNorm<Eigen::Infinity>() > kEquilibriumTol ||
      u0.lpNorm<Eigen::Infinity>() > kEquilibriumTol)
    violated.push_back(PremiseViolation::EquilibriumAtZero);

  // Local-Lipschitz probe: max difference quotient of the nominal closed loop
  // over sampled pairs on balls of two radii around 0. A Lipschitz field keeps
  // the quotient bounded as the ball shrinks; a blow-up of the small-ball
  // quotient relative to the large-ball one signals a violation.
  SplitMix64 rng(0x5eed0001u);
  auto max_quotient = [&](double radius) {
    double worst = 0.0;
    for (int trial = 0; trial < 32; ++trial) {
      StateVec a(sys.d), b(sys.d);
      for (int i = 0; i < sys.d; ++i) {
        a(i) = radius * rng.uniform_pm1();
        b(i) = radius * rng.uniform_pm1();
      }
      const double dist = (a - b).norm();
      if (dist < 1e-14 * radius) continue;
      const double diff = (eval_nominal_rhs(sys, a) - eval_nominal_rhs(sys, b)).norm();
      worst = std::max(worst, diff / dist);
    }
    return worst;
  };
  const double q_large = max_quotient(1e-1);
  const double q_small = max_quotient(1e-4);
  if (!std::isfinite(q_large) || !std::isfinite(q_small) ||
      q_small > 1e3 * std::max(q_large, 1e-12))
    violated.push_back(PremiseViolation::LocalLipschitz);

  return violated;
}

std::string to_string(PremiseViolation v) {
  switch (v) {
    case PremiseViolation::EquilibriumAtZero:
      return "equilibrium-at-zero";
    case PremiseViolation::LocalLipschitz:
      return "local-lipschitz";
  }
  return "unknown";
}

}  // namespace rrsim
