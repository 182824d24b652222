#include "rrsim/dynamics.hpp"

#include "rrsim/lqr.hpp"
#include "rrsim/systems.hpp"

#include <doctest.h>

using namespace rrsim;

namespace {

// d = 1 system: f(x) = -x, one channel g = 1, u(x) = -x
ControlAffineSystem scalar_system() {
  ControlAffineSystem sys;
  sys.d = 1;
  sys.m = 1;
  sys.drift = [](const StateVec& x, StateVec& out) { out(0) = -x(0); };
  sys.channels.push_back([](const StateVec&, StateVec& out) { out(0) = 1.0; });
  sys.feedback = [](const StateVec& x, Eigen::VectorXd& out) { out(0) = -x(0); };
  return sys;
}

// d = 1, m = 2 toy: f = 0, g1 = g2 = 1, u1(x) = u2(x) = -x
ControlAffineSystem two_channel_toy() {
  ControlAffineSystem sys;
  sys.d = 1;
  sys.m = 2;
  sys.drift = [](const StateVec&, StateVec& out) { out(0) = 0.0; };
  for (int k = 0; k < 2; ++k)
    sys.channels.push_back([](const StateVec&, StateVec& out) { out(0) = 1.0; });
  sys.feedback = [](const StateVec& x, Eigen::VectorXd& out) {
    out(0) = -x(0);
    out(1) = -x(0);
  };
  return sys;
}

ControlAffineSystem coupled_preset_system() {
  CartPendulumMassSpringParams p;
  const GainMatrix gain = synthesize_gain(coupled_linear_A(p), coupled_linear_B(p),
                                          default_coupled_Q(), default_coupled_R());
  return build_linear_system(p, gain);
}

}  // namespace

TEST_CASE("nominal closed-loop field") {
  const auto sys = scalar_system();
  StateVec x(1);

  x << 0.0;
  CHECK(eval_nominal_rhs(sys, x)(0) == 0.0);

  x << 2.0;
  CHECK(eval_nominal_rhs(sys, x)(0) == doctest::Approx(-4.0).epsilon(1e-14));

  const auto coupled = coupled_preset_system();
  CHECK(eval_nominal_rhs(coupled, StateVec::Zero(6)).norm() == 0.0);

  StateVec bad(3);
  CHECK_THROWS_AS(eval_nominal_rhs(sys, bad), ConfigError);
}

TEST_CASE("switched closed-loop field with frozen dwell index") {
  const auto sys = two_channel_toy();
  const Schedule sched = ConstantSchedule(0.5, 2, 0.0);
  StateVec x(1);

  x << 0.0;
  CHECK(eval_switched_rhs(sys, x, 3.7, sched, true)(0) == 0.0);

  x << 1.0;
  CHECK(eval_switched_rhs(sys, x, 0.2, sched, true)(0) == doctest::Approx(-2.0));
  CHECK(eval_switched_rhs(sys, x, 0.2, sched, false)(0) == doctest::Approx(-1.0));

  CHECK_THROWS_AS(eval_switched_rhs(sys, x, -1.0, sched, true), std::domain_error);
}

TEST_CASE("switched field equals nominal plus the single-channel correction") {
  const auto sys = coupled_preset_system();
  const Schedule sched = ConstantSchedule(0.5, 2, 0.0);
  SplitMix64 rng(11);
  StateVec g(6);
  Eigen::VectorXd u(2);
  for (int trial = 0; trial < 20; ++trial) {
    StateVec x(6);
    for (int i = 0; i < 6; ++i) x(i) = 2.0 * rng.uniform_pm1();
    const double t = 5.0 * rng.uniform01();
    const int k = active_index(sched, t);

    const StateVec lhs = eval_switched_rhs(sys, x, t, sched, true);
    StateVec rhs = eval_nominal_rhs(sys, x);
    sys.feedback(x, u);
    sys.channels[static_cast<std::size_t>(k - 1)](x, g);
    rhs += static_cast<double>(sys.m) * u(k - 1) * g;  // add m * g_k u_k ...
    for (int j = 0; j < sys.m; ++j) {                  // ... and remove sum_j g_j u_j
      sys.channels[static_cast<std::size_t>(j)](x, g);
      rhs -= u(j) * g;
    }
    CHECK((lhs - rhs).norm() <= 1e-12 * std::max(1.0, rhs.norm()));
  }
}

TEST_CASE("cycle average of the m-scaled switched field equals the nominal field") {
  const auto sys = coupled_preset_system();
  const double tau = 0.5;
  const Schedule sched = ConstantSchedule(tau, 2, 0.0);
  SplitMix64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    StateVec x(6);
    for (int i = 0; i < 6; ++i) x(i) = 2.0 * rng.uniform_pm1();
    // piecewise-constant in t at frozen x: exact quadrature = sum over the m
    // dwell intervals, each of length tau, divided by the cycle length
    StateVec avg = StateVec::Zero(6);
    for (int k = 0; k < 2; ++k)
      avg += tau * eval_switched_rhs(sys, x, tau * k + 0.1, sched, true);
    avg /= 2.0 * tau;
    const StateVec nominal = eval_nominal_rhs(sys, x);
    CHECK((avg - nominal).norm() <= 1e-12 * std::max(1.0, nominal.norm()));
  }
}

TEST_CASE("switched field preserves the equilibrium at zero") {
  const auto sys = coupled_preset_system();
  const Schedule sched = ConstantSchedule(0.5, 2, 0.0);
  for (double t : {0.0, 0.3, 0.5, 1.7, 42.0})
    CHECK(eval_switched_rhs(sys, StateVec::Zero(6), t, sched, true).norm() == 0.0);
}

TEST_CASE("premise validation") {
  CHECK(validate_premise(coupled_preset_system()).empty());

  SpacecraftParams sp;
  CHECK(validate_premise(build_spacecraft_system(sp)).empty());

  // constructed violation: drift does not vanish at the origin
  ControlAffineSystem bad = scalar_system();
  bad.drift = [](const StateVec& x, StateVec& out) { out(0) = 0.1 - x(0); };
  const auto violations = validate_premise(bad);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0] == PremiseViolation::EquilibriumAtZero);

  // constructed violation: non-Lipschitz field (square root at 0)
  ControlAffineSystem rough = scalar_system();
  rough.drift = [](const StateVec& x, StateVec& out) {
    out(0) = std::sqrt(std::abs(x(0)));
  };
  bool has_lipschitz = false;
  for (auto v : validate_premise(rough))
    if (v == PremiseViolation::LocalLipschitz) has_lipschitz = true;
  CHECK(has_lipschitz);
}
