#include "rrsim/integrator.hpp"

#include "rrsim/io.hpp"
#include "rrsim/lqr.hpp"
#include "rrsim/systems.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace rrsim;

namespace {

const ChannelRhs kDecay = [](double, const StateVec& x, int, StateVec& dx) { dx = -x; };

}  // namespace

TEST_CASE("RK4 against the analytic exponential") {
  StateVec x0(1);
  x0 << 1.0;
  const Trajectory t = integrate(kDecay, x0, 0.0, IntegratorConfig{0.01, 1.0, 1});
  CHECK(t.times.back() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(t.states.back()(0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
  CHECK(t.size() == 101);
}

TEST_CASE("zero field keeps the state constant") {
  const ChannelRhs zero = [](double, const StateVec&, int, StateVec& dx) { dx.setZero(); };
  StateVec x0(3);
  x0 << 1.0, -2.0, 0.5;
  const Trajectory t = integrate(zero, x0, 0.0, IntegratorConfig{0.1, 2.0, 1});
  for (const auto& s : t.states) CHECK(s == x0);
}

TEST_CASE("linear closed loop matches the matrix-exponential oracle") {
  CartPendulumMassSpringParams p;
  const GainMatrix gain = synthesize_gain(coupled_linear_A(p), coupled_linear_B(p),
                                          default_coupled_Q(), default_coupled_R());
  const ControlAffineSystem sys = build_linear_system(p, gain);
  const Eigen::MatrixXd Acl = coupled_linear_A(p) - coupled_linear_B(p) * gain.K;

  const Trajectory t = integrate_closed_loop(sys, ClosedLoopMode::nominal(), p.x0, 0.0,
                                             IntegratorConfig{0.05, 1.0, 1});
  const Eigen::VectorXd expected = oracles::taylor_expm(Acl) * p.x0;
  for (int i = 0; i < 6; ++i)
    CHECK(std::abs(t.states.back()(i) - expected(i)) < 1e-6);
}

TEST_CASE("convergence order estimates") {
  StateVec x0(1);
  x0 << 1.0;
  const OrderEstimate e1 = convergence_order(kDecay, x0, 0.0, 1.0);
  CHECK_FALSE(e1.exact);
  CHECK(e1.order > 3.8);
  CHECK(e1.order < 4.2);

  const ChannelRhs zero = [](double, const StateVec&, int, StateVec& dx) { dx.setZero(); };
  CHECK(convergence_order(zero, x0, 0.0, 1.0).exact);

  SpacecraftParams sp;
  const ControlAffineSystem sc = build_spacecraft_system(sp);
  // projection-free field for the order study: plain nominal closed loop
  const ChannelRhs rhs = make_closed_loop_rhs(sc, 1.0);
  StateVec y0 = shift_spacecraft_state(
      sp, (Eigen::VectorXd(7) << sp.q0_init, sp.qv_init, sp.omega_init).finished());
  const OrderEstimate e2 = convergence_order(rhs, y0, 0.0, 20.0);
  CHECK(e2.order > 3.5);
  CHECK(e2.order < 4.2);
}

TEST_CASE("no RK4 stage straddles a switch instant") {
  // dwell 0.3 deliberately not commensurate with the base step 0.2
  CartPendulumMassSpringParams p;
  const GainMatrix gain = synthesize_gain(coupled_linear_A(p), coupled_linear_B(p),
                                          default_coupled_Q(), default_coupled_R());
  const ControlAffineSystem sys = build_linear_system(p, gain);
  const Schedule sched = ConstantSchedule(0.3, 2, 0.0);

  std::vector<StepRecord> steps;
  integrate_closed_loop(sys, ClosedLoopMode::sparse(sched), p.x0, 0.0,
                        IntegratorConfig{0.2, 6.0, 1}, &steps);
  REQUIRE_FALSE(steps.empty());
  double prev_end = 0.0;
  for (const auto& s : steps) {
    CHECK(s.begin == doctest::Approx(prev_end).epsilon(1e-13));
    CHECK(s.end > s.begin);
    CHECK(s.channel == active_index(sched, s.begin));
    // the channel is constant on [begin, end)
    for (double f : {0.25, 0.5, 0.75, 0.999}) {
      const double t = s.begin + f * (s.end - s.begin);
      if (t < s.end) CHECK(active_index(sched, t) == s.channel);
    }
    // and no switch instant lies strictly inside the step
    CHECK(next_switch_time(sched, s.begin) >= s.end - 1e-12);
    prev_end = s.end;
  }
}

TEST_CASE("halving the step shrinks the smooth-run error like h^4") {
  StateVec x0(2);
  x0 << 1.0, -0.5;
  const ChannelRhs field = [](double, const StateVec& x, int, StateVec& dx) {
    dx(0) = x(1);
    dx(1) = -std::sin(x(0)) - 0.2 * x(1);
  };
  auto final_at = [&](double h) {
    return integrate(field, x0, 0.0, IntegratorConfig{h, 4.0, 1}).states.back();
  };
  const StateVec ref = final_at(1.0 / 512.0);
  const double e1 = (final_at(1.0 / 16.0) - ref).norm();
  const double e2 = (final_at(1.0 / 32.0) - ref).norm();
  const double ratio = e1 / e2;
  CHECK(ratio > 12.0);
  CHECK(ratio < 20.0);
}

TEST_CASE("recorded times come from index arithmetic, not accumulation") {
  StateVec x0(1);
  x0 << 1.0;
  const double h = 0.1;
  const Trajectory t = integrate(kDecay, x0, 0.0, IntegratorConfig{h, 1000.0, 1});
  double worst = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i)
    worst = std::max(worst, std::abs(t.times[i] - static_cast<double>(i) * h));
  CHECK(worst < 1e-9 * 1000.0);
}

TEST_CASE("blowup truncates and flags the trajectory") {
  // xdot = x^2 from x(0) = 2 blows up at t = 0.5
  const ChannelRhs quad = [](double, const StateVec& x, int, StateVec& dx) {
    dx(0) = x(0) * x(0);
  };
  StateVec x0(1);
  x0 << 2.0;
  const Trajectory t = integrate(quad, x0, 0.0, IntegratorConfig{0.001, 1.0, 1});
  CHECK(t.blowup);
  CHECK(t.blowup_time < 0.6);
  CHECK(std::isfinite(t.states.back()(0)));
  CHECK(t.times.back() == doctest::Approx(t.blowup_time));
}

TEST_CASE("record stride keeps every k-th step plus the final point") {
  StateVec x0(1);
  x0 << 1.0;
  const Trajectory t = integrate(kDecay, x0, 0.0, IntegratorConfig{0.01, 1.0, 10});
  CHECK(t.size() == 11);
  CHECK(t.times.back() == doctest::Approx(1.0));
  CHECK(t.times[1] == doctest::Approx(0.1));
}

TEST_CASE("trajectory CSV round-trips exactly") {
  CartPendulumMassSpringParams p;
  const GainMatrix gain = synthesize_gain(coupled_linear_A(p), coupled_linear_B(p),
                                          default_coupled_Q(), default_coupled_R());
  const ControlAffineSystem sys = build_linear_system(p, gain);
  const Schedule sched = ConstantSchedule(0.5, 2, 0.0);
  const Trajectory t = integrate_closed_loop(sys, ClosedLoopMode::sparse(sched), p.x0, 0.0,
                                             IntegratorConfig{0.05, 2.0, 1});

  const auto path = std::filesystem::temp_directory_path() / "rrsim_roundtrip.csv";
  write_trajectory_csv(path, t);
  const Trajectory back = read_trajectory_csv(path);
  std::filesystem::remove(path);

  REQUIRE(back.size() == t.size());
  REQUIRE(back.dim() == t.dim());
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(back.times[i] == t.times[i]);
    CHECK(back.states[i] == t.states[i]);
    CHECK(back.active[i] == t.active[i]);
  }
}

TEST_CASE("integrator config validation") {
  StateVec x0(1);
  x0 << 1.0;
  CHECK_THROWS_AS(integrate(kDecay, x0, 0.0, IntegratorConfig{0.0, 1.0, 1}), ConfigError);
  CHECK_THROWS_AS(integrate(kDecay, x0, 0.0, IntegratorConfig{2.0, 1.0, 1}), ConfigError);
  CHECK_THROWS_AS(integrate(kDecay, x0, 0.0, IntegratorConfig{0.1, 1.0, 0}), ConfigError);
}
