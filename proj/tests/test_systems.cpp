#include "rrsim/systems.hpp"

#include "rrsim/analysis.hpp"
#include "rrsim/integrator.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace rrsim;

TEST_CASE("coupled plant matrices carry the printed entries") {
  CartPendulumMassSpringParams p;
  const Eigen::MatrixXd A = coupled_linear_A(p);
  const Eigen::MatrixXd B = coupled_linear_B(p);

  CHECK(A(1, 2) == doctest::Approx(-0.8175).epsilon(1e-14));  // -m g / M
  CHECK(A(3, 2) == doctest::Approx(3.25 * 9.81 / 3.0).epsilon(1e-14));  // (m+M) g / (L M), L = 1
  CHECK(A(0, 1) == 1.0);
  CHECK(A(2, 3) == 1.0);
  CHECK(A(4, 5) == 1.0);
  CHECK(A(5, 4) == -1.0);

  CHECK(B(5, 1) == 1.0);
  CHECK(B(5, 0) == 0.1);
  CHECK(B(1, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(B(1, 1) == 0.1);
  CHECK(B(3, 0) == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));
  CHECK(B(3, 1) == 0.1);

  CHECK(p.x0(1) == doctest::Approx(M_PI / 10.0));
  CHECK(p.x0(4) == 1.0);
  CHECK(p.x0(5) == 1.05);
}

TEST_CASE("build_linear_system wires drift, channels and feedback") {
  CartPendulumMassSpringParams p;
  const GainMatrix gain = synthesize_gain(coupled_linear_A(p), coupled_linear_B(p),
                                          default_coupled_Q(), default_coupled_R());
  const ControlAffineSystem sys = build_linear_system(p, gain);
  CHECK(sys.d == 6);
  CHECK(sys.m == 2);

  SplitMix64 rng(5);
  StateVec x(6), g(6);
  Eigen::VectorXd u(2);
  for (int i = 0; i < 6; ++i) x(i) = rng.uniform_pm1();
  const StateVec dx = eval_nominal_rhs(sys, x);
  const Eigen::VectorXd expected =
      (coupled_linear_A(p) - coupled_linear_B(p) * gain.K) * x;
  CHECK((dx - expected).norm() <= 1e-13 * expected.norm());

  sys.channels[1](x, g);
  CHECK(g == coupled_linear_B(p).col(1));

  GainMatrix uncertified = gain;
  uncertified.hurwitz_margin = 0.0;
  CHECK_THROWS_AS(build_linear_system(p, uncertified), ConfigError);
}

TEST_CASE("spacecraft open-loop field: hand-checked values") {
  SpacecraftParams p;
  Eigen::VectorXd eq(7);
  eq << 1, 0, 0, 0, 0, 0, 0;
  CHECK(spacecraft_rhs(p, eq, Eigen::Vector3d::Zero()).norm() == 0.0);

  Eigen::VectorXd s(7);
  s << 1, 0, 0, 0, 0.01, 0.05, 0.03;
  const Eigen::VectorXd dx = spacecraft_rhs(p, s, Eigen::Vector3d::Zero());
  // J w = (1, 3.5, 4.5), w x Jw = (0.12, -0.015, -0.015)
  CHECK(dx(4) == doctest::Approx(-0.0012).epsilon(1e-12));
  CHECK(dx(5) == doctest::Approx(0.015 / 70.0).epsilon(1e-12));
  CHECK(dx(6) == doctest::Approx(0.0001).epsilon(1e-12));
  // kinematics at qv = 0: q0dot = 0, qvdot = w / 2
  CHECK(dx(0) == 0.0);
  CHECK(dx(1) == doctest::Approx(0.005).epsilon(1e-14));
  CHECK(dx(2) == doctest::Approx(0.025).epsilon(1e-14));
  CHECK(dx(3) == doctest::Approx(0.015).epsilon(1e-14));
}

TEST_CASE("spacecraft feedback torque") {
  SpacecraftParams p;
  Eigen::VectorXd s(7);
  s << 1, 0, 0, 0, 0, 0, 0;
  CHECK(spacecraft_controller(p, s).norm() == 0.0);

  s << 1, 0.1, 0, 0, 0.2, 0, 0;
  // unit-norm violations don't matter for the controller itself
  const Eigen::Vector3d u = spacecraft_controller(p, s);
  CHECK(u(0) == doctest::Approx(-0.07).epsilon(1e-14));
  CHECK(u(1) == 0.0);
  CHECK(u(2) == 0.0);

  SpacecraftParams spin = p;
  spin.omega_bar = 1.0;
  s << 1, 0, 0, 0, 1.0, 0, 0;
  CHECK(spacecraft_controller(spin, s).norm() == 0.0);  // shifted equilibrium
}

TEST_CASE("shifted spacecraft system") {
  SpacecraftParams p;
  const ControlAffineSystem sys = build_spacecraft_system(p);
  CHECK(sys.d == 7);
  CHECK(sys.m == 3);

  CHECK(validate_premise(sys).empty());

  // channel 2 has exactly one nonzero entry 1/J22 = 1/70 in the omega-2 row
  StateVec g(7);
  sys.channels[1](StateVec::Zero(7), g);
  for (int i = 0; i < 7; ++i) {
    if (i == 5)
      CHECK(g(i) == doctest::Approx(1.0 / 70.0).epsilon(1e-15));
    else
      CHECK(g(i) == 0.0);
  }

  Eigen::VectorXd u(3);
  sys.feedback(StateVec::Zero(7), u);
  CHECK(u.norm() == 0.0);

  // for omega_bar = 0 the built feedback equals the torque law on random states
  SplitMix64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd state(7);
    for (int i = 0; i < 7; ++i) state(i) = rng.uniform_pm1();
    const StateVec x = shift_spacecraft_state(p, state);
    sys.feedback(x, u);
    const Eigen::Vector3d expected = spacecraft_controller(p, state);
    CHECK((u - expected).norm() <= 1e-14 * std::max(1.0, expected.norm()));
  }
}

TEST_CASE("with a spin target the quaternion rows keep rotating at the origin") {
  SpacecraftParams p;
  p.omega_bar = 1.0;
  const ControlAffineSystem sys = build_spacecraft_system(p);
  StateVec d0(7);
  sys.drift(StateVec::Zero(7), d0);
  CHECK(d0(1) == doctest::Approx(0.5));  // qv1 row: half the target spin
  CHECK(d0.segment<3>(4).norm() == 0.0); // the angular-velocity rows do vanish
  Eigen::VectorXd u(3);
  sys.feedback(StateVec::Zero(7), u);
  CHECK(u.norm() == 0.0);
}

TEST_CASE("quaternion renormalization") {
  Eigen::VectorXd s(7);
  s << 1, 0, 0, 0, 0.1, 0.2, 0.3;
  CHECK(renormalize_quaternion(s) == s);

  s << 2, 0, 0, 0, 0.1, 0.2, 0.3;
  const Eigen::VectorXd r = renormalize_quaternion(s);
  CHECK(r(0) == 1.0);
  CHECK(r.segment<3>(4) == s.segment<3>(4));

  const double near = 0.999999;
  s << near, 0, 0, 0, 0, 0, 0;
  CHECK(std::abs(renormalize_quaternion(s).head<4>().norm() - 1.0) < 1e-15);

  s << 1e-7, 0, 0, 0, 0, 0, 0;
  CHECK_THROWS_AS(renormalize_quaternion(s), IntegrityError);
}

TEST_CASE("quaternion norm stays within 1e-6 of unity over the full run") {
  SpacecraftParams p;
  const ControlAffineSystem sys = build_spacecraft_system(p);
  const StateVec x0 = shift_spacecraft_state(
      p, (Eigen::VectorXd(7) << p.q0_init, p.qv_init, p.omega_init).finished());
  const Trajectory t = integrate_closed_loop(sys, ClosedLoopMode::nominal(), x0, 0.0,
                                             IntegratorConfig{0.1, 200.0, 1});
  for (const auto& x : t.states) {
    const double q0 = x(0) + 1.0;
    const double qn = std::sqrt(q0 * q0 + x(1) * x(1) + x(2) * x(2) + x(3) * x(3));
    CHECK(std::abs(qn - 1.0) < 1e-6);
  }
}

TEST_CASE("uncontrolled rigid body conserves rotational kinetic energy") {
  SpacecraftParams p;
  const ControlAffineSystem sys = build_spacecraft_system(p);
  const ChannelRhs drift_only = [&sys](double, const StateVec& x, int, StateVec& dx) {
    sys.drift(x, dx);
  };
  StateVec x0 = StateVec::Zero(7);
  x0.segment<3>(4) = p.omega_init;
  const Trajectory t = integrate(drift_only, x0, 0.0, IntegratorConfig{0.1, 200.0, 1});
  const double e0 = rotational_kinetic_energy(p, x0.segment<3>(4));
  double worst = 0.0;
  for (const auto& x : t.states)
    worst = std::max(worst,
                     std::abs(rotational_kinetic_energy(p, x.segment<3>(4)) - e0) / e0);
  CHECK(worst < 1e-8);
}

TEST_CASE("spacecraft parameter validation") {
  SpacecraftParams p;
  p.qv_init = Eigen::Vector3d(0.1, 0, 0);  // breaks unit norm
  CHECK_THROWS_AS(p.validate(), ConfigError);

  SpacecraftParams q;
  q.inertia(0, 1) = 5.0;  // asymmetric
  CHECK_THROWS_AS(q.validate(), ConfigError);

  SpacecraftParams r;
  r.inertia = Eigen::Vector3d(-1.0, 70.0, 150.0).asDiagonal();
  CHECK_THROWS_AS(r.validate(), ConfigError);
}
