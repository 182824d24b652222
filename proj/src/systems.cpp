#include "rrsim/systems.hpp"

#include <cmath>

namespace rrsim {

Eigen::VectorXd CartPendulumMassSpringParams::default_x0() {
  Eigen::VectorXd x0(6);
  x0 << 0.0, M_PI / 10.0, 0.0, 0.0, 1.0, 1.05;
  return x0;
}

void CartPendulumMassSpringParams::validate() const {
  if (!(cart_mass > 0.0 && pendulum_mass > 0.0 && pendulum_length > 0.0 && gravity > 0.0))
    throw ConfigError("coupled plant: masses, length and gravity must be > 0");
  if (x0.size() != 6) throw ConfigError("coupled plant: x0 must have 6 entries");
}

Eigen::MatrixXd coupled_linear_A(const CartPendulumMassSpringParams& p) {
  p.validate();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(6, 6);
  A(0, 1) = 1.0;
  A(1, 2) = -p.pendulum_mass * p.gravity / p.cart_mass;
  A(2, 3) = 1.0;
  A(3, 2) = (p.pendulum_mass + p.cart_mass) * p.gravity / (p.pendulum_length * p.cart_mass);
  A(4, 5) = 1.0;
  A(5, 4) = -1.0;
  return A;
}

Eigen::MatrixXd coupled_linear_B(const CartPendulumMassSpringParams& p) {
  p.validate();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(6, 2);
  B(1, 0) = 1.0 / p.cart_mass;
  B(1, 1) = 0.1;
  B(3, 0) = -1.0 / (p.pendulum_length * p.cart_mass);
  B(3, 1) = 0.1;
  B(5, 0) = 0.1;
  B(5, 1) = 1.0;
  return B;
}

Eigen::MatrixXd default_coupled_Q() {
  return Eigen::Vector<double, 6>(30.0, 1.0, 30.0, 1.0, 0.3, 0.3).asDiagonal();
}

Eigen::MatrixXd default_coupled_R() {
  return Eigen::Vector2d(1.0, 0.01).asDiagonal();
}

ControlAffineSystem build_linear_system(const CartPendulumMassSpringParams& p,
                                        const GainMatrix& gain) {
  if (!(gain.hurwitz_margin > 0.0))
    throw ConfigError("build_linear_system: gain lacks a Hurwitz certificate");
  if (gain.K.rows() != 2 || gain.K.cols() != 6)
    throw ConfigError("build_linear_system: gain must be 2x6");

  const Eigen::MatrixXd A = coupled_linear_A(p);
  const Eigen::MatrixXd B = coupled_linear_B(p);
  const Eigen::MatrixXd K = gain.K;
  const Eigen::MatrixXd Acl = A - B * K;

  ControlAffineSystem sys;
  sys.d = 6;
  sys.m = 2;
  sys.name = "coupled-linear";
  sys.drift = [A](const StateVec& x, StateVec& out) { out.noalias() = A * x; };
  for (int k = 0; k < 2; ++k) {
    const Eigen::VectorXd col = B.col(k);
    sys.channels.push_back([col](const StateVec&, StateVec& out) { out = col; });
  }
  sys.feedback = [K](const StateVec& x, Eigen::VectorXd& out) { out.noalias() = -K * x; };
  sys.nominal_jacobian = [Acl](const StateVec&) { return Acl; };
  return sys;
}

void SpacecraftParams::validate() const {
  const double qn2 = q0_init * q0_init + qv_init.squaredNorm();
  if (std::abs(qn2 - 1.0) > 1e-12)
    throw ConfigError("spacecraft: initial quaternion must have unit norm");
  if ((inertia - inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw ConfigError("spacecraft: inertia must be symmetric");
  Eigen::LLT<Eigen::Matrix3d> llt(inertia);
  if (llt.info() != Eigen::Success)
    throw ConfigError("spacecraft: inertia must be positive definite");
}

Eigen::VectorXd spacecraft_rhs(const SpacecraftParams& p, const Eigen::VectorXd& state,
                               const Eigen::Vector3d& torque) {
  if (state.size() != 7) throw ConfigError("spacecraft_rhs: state must have 7 entries");
  const double q0 = state(0);
  const Eigen::Vector3d qv = state.segment<3>(1);
  const Eigen::Vector3d w = state.segment<3>(4);

  Eigen::VectorXd dx(7);
  dx(0) = -0.5 * qv.dot(w);
  dx.segment<3>(1) = 0.5 * (q0 * w + qv.cross(w));
  dx.segment<3>(4) = p.inertia.ldlt().solve(-w.cross(p.inertia * w) + torque);
  return dx;
}

Eigen::Vector3d spacecraft_controller(const SpacecraftParams& p, const Eigen::VectorXd& state) {
  if (state.size() != 7) throw ConfigError("spacecraft_controller: state must have 7 entries");
  const Eigen::Vector3d qv = state.segment<3>(1);
  const Eigen::Vector3d w = state.segment<3>(4);
  const Eigen::Vector3d w_target(p.omega_bar, 0.0, 0.0);
  return -p.k1 * qv - p.k2 * (w - w_target);
}

Eigen::VectorXd renormalize_quaternion(const Eigen::VectorXd& state) {
  if (state.size() != 7) throw ConfigError("renormalize_quaternion: state must have 7 entries");
  const double n = state.head<4>().norm();
  if (n < 1e-6) throw IntegrityError("quaternion norm collapsed");
  Eigen::VectorXd out = state;
  out.head<4>() /= n;
  return out;
}

Eigen::VectorXd shift_spacecraft_state(const SpacecraftParams& p, const Eigen::VectorXd& state) {
  Eigen::VectorXd x = state;
  x(0) -= 1.0;
  x(4) -= p.omega_bar;
  return x;
}

Eigen::VectorXd unshift_spacecraft_state(const SpacecraftParams& p, const Eigen::VectorXd& x) {
  Eigen::VectorXd state = x;
  state(0) += 1.0;
  state(4) += p.omega_bar;
  return state;
}

ControlAffineSystem build_spacecraft_system(const SpacecraftParams& p) {
  p.validate();
  const Eigen::Matrix3d Jinv = p.inertia.inverse();
  const double wbar = p.omega_bar;
  const double k1 = p.k1;
  const double k2 = p.k2;
  const Eigen::Matrix3d J = p.inertia;

  ControlAffineSystem sys;
  sys.d = 7;
  sys.m = 3;
  sys.name = "spacecraft";

  sys.drift = [J, Jinv, wbar](const StateVec& x, StateVec& out) {
    const double q0 = x(0) + 1.0;
    const double qv1 = x(1), qv2 = x(2), qv3 = x(3);
    const double w1 = x(4) + wbar, w2 = x(5), w3 = x(6);
    out(0) = -0.5 * (qv1 * w1 + qv2 * w2 + qv3 * w3);
    out(1) = 0.5 * (q0 * w1 + qv2 * w3 - qv3 * w2);
    out(2) = 0.5 * (q0 * w2 + qv3 * w1 - qv1 * w3);
    out(3) = 0.5 * (q0 * w3 + qv1 * w2 - qv2 * w1);
    const double h1 = J(0, 0) * w1 + J(0, 1) * w2 + J(0, 2) * w3;
    const double h2 = J(1, 0) * w1 + J(1, 1) * w2 + J(1, 2) * w3;
    const double h3 = J(2, 0) * w1 + J(2, 1) * w2 + J(2, 2) * w3;
    const double c1 = -(w2 * h3 - w3 * h2);
    const double c2 = -(w3 * h1 - w1 * h3);
    const double c3 = -(w1 * h2 - w2 * h1);
    out(4) = Jinv(0, 0) * c1 + Jinv(0, 1) * c2 + Jinv(0, 2) * c3;
    out(5) = Jinv(1, 0) * c1 + Jinv(1, 1) * c2 + Jinv(1, 2) * c3;
    out(6) = Jinv(2, 0) * c1 + Jinv(2, 1) * c2 + Jinv(2, 2) * c3;
  };

  for (int k = 0; k < 3; ++k) {
    Eigen::VectorXd col = Eigen::VectorXd::Zero(7);
    col.segment<3>(4) = Jinv.col(k);
    sys.channels.push_back([col](const StateVec&, StateVec& out) { out = col; });
  }

  sys.feedback = [k1, k2](const StateVec& x, Eigen::VectorXd& out) {
    out(0) = -k1 * x(1) - k2 * x(4);
    out(1) = -k1 * x(2) - k2 * x(5);
    out(2) = -k1 * x(3) - k2 * x(6);
  };

  sys.post_step_projection = [](StateVec& x) {
    const double q0 = x(0) + 1.0;
    const double n = std::sqrt(q0 * q0 + x(1) * x(1) + x(2) * x(2) + x(3) * x(3));
    if (n < 1e-6) throw IntegrityError("quaternion norm collapsed");
    x(0) = q0 / n - 1.0;
    x(1) /= n;
    x(2) /= n;
    x(3) /= n;
  };

  return sys;
}

double rotational_kinetic_energy(const SpacecraftParams& p, const Eigen::Vector3d& omega) {
  return 0.5 * omega.dot(p.inertia * omega);
}

}  // namespace rrsim
