#pragma once

#include "rrsim/dynamics.hpp"
#include "rrsim/lqr.hpp"

#include <Eigen/Dense>

namespace rrsim {

// ---------------------------------------------------------------------------
// Coupled plant: linearized inverted pendulum on a cart + mass-spring system,
// cross-coupled through the input matrix. State ordering
// (cart pos, cart vel, pole angle, pole rate, spring pos, spring vel).
// ---------------------------------------------------------------------------

struct CartPendulumMassSpringParams {
  double cart_mass = 3.0;        // kg
  double pendulum_mass = 0.25;   // kg
  double pendulum_length = 1.0;  // m (default chosen here; any positive value keeps the
                                 //    unstable upright structure)
  double gravity = 9.81;         // m/s^2
  double sim_horizon = 50.0;     // s
  double tau = 0.5;              // s
  double step = 0.05;            // s
  Eigen::VectorXd x0 = default_x0();

  static Eigen::VectorXd default_x0();
  void validate() const;
};

Eigen::MatrixXd coupled_linear_A(const CartPendulumMassSpringParams& p);
Eigen::MatrixXd coupled_linear_B(const CartPendulumMassSpringParams& p);

/// Default LQR weights for the coupled plant. Chosen so that the m-scaled
/// round-robin loop at the preset dwell time stays bounded and decays while
/// the unscaled ablation visibly diverges on the spring position.
Eigen::MatrixXd default_coupled_Q();
Eigen::MatrixXd default_coupled_R();

/// d = 6, m = 2 control-affine system: f(x) = A x, g_k = B column k,
/// u(x) = -K x. Requires a Hurwitz-certified gain.
ControlAffineSystem build_linear_system(const CartPendulumMassSpringParams& p,
                                        const GainMatrix& gain);

// ---------------------------------------------------------------------------
// Rigid spacecraft attitude: unit-quaternion kinematics + Euler's equations,
// PD-type quaternion feedback torque. State (q0, qv, omega) in R^7.
// ---------------------------------------------------------------------------

struct SpacecraftParams {
  Eigen::Matrix3d inertia = Eigen::Vector3d(100.0, 70.0, 150.0).asDiagonal();  // kg m^2
  double k1 = 0.5;
  double k2 = 0.1;
  double q0_init = 1.0;
  Eigen::Vector3d qv_init = Eigen::Vector3d::Zero();
  Eigen::Vector3d omega_init = Eigen::Vector3d(0.01, 0.05, 0.03);  // rad/s
  double omega_bar = 0.0;  ///< target spin rate about the body x axis (0 = rest target)
  double sim_horizon = 200.0;  // s
  double step = 0.1;           // s

  void validate() const;  ///< unit quaternion to 1e-12, J symmetric positive definite
};

/// Open-loop attitude dynamics in the original coordinates:
/// state = (q0, qv, omega), returns (q0dot, qvdot, J^-1(-omega x J omega + torque)).
Eigen::VectorXd spacecraft_rhs(const SpacecraftParams& p, const Eigen::VectorXd& state,
                               const Eigen::Vector3d& torque);

/// Feedback torque -k1 qv - k2 (omega - omega_bar e1); omega_bar = 0 gives the
/// plain PD attitude law.
Eigen::Vector3d spacecraft_controller(const SpacecraftParams& p, const Eigen::VectorXd& state);

/// Rescales the quaternion part of (q0, qv, omega) to unit norm; throws
/// IntegrityError if the quaternion norm collapsed below 1e-6.
Eigen::VectorXd renormalize_quaternion(const Eigen::VectorXd& state);

/// d = 7, m = 3 system in shifted coordinates x = (q0 - 1, qv, omega - omega_bar e1),
/// so the target equilibrium sits at the origin. The torque channels are the
/// columns of J^-1 lifted into the omega rows; the post-step projection
/// renormalizes the quaternion. Note that for omega_bar != 0 the attitude keeps
/// rotating at the target spin, so the quaternion rows of the drift do not
/// vanish at the origin; state norms for spin-target runs are meaningful on the
/// omega components only (indices 4..6).
ControlAffineSystem build_spacecraft_system(const SpacecraftParams& p);

Eigen::VectorXd shift_spacecraft_state(const SpacecraftParams& p, const Eigen::VectorXd& state);
Eigen::VectorXd unshift_spacecraft_state(const SpacecraftParams& p, const Eigen::VectorXd& x);

double rotational_kinetic_energy(const SpacecraftParams& p, const Eigen::Vector3d& omega);

}  // namespace rrsim
