#pragma once

#include "rrsim/schedule.hpp"
#include "rrsim/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rrsim {

/// Control-affine system xdot = f(x) + sum_k g_k(x) u_k together with a
/// feedback law u : R^d -> R^m. Immutable after construction; all evaluators
/// must be pure.
struct ControlAffineSystem {
  int d = 0;
  int m = 0;
  VectorFieldFn drift;                  ///< f : R^d -> R^d
  std::vector<VectorFieldFn> channels;  ///< g_k : R^d -> R^d, k = 1..m
  FeedbackFn feedback;                  ///< u : R^d -> R^m
  JacobianFn nominal_jacobian;          ///< optional analytic Jacobian of the nominal closed loop
  ProjectionFn post_step_projection;    ///< optional per-step projection (quaternion renorm)
  std::string name;
};

enum class LoopKind { Nominal, Sparse, SparseUnscaled };

/// Closed-loop flavor: all channels simultaneously active (Nominal), or one
/// channel at a time under a round-robin schedule, with the active feedback
/// multiplied by m (Sparse) or left unscaled (SparseUnscaled, ablation mode).
struct ClosedLoopMode {
  LoopKind kind = LoopKind::Nominal;
  std::optional<Schedule> schedule;

  static ClosedLoopMode nominal() { return {LoopKind::Nominal, std::nullopt}; }
  static ClosedLoopMode sparse(Schedule s) { return {LoopKind::Sparse, std::move(s)}; }
  static ClosedLoopMode sparse_unscaled(Schedule s) {
    return {LoopKind::SparseUnscaled, std::move(s)};
  }

  bool switched() const { return kind != LoopKind::Nominal; }
  double gain_factor(int m) const {
    return kind == LoopKind::Sparse ? static_cast<double>(m) : 1.0;
  }
};

/// f(x) + sum_k g_k(x) u_k(x).
StateVec eval_nominal_rhs(const ControlAffineSystem& sys, const StateVec& x);

/// f(x) + c * g_k(x) u_k(x) with k the schedule's active index at t and
/// c = m if scaled, 1 otherwise.
StateVec eval_switched_rhs(const ControlAffineSystem& sys, const StateVec& x, double t,
                           const Schedule& schedule, bool scaled);

enum class PremiseViolation {
  EquilibriumAtZero,  ///< f(0) != 0 or u(0) != 0 beyond tolerance
  LocalLipschitz,     ///< sampled difference quotients blow up near 0
};

inline constexpr double kEquilibriumTol = 1e-12;

/// Numerical check of the standing assumptions on a system: the equilibrium
/// condition f(0) = 0, u(0) = 0 (absolute tolerance 1e-12) and an empirical
/// local-Lipschitz probe of the closed-loop field on sampled balls around 0.
/// Returns the violated subset; empty means pass. Report-only, never throws
/// for a well-formed system.
std::vector<PremiseViolation> validate_premise(const ControlAffineSystem& sys);

std::string to_string(PremiseViolation v);

}  // namespace rrsim
