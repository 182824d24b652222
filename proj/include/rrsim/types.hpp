#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace rrsim {

/// State vector of a control-affine system (length d).
using StateVec = Eigen::VectorXd;

/// In-place vector field evaluation: out = F(x). `out` is preallocated by the caller.
using VectorFieldFn = std::function<void(const StateVec& x, StateVec& out)>;

/// In-place feedback evaluation: out = u(x) in R^m.
using FeedbackFn = std::function<void(const StateVec& x, Eigen::VectorXd& out)>;

/// Post-step state projection (e.g. quaternion renormalization). Mutates in place.
using ProjectionFn = std::function<void(StateVec& x)>;

/// Jacobian of a vector field at x.
using JacobianFn = std::function<Eigen::MatrixXd(const StateVec& x)>;

/// Invalid or inconsistent configuration (dimension mismatch, bad schedule, ...).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Mismatched inputs to an analysis operation (e.g. trajectory grids that do not align).
struct AnalysisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Gain synthesis did not converge.
struct SynthesisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// State integrity violation (e.g. quaternion norm collapsed to ~0).
struct IntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline bool all_finite(const Eigen::Ref<const Eigen::VectorXd>& v) {
  return v.allFinite();
}

/// SplitMix64: tiny, portable, deterministic generator used for all randomized
/// draws that feed experiment artifacts. Identical output on every platform.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in [-1, 1).
  double uniform_pm1() { return 2.0 * uniform01() - 1.0; }

  /// Uniform draw from the closed ball of given radius in R^3 (rejection from the cube).
  Eigen::Vector3d uniform_ball3(double radius) {
    while (true) {
      Eigen::Vector3d v(uniform_pm1(), uniform_pm1(), uniform_pm1());
      if (v.squaredNorm() <= 1.0) return radius * v;
    }
  }
};

}  // namespace rrsim
