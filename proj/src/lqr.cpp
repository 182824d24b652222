#include "rrsim/lqr.hpp"

#include "rrsim/linalg.hpp"

#include <cmath>

namespace rrsim {

namespace {

constexpr int kMaxNewtonIterations = 200;
constexpr int kMaxContinuationSteps = 200;

// Kleinman-Newton on the CARE for (A, B, Q, R), started from a gain K0 that
// stabilizes A. Returns the converged gain.
Eigen::MatrixXd kleinman_newton(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                                Eigen::MatrixXd K) {
  const Eigen::LLT<Eigen::MatrixXd> Rchol(R);
  if (Rchol.info() != Eigen::Success) throw SynthesisError("synthesize_gain: R must be SPD");

  for (int it = 0; it < kMaxNewtonIterations; ++it) {
    const Eigen::MatrixXd Acl = A - B * K;
    const Eigen::MatrixXd W = Q + K.transpose() * R * K;
    const Eigen::MatrixXd P = solve_lyapunov(Acl, W);
    const Eigen::MatrixXd Knew = Rchol.solve(B.transpose() * P);
    const double delta = (Knew - K).norm() / std::max(1.0, Knew.norm());
    K = Knew;
    if (delta < 1e-13) return K;
  }
  throw SynthesisError("synthesize_gain: Riccati iteration did not converge");
}

}  // namespace

GainMatrix synthesize_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
  const auto d = A.rows();
  const auto m = B.cols();
  if (A.cols() != d || B.rows() != d || Q.rows() != d || Q.cols() != d || R.rows() != m ||
      R.cols() != m)
    throw ConfigError("synthesize_gain: dimension mismatch");

  // Shift continuation: A - alpha I is Hurwitz for alpha above the spectral
  // abscissa, so K = 0 is a valid starting gain there. Each converged shifted
  // gain keeps a positive margin, which bounds how far alpha may decrease
  // while preserving stabilizability of the next shifted loop by the same K.
  double alpha = std::max(0.0, -hurwitz_margin(A)) + 1.0;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(m, d);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);

  for (int step = 0; step < kMaxContinuationSteps; ++step) {
    K = kleinman_newton(A - alpha * I, B, Q, R, K);
    if (alpha == 0.0) break;
    const double mu = hurwitz_margin(A - alpha * I - B * K);
    if (!(mu > 0.0)) throw SynthesisError("synthesize_gain: continuation lost stability");
    alpha = std::max(0.0, alpha - 0.5 * mu);
    if (step + 1 == kMaxContinuationSteps)
      throw SynthesisError("synthesize_gain: continuation did not reach alpha = 0");
  }

  GainMatrix gain;
  gain.K = K;
  gain.hurwitz_margin = hurwitz_margin(A - B * K);
  if (!(gain.hurwitz_margin > 0.0))
    throw SynthesisError("synthesize_gain: synthesized loop is not Hurwitz");
  return gain;
}

}  // namespace rrsim
