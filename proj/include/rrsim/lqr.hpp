#pragma once

#include "rrsim/types.hpp"

#include <Eigen/Dense>

namespace rrsim {

/// Stabilizing linear feedback u = -K x together with its Hurwitz certificate
/// for the loop it was synthesized for.
struct GainMatrix {
  Eigen::MatrixXd K;
  double hurwitz_margin = 0.0;  ///< min over eigenvalues of -Re(lambda(A - B K)); > 0 certifies
};

/// LQR gain via Kleinman-Newton iteration on the continuous algebraic Riccati
/// equation; each Newton step is a Lyapunov solve (Kronecker vectorization).
/// The initial stabilizing gain comes from a shift continuation: the
/// iteration starts on (A - alpha I) with alpha > max Re lambda(A), where
/// K = 0 is stabilizing, and alpha is walked down to 0 while the current gain
/// keeps certifying the shifted loop. Throws SynthesisError if the Newton
/// iteration fails to converge within 200 iterations or the final loop is not
/// Hurwitz.
GainMatrix synthesize_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R);

}  // namespace rrsim
