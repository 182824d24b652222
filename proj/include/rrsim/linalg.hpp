#pragma once

#include "rrsim/types.hpp"

#include <Eigen/Dense>

namespace rrsim {

/// Matrix exponential by scaling-and-squaring with a degree-13 Pade
/// approximant (Higham 2005 parameters).
Eigen::MatrixXd expm(const Eigen::MatrixXd& A);

/// Solves the continuous Lyapunov equation M' X + X M + W = 0 by Kronecker
/// vectorization and a dense LU solve (d^2 x d^2 system; fine at desk scale).
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& M, const Eigen::MatrixXd& W);

/// min over eigenvalues of -Re(lambda(A)); positive iff A is Hurwitz.
double hurwitz_margin(const Eigen::MatrixXd& A);

/// min over eigenvalues of |Re(lambda(A))| (hyperbolicity indicator, report-only).
double min_abs_real_eig(const Eigen::MatrixXd& A);

/// Euclidean operator norm (largest singular value).
double spectral_norm(const Eigen::MatrixXd& A);

/// Central finite-difference Jacobian with step 1e-6 * (1 + |x|).
Eigen::MatrixXd finite_difference_jacobian(const VectorFieldFn& f, const StateVec& x);

}  // namespace rrsim
