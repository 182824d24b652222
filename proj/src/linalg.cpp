#include "rrsim/linalg.hpp"

#include <cmath>

namespace rrsim {

Eigen::MatrixXd expm(const Eigen::MatrixXd& A) {
  using Eigen::MatrixXd;
  if (A.rows() != A.cols()) throw ConfigError("expm: matrix must be square");
  const auto n = A.rows();
  const MatrixXd I = MatrixXd::Identity(n, n);

  const double theta13 = 5.371920351148152;  // Pade-13 scaling threshold
  const double norm = A.cwiseAbs().rowwise().sum().maxCoeff();  // infinity norm
  int squarings = 0;
  if (norm > theta13) squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / theta13))));
  const MatrixXd As = A / std::pow(2.0, squarings);

  static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                             1187353796428800.0,  129060195264000.0,   10559470521600.0,
                             670442572800.0,      33522128640.0,       1323241920.0,
                             40840800.0,          960960.0,            16380.0,
                             182.0,               1.0};
  const MatrixXd A2 = As * As;
  const MatrixXd A4 = A2 * A2;
  const MatrixXd A6 = A4 * A2;
  const MatrixXd U =
      As * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 +
            b[1] * I);
  const MatrixXd V =
      A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;

  MatrixXd R = (V - U).partialPivLu().solve(V + U);
  for (int i = 0; i < squarings; ++i) R = R * R;
  return R;
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& M, const Eigen::MatrixXd& W) {
  using Eigen::MatrixXd;
  const auto d = M.rows();
  if (M.cols() != d || W.rows() != d || W.cols() != d)
    throw ConfigError("solve_lyapunov: dimension mismatch");

  // vec(M' X) = (I kron M') vec(X), vec(X M) = (M' kron I) vec(X).
  const MatrixXd Mt = M.transpose();
  MatrixXd big = MatrixXd::Zero(d * d, d * d);
  for (Eigen::Index j = 0; j < d; ++j)
    big.block(j * d, j * d, d, d) = Mt;  // I kron M'
  for (Eigen::Index bj = 0; bj < d; ++bj)
    for (Eigen::Index bi = 0; bi < d; ++bi)
      for (Eigen::Index i = 0; i < d; ++i)
        big(bj * d + i, bi * d + i) += Mt(bj, bi);  // M' kron I

  Eigen::VectorXd rhs(d * d);
  for (Eigen::Index j = 0; j < d; ++j) rhs.segment(j * d, d) = -W.col(j);
  const Eigen::VectorXd xv = big.partialPivLu().solve(rhs);

  MatrixXd X(d, d);
  for (Eigen::Index j = 0; j < d; ++j) X.col(j) = xv.segment(j * d, d);
  return X;
}

double hurwitz_margin(const Eigen::MatrixXd& A) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, /*computeEigenvectors=*/false);
  return -es.eigenvalues().real().maxCoeff();
}

double min_abs_real_eig(const Eigen::MatrixXd& A) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  return es.eigenvalues().real().cwiseAbs().minCoeff();
}

double spectral_norm(const Eigen::MatrixXd& A) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues()(0);
}

Eigen::MatrixXd finite_difference_jacobian(const VectorFieldFn& f, const StateVec& x) {
  const auto d = x.size();
  const double h = 1e-6 * (1.0 + x.norm());
  Eigen::MatrixXd J(d, d);
  StateVec xp = x, xm = x, fp(d), fm(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    xp(j) = x(j) + h;
    xm(j) = x(j) - h;
    f(xp, fp);
    f(xm, fm);
    J.col(j) = (fp - fm) / (2.0 * h);
    xp(j) = x(j);
    xm(j) = x(j);
  }
  return J;
}

}  // namespace rrsim
