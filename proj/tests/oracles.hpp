// Test-side oracles, deliberately independent of the library implementation
// paths they check:
//  - taylor_expm: plain scaled Taylor series (the library uses Pade-13)
//  - char_poly / durand_kerner: eigenvalues via Faddeev-LeVerrier +
//    simultaneous root iteration (the library uses Schur-based solvers)
//  - brute_active_index: exact integer-rational evaluation of the round-robin
//    index formula (the library uses floating-point fmod)
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

namespace oracles {

inline Eigen::MatrixXd taylor_expm(const Eigen::MatrixXd& A) {
  const auto n = A.rows();
  const double norm = A.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Eigen::MatrixXd As = A / std::pow(2.0, squarings);

  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd sum = term;
  for (int k = 1; k <= 40; ++k) {
    term = (As * term) / static_cast<double>(k);
    sum += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18 * sum.cwiseAbs().maxCoeff()) break;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

/// Monic characteristic polynomial coefficients c so that
/// p(z) = z^n + c[0] z^{n-1} + ... + c[n-1], via Faddeev-LeVerrier.
inline std::vector<double> char_poly(const Eigen::MatrixXd& A) {
  const auto n = A.rows();
  std::vector<double> c(static_cast<std::size_t>(n));
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  double ck = 1.0;
  for (Eigen::Index k = 1; k <= n; ++k) {
    M = A * M + ck * Eigen::MatrixXd::Identity(n, n);
    ck = -(A * M).trace() / static_cast<double>(k);
    c[static_cast<std::size_t>(k - 1)] = ck;
  }
  return c;
}

/// All roots of the monic polynomial by Durand-Kerner iteration.
inline std::vector<std::complex<double>> durand_kerner(const std::vector<double>& c) {
  const auto n = c.size();
  std::vector<std::complex<double>> z(n);
  const std::complex<double> seed(0.4, 0.9);
  z[0] = seed;
  for (std::size_t i = 1; i < n; ++i) z[i] = z[i - 1] * seed;

  auto eval = [&](std::complex<double> x) {
    std::complex<double> p = 1.0;
    for (double coef : c) p = p * x + coef;
    return p;
  };

  for (int it = 0; it < 1000; ++it) {
    double moved = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::complex<double> denom = 1.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) denom *= z[i] - z[j];
      const std::complex<double> delta = eval(z[i]) / denom;
      z[i] -= delta;
      moved = std::max(moved, std::abs(delta));
    }
    if (moved < 1e-14) break;
  }
  return z;
}

/// Hurwitz margin (min over roots of -Re) from the characteristic polynomial.
inline double eig_oracle_hurwitz_margin(const Eigen::MatrixXd& A) {
  const auto roots = durand_kerner(char_poly(A));
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& r : roots) margin = std::min(margin, -r.real());
  return margin;
}

inline long long floordiv(long long a, long long b) {  // b > 0
  long long q = a / b;
  if (a % b != 0 && a < 0) --q;
  return q;
}

/// Exact rational evaluation of 1 + floor((t - m tau floor(t/(m tau))) / tau)
/// for t = tn/td, tau = taun/taud (all positive integers).
inline int brute_active_index(long long tn, long long td, long long taun, long long taud, int m) {
  const long long q = floordiv(tn * taud, td * static_cast<long long>(m) * taun);
  const long long rn = tn * taud - td * static_cast<long long>(m) * taun * q;  // r = rn/(td*taud)
  const long long f = floordiv(rn, td * taun);
  return 1 + static_cast<int>(f);
}

}  // namespace oracles
