#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library except for plain data types.

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// Gauss-Legendre nodes and weights on [0,1] via the Golub-Welsch eigenproblem.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre01(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Eigen::VectorXd x = (es.eigenvalues().array() + 1.0) / 2.0;
  // 2 v_0^2 on [-1, 1], halved for [0, 1].
  Eigen::VectorXd w = es.eigenvectors().row(0).transpose().array().square();
  return {x, w};
}

/// phi_k(x) by direct cosine evaluation.
inline double cosine_basis(int k, double x) {
  return k == 0 ? 1.0 : std::sqrt(2.0) * std::cos(std::numbers::pi * k * x);
}

inline double kernel(const Eigen::VectorXd& mu, double x, double y) {
  double s = 0.0;
  for (int k = 0; k < mu.size(); ++k) s += mu[k] * cosine_basis(k, x) * cosine_basis(k, y);
  return s;
}

inline double eval(const Eigen::VectorXd& coeffs, double x) {
  double s = 0.0;
  for (int k = 0; k < coeffs.size(); ++k) s += coeffs[k] * cosine_basis(k, x);
  return s;
}

/// Solves (diag(mu) + lambda I) f = diag(mu) c as a dense system.
inline Eigen::VectorXd tikhonov_dense(const Eigen::VectorXd& mu, const Eigen::VectorXd& c, double lambda) {
  const Eigen::MatrixXd L = mu.asDiagonal();
  const Eigen::MatrixXd A = L + lambda * Eigen::MatrixXd::Identity(mu.size(), mu.size());
  return A.fullPivLu().solve(L * c);
}

}  // namespace oracle
