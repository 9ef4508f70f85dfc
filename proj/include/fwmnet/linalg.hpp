#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>

namespace fwmnet {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Largest absolute entry. All "‖·‖∞" tolerances in the library use this norm.
template <typename Derived>
auto max_abs(const Eigen::MatrixBase<Derived>& m) {
  using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
  if (m.size() == 0) return Real(0);
  return static_cast<Real>(m.cwiseAbs().maxCoeff());
}

template <typename Derived>
auto identity_deviation(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  using Plain = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  return max_abs(m - Plain::Identity(m.rows(), m.cols()));
}

inline double orthogonality_deviation(const RealMatrix& o) {
  return identity_deviation(o.transpose() * o);
}

inline double unitarity_deviation(const ComplexMatrix& u) {
  return identity_deviation(u.adjoint() * u);
}

/// Nearest real orthogonal matrix in Frobenius norm (orthogonal polar factor).
template <typename T>
Matrix<T> nearest_orthogonal(const Matrix<T>& m) {
  Eigen::JacobiSVD<Matrix<T>> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

/// Inverse square root of a symmetric positive definite matrix. Returns the
/// smallest eigenvalue through `min_eigenvalue` so callers can judge conditioning.
inline RealMatrix inverse_sqrt_spd(const RealMatrix& m, double* min_eigenvalue = nullptr) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(m);
  const RealVector& w = es.eigenvalues();
  if (min_eigenvalue != nullptr) *min_eigenvalue = w.size() > 0 ? w.minCoeff() : 1.0;
  RealVector s = w.unaryExpr([](double x) { return x > 0 ? 1.0 / std::sqrt(x) : 0.0; });
  return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace fwmnet
