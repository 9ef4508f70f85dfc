#pragma once

// Squeezing eigenmodes of a block-diagonal Gaussian covariance.
//
// For a pure state C_PP = C_XX⁻¹, so both blocks share eigenvectors with
// reciprocal eigenvalues. decompose() exploits this: eigenpairs with η ≥ 1 are
// taken from C_XX and the squeezed ones from C_PP, where they are the large,
// well-resolved eigenvalues. Mixed inputs fall back to C_XX alone.

#include "fwmnet/errors.hpp"
#include "fwmnet/linalg.hpp"
#include "fwmnet/symplectic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace fwmnet {

template <typename T = double>
struct EigenmodeBasis {
  /// Columns are eigenmodes expressed in the output-mode basis.
  Matrix<T> u0;
  /// Eigenvalues of C_XX, descending.
  Vector<T> eta;
  std::vector<std::string> labels;

  Eigen::Index modes() const { return eta.size(); }
};

enum class ModeTag { squeezed, antisqueezed, vacuum };

inline const char* to_string(ModeTag tag) {
  switch (tag) {
    case ModeTag::squeezed: return "squeezed";
    case ModeTag::antisqueezed: return "antisqueezed";
    case ModeTag::vacuum: return "vacuum";
  }
  return "unknown";
}

struct ModeClassification {
  std::vector<ModeTag> tags;
  std::vector<double> squeezing_db;

  std::size_t vacuum_count() const {
    return static_cast<std::size_t>(std::count(tags.begin(), tags.end(), ModeTag::vacuum));
  }
};

inline constexpr double kDefaultVacuumTolerance = 1e-6;

namespace detail {

// Largest-magnitude entry of each column made positive; ties go to the lowest index.
template <typename T>
void fix_column_signs(Matrix<T>& u) {
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    Eigen::Index pick = 0;
    T best = T(-1);
    for (Eigen::Index r = 0; r < u.rows(); ++r) {
      const T mag = std::abs(u(r, c));
      if (mag > best + T(1e-12)) {
        best = mag;
        pick = r;
      }
    }
    if (u(pick, c) < T(0)) u.col(c) = -u.col(c);
  }
}

// Replace the columns [begin, end) by a canonical orthonormal basis of their
// span: Gram-Schmidt over the projections of e_1, e_2, ... onto the subspace.
template <typename T>
void canonicalize_subspace(Matrix<T>& u, Eigen::Index begin, Eigen::Index end) {
  const Eigen::Index k = end - begin;
  if (k < 2) return;
  const Eigen::Index n = u.rows();
  const Matrix<T> q = u.middleCols(begin, k);
  const Matrix<T> projector = q * q.transpose();
  Matrix<T> basis(n, k);
  Eigen::Index found = 0;
  for (Eigen::Index e = 0; e < n && found < k; ++e) {
    Vector<T> v = projector.col(e);
    for (Eigen::Index j = 0; j < found; ++j) v -= basis.col(j).dot(v) * basis.col(j);
    const T norm = v.norm();
    if (norm > T(1e-6)) basis.col(found++) = v / norm;
  }
  if (found == k) u.middleCols(begin, k) = basis;
}

template <typename T>
bool looks_pure(const CovarianceMatrix<T>& c) {
  const Eigen::Index n = c.modes();
  if (c.cpp.rows() != n || c.cpp.cols() != n) return false;
  return identity_deviation(c.cxx * c.cpp) <= T(1e-6);
}

template <typename T>
void check_symmetric_block(const Matrix<T>& m, const char* name) {
  if (m.rows() != m.cols()) {
    throw ValidationError(std::string(name) + " must be square");
  }
  if (!m.allFinite()) throw ValidationError(std::string(name) + " has non-finite entries");
  const T asym = max_abs(m - m.transpose());
  if (asym > T(1e-9)) {
    throw ValidationError(std::string(name) + " is not symmetric (max |C − Cᵀ| = " +
                          std::to_string(static_cast<double>(asym)) + ")");
  }
}

}  // namespace detail

template <typename T>
EigenmodeBasis<T> decompose(const CovarianceMatrix<T>& c) {
  detail::check_symmetric_block(c.cxx, "cxx");
  const Eigen::Index n = c.modes();
  const bool pure = c.cpp.size() > 0 && detail::looks_pure(c);
  if (pure) detail::check_symmetric_block(c.cpp, "cpp");

  Eigen::SelfAdjointEigenSolver<Matrix<T>> ex(c.cxx);
  if (ex.info() != Eigen::Success) throw ValidationError("cxx eigen-decomposition failed");
  if (n > 0 && !(ex.eigenvalues().minCoeff() > T(0))) {
    throw ValidationError("cxx is not positive definite");
  }

  // Eigen returns ascending order.
  Matrix<T> vectors(n, n);
  Vector<T> values(n);
  if (pure) {
    Eigen::SelfAdjointEigenSolver<Matrix<T>> ep(c.cpp);
    if (ep.info() != Eigen::Success) throw ValidationError("cpp eigen-decomposition failed");
    Eigen::Index m = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (ex.eigenvalues()(k) >= T(1)) ++m;
    }
    Eigen::Index col = 0;
    for (Eigen::Index k = n - 1; k >= n - m; --k, ++col) {
      vectors.col(col) = ex.eigenvectors().col(k);
      values(col) = ex.eigenvalues()(k);
    }
    for (Eigen::Index k = n - 1; k >= m; --k, ++col) {
      vectors.col(col) = ep.eigenvectors().col(k);
      values(col) = T(1) / ep.eigenvalues()(k);
    }
    vectors = nearest_orthogonal<T>(vectors);
  } else {
    for (Eigen::Index k = 0; k < n; ++k) {
      vectors.col(k) = ex.eigenvectors().col(n - 1 - k);
      values(k) = ex.eigenvalues()(n - 1 - k);
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values(a) > values(b); });

  EigenmodeBasis<T> basis;
  basis.u0.resize(n, n);
  basis.eta.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    basis.u0.col(k) = vectors.col(order[static_cast<std::size_t>(k)]);
    basis.eta(k) = values(order[static_cast<std::size_t>(k)]);
  }

  // Eigenvectors of repeated eigenvalues are only defined up to rotation.
  Eigen::Index begin = 0;
  for (Eigen::Index k = 1; k <= n; ++k) {
    const bool split =
        k == n || std::abs(basis.eta(k) - basis.eta(k - 1)) >
                      T(1e-9) * std::max(T(1), std::abs(basis.eta(k - 1)));
    if (split) {
      detail::canonicalize_subspace(basis.u0, begin, k);
      begin = k;
    }
  }
  detail::fix_column_signs(basis.u0);
  basis.labels = c.labels;
  return basis;
}

/// Largest deviation of u0ᵀ·cpp·u0 from diag(1/η).
template <typename T>
T pure_pairing_deviation(const EigenmodeBasis<T>& basis, const CovarianceMatrix<T>& c) {
  const Matrix<T> d = basis.u0.transpose() * c.cpp * basis.u0;
  const Vector<T> inv = basis.eta.cwiseInverse();
  return max_abs(d - Matrix<T>(inv.asDiagonal()));
}

template <typename T>
T reconstruction_deviation(const EigenmodeBasis<T>& basis, const Matrix<T>& cxx) {
  return max_abs(basis.u0 * basis.eta.asDiagonal() * basis.u0.transpose() - cxx);
}

/// 10·log₁₀(η); negative means squeezed.
inline double squeezing_db(double eta) {
  if (!std::isfinite(eta) || eta <= 0.0) {
    throw DomainError("squeezing_db needs a positive variance, got " + std::to_string(eta));
  }
  return 10.0 * std::log10(eta);
}

template <typename T>
ModeClassification classify_modes(const EigenmodeBasis<T>& basis,
                                  double vacuum_tolerance = kDefaultVacuumTolerance) {
  if (!(vacuum_tolerance > 0.0 && vacuum_tolerance <= 0.1)) {
    throw DomainError("vacuum tolerance must lie in (0, 0.1]");
  }
  ModeClassification out;
  for (Eigen::Index k = 0; k < basis.eta.size(); ++k) {
    const double eta = static_cast<double>(basis.eta(k));
    if (std::abs(eta - 1.0) < vacuum_tolerance) {
      out.tags.push_back(ModeTag::vacuum);
    } else if (eta < 1.0) {
      out.tags.push_back(ModeTag::squeezed);
    } else {
      out.tags.push_back(ModeTag::antisqueezed);
    }
    out.squeezing_db.push_back(squeezing_db(eta));
  }
  return out;
}

}  // namespace fwmnet
