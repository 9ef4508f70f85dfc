#pragma once

// Cluster graphs, cluster unitaries and nullifier variances.
//
// A unitary U maps P-squeezed input modes to cluster modes (a_C = U·a_sqz).
// It realizes the graph V when Im(U) = V·Re(U); then every nullifier
// δ_i = P_i − Σ_j V_ij X_j only picks up the squeezed input quadratures.

#include "fwmnet/errors.hpp"
#include "fwmnet/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace fwmnet {

class AdjacencyMatrix {
 public:
  AdjacencyMatrix() = default;

  /// Throws ValidationError unless v is square, exactly symmetric, finite and
  /// has an exactly zero diagonal.
  explicit AdjacencyMatrix(RealMatrix v) : v_(std::move(v)) {
    if (v_.rows() != v_.cols()) throw ValidationError("adjacency matrix must be square");
    if (!v_.allFinite()) throw ValidationError("adjacency matrix has non-finite entries");
    for (Eigen::Index i = 0; i < v_.rows(); ++i) {
      if (v_(i, i) != 0.0) {
        throw ValidationError("adjacency matrix diagonal must be zero (node " +
                              std::to_string(i + 1) + ")");
      }
      for (Eigen::Index j = i + 1; j < v_.cols(); ++j) {
        if (v_(i, j) != v_(j, i)) {
          throw ValidationError("adjacency matrix must be symmetric (entry " + std::to_string(i + 1) +
                                "," + std::to_string(j + 1) + ")");
        }
      }
    }
  }

  struct Edge {
    int a;  // 1-based
    int b;
    double weight = 1.0;
  };

  static AdjacencyMatrix from_edges(int n, const std::vector<Edge>& edges) {
    if (n < 1) throw ValidationError("graph needs at least one node");
    RealMatrix v = RealMatrix::Zero(n, n);
    for (const auto& e : edges) {
      if (e.a < 1 || e.a > n || e.b < 1 || e.b > n) {
        throw ValidationError("edge (" + std::to_string(e.a) + "," + std::to_string(e.b) +
                              ") references a node outside 1.." + std::to_string(n));
      }
      if (e.a == e.b) throw ValidationError("self-loop on node " + std::to_string(e.a));
      v(e.a - 1, e.b - 1) = e.weight;
      v(e.b - 1, e.a - 1) = e.weight;
    }
    return AdjacencyMatrix(std::move(v));
  }

  const RealMatrix& matrix() const noexcept { return v_; }
  Eigen::Index size() const noexcept { return v_.rows(); }

  std::vector<int> degrees() const {
    std::vector<int> d;
    for (Eigen::Index i = 0; i < v_.rows(); ++i) {
      d.push_back(static_cast<int>((v_.row(i).array() != 0.0).count()));
    }
    return d;
  }

  /// Relabel nodes: new node i is old node perm[i].
  AdjacencyMatrix permuted(const std::vector<int>& perm) const {
    RealMatrix out(v_.rows(), v_.cols());
    for (Eigen::Index i = 0; i < v_.rows(); ++i)
      for (Eigen::Index j = 0; j < v_.cols(); ++j) out(i, j) = v_(perm[i], perm[j]);
    return AdjacencyMatrix(std::move(out));
  }

 private:
  RealMatrix v_;
};

inline const std::array<const char*, 4>& preset_graph_names() {
  static const std::array<const char*, 4> names{"linear3", "linear4", "square4", "t4"};
  return names;
}

/// Unit-weight presets: paths on 3 and 4 nodes, the 4-cycle, and the T shape
/// (node 2 joined to nodes 1, 3, 4).
inline AdjacencyMatrix preset_graph(const std::string& name) {
  using E = AdjacencyMatrix::Edge;
  if (name == "linear3") return AdjacencyMatrix::from_edges(3, {E{1, 2}, E{2, 3}});
  if (name == "linear4") return AdjacencyMatrix::from_edges(4, {E{1, 2}, E{2, 3}, E{3, 4}});
  if (name == "square4") return AdjacencyMatrix::from_edges(4, {E{1, 2}, E{2, 3}, E{3, 4}, E{4, 1}});
  if (name == "t4") return AdjacencyMatrix::from_edges(4, {E{1, 2}, E{2, 3}, E{2, 4}});
  std::string valid;
  for (const char* n : preset_graph_names()) valid += std::string(valid.empty() ? "" : ", ") + n;
  throw LookupError("unknown cluster preset '" + name + "' (valid: " + valid + ")");
}

struct ClusterUnitary {
  ComplexMatrix uv;
};

/// U_V = (I + iV)·(I + V²)^(−1/2).
inline ClusterUnitary canonical_cluster_unitary(const AdjacencyMatrix& graph) {
  const RealMatrix& v = graph.matrix();
  const Eigen::Index n = v.rows();
  const RealMatrix id = RealMatrix::Identity(n, n);
  double min_eig = 1.0;
  const RealMatrix inv_sqrt = inverse_sqrt_spd(id + v * v, &min_eig);
  if (!(min_eig > 1e-12)) {
    throw ConditioningError("I + V² is numerically singular");
  }
  ClusterUnitary out;
  out.uv = (id.cast<Complex>() + Complex(0, 1) * v.cast<Complex>()) * inv_sqrt.cast<Complex>();
  return out;
}

struct ClusterCheck {
  bool ok = false;
  double unitarity_deviation = 0.0;  // max |U†U − I|
  double cluster_deviation = 0.0;    // max |Im U − V·Re U|
};

inline ClusterCheck is_cluster_unitary(const ComplexMatrix& u, const AdjacencyMatrix& graph, double tol) {
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  ClusterCheck out;
  if (u.rows() != graph.size() || u.cols() != graph.size()) {
    out.unitarity_deviation = out.cluster_deviation = INFINITY;
    return out;
  }
  out.unitarity_deviation = unitarity_deviation(u);
  out.cluster_deviation = max_abs(RealMatrix(u.imag()) - graph.matrix() * u.real());
  out.ok = out.unitarity_deviation <= tol && out.cluster_deviation <= tol;
  return out;
}

/// Vacuum variance of each nullifier: 1 + Σ_j V_ij².
inline RealVector shot_noise_limits(const AdjacencyMatrix& graph) {
  return (RealVector::Ones(graph.size()) + graph.matrix().array().square().rowwise().sum().matrix());
}

struct NullifierReport {
  RealVector raw_variance;
  RealVector sql;
  RealVector normalized;

  double max_normalized() const { return normalized.size() ? normalized.maxCoeff() : 0.0; }
  bool all_below_shot_noise() const { return (normalized.array() < 1.0).all(); }
};

inline constexpr double kUnitarityTolerance = 1e-8;

/// Nullifier variances of the state a_C = W·a_sqz, where input k has
/// Var X = s_k and Var P = 1/s_k (s_k ≥ 1; s_k = 1 is vacuum).
inline NullifierReport nullifier_variances(const ComplexMatrix& w, const RealVector& squeeze_x,
                                           const AdjacencyMatrix& graph) {
  const Eigen::Index n = graph.size();
  if (w.rows() != n || w.cols() != n || squeeze_x.size() != n) {
    throw ValidationError("nullifier_variances: dimension mismatch between W, squeezing and graph");
  }
  const double dev = unitarity_deviation(w);
  if (!(dev <= kUnitarityTolerance)) {
    throw ValidationError("nullifier_variances: W is not unitary (|W†W − I| = " + std::to_string(dev) + ")");
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!(squeeze_x(k) >= 1.0) || !std::isfinite(squeeze_x(k))) {
      throw ValidationError("nullifier_variances: squeezing factors must be finite and >= 1");
    }
  }
  const RealMatrix& v = graph.matrix();
  const RealMatrix re = w.real();
  const RealMatrix im = w.imag();
  const RealMatrix x_coeff = im - v * re;  // multiplies X_sqz
  const RealMatrix p_coeff = re + v * im;  // multiplies P_sqz

  NullifierReport r;
  r.raw_variance = x_coeff.array().square().matrix() * squeeze_x +
                   p_coeff.array().square().matrix() * squeeze_x.cwiseInverse();
  r.sql = shot_noise_limits(graph);
  r.normalized = r.raw_variance.cwiseQuotient(r.sql);
  return r;
}

}  // namespace fwmnet
