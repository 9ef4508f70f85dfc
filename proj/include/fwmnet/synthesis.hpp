#pragma once

// Turning a cascade's output into a cluster state with homodyne phases and
// digital post-processing.
//
// The cascade output is a_out = R·a_sqz with R = U0·P_sqz. Measuring with
// local-oscillator phases P_homo and mixing photocurrents with a real
// orthogonal O_post realizes W = O_post·P_homo·R. A target U_V·O (O real
// orthogonal, which leaves the cluster unchanged) is reachable exactly when
// U'ᵀU' is diagonal, U' = U_V·O·R†; then P_homo² = diag(U'ᵀU') and
// O_post = U'·P_homo⁻¹.
//
// synthesize() searches O in two stages:
//   1. minimize the off-diagonal weight of U'ᵀU' (the diagonality residual);
//   2. among orientations whose residual stays within a small slack of the
//      best one found, minimize the geometric mean of the normalized
//      nullifiers of the realizable W.
// Stage 2 matters because exactly realizable orientations often form a
// continuous family whose nullifiers differ.

#include "fwmnet/cluster.hpp"
#include "fwmnet/eigenmodes.hpp"
#include "fwmnet/errors.hpp"
#include "fwmnet/linalg.hpp"
#include "fwmnet/optimizer.hpp"
#include "fwmnet/symplectic.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fwmnet {

/// Entry i where η < 1 (the eigenmode is squeezed in X and must be rotated to
/// match a P-squeezed input), 1 elsewhere, vacuum included.
inline ComplexVector squeezer_phases(const RealVector& eta) {
  ComplexVector p(eta.size());
  for (Eigen::Index k = 0; k < eta.size(); ++k) p(k) = eta(k) < 1.0 ? Complex(0, 1) : Complex(1, 0);
  return p;
}

/// Antisqueezed X variance of each P-squeezed input: max(η, 1/η).
inline RealVector squeeze_factors(const RealVector& eta) {
  return eta.unaryExpr([](double e) { return e >= 1.0 ? e : 1.0 / e; });
}

inline ComplexMatrix build_R(const EigenmodeBasis<double>& basis) {
  return basis.u0.cast<Complex>() * squeezer_phases(basis.eta).asDiagonal();
}

inline constexpr double kOrthogonalityTolerance = 1e-8;
inline constexpr double kDegeneratePhaseThreshold = 1e-6;

namespace detail {

inline ComplexMatrix uprime(const RealMatrix& o, const ComplexMatrix& uv, const ComplexMatrix& r) {
  return uv * o.cast<Complex>() * r.adjoint();
}

inline double off_diagonal_weight(const ComplexMatrix& m) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (i != j) sum += std::norm(m(i, j));
  return sum;
}

}  // namespace detail

/// Σ_{i≠j} |(U'ᵀU')_ij|² with U' = U_V·O·R†.
inline double diagonality_residual(const RealMatrix& o, const ComplexMatrix& uv, const ComplexMatrix& r) {
  const double dev = orthogonality_deviation(o);
  if (!(dev <= kOrthogonalityTolerance)) {
    throw ValidationError("diagonality_residual: O is not orthogonal (|OᵀO − I| = " + std::to_string(dev) + ")");
  }
  const ComplexMatrix u = detail::uprime(o, uv, r);
  return detail::off_diagonal_weight(u.transpose() * u);
}

struct PhaseRange {
  double min = -std::numbers::pi / 2;
  double max = std::numbers::pi / 2;
};

struct SynthesisSolution {
  /// Local-oscillator phases θ_j; P_homo = diag(exp(iθ_j)), θ_j ∈ (−π/2, π/2].
  RealVector phases;
  RealMatrix o_post;
  double residual = 0.0;
  /// Search orientation O (target U_V·O).
  RealMatrix orientation;
  ComplexMatrix achieved_w;
  NullifierReport nullifiers;
  /// Per-generation best objective. With R restarts, runs [0, R) and [R, 2R)
  /// are stage 1 for orientation sign +1 and −1; [2R, 4R) are stage 2.
  std::vector<TraceEntry> optimizer_trace;

  ComplexVector p_homo() const {
    ComplexVector p(phases.size());
    for (Eigen::Index k = 0; k < phases.size(); ++k) p(k) = std::polar(1.0, phases(k));
    return p;
  }
  bool feasible() const { return nullifiers.all_below_shot_noise(); }
};

namespace detail {

struct Realization {
  RealVector phases;
  RealMatrix o_post;
  ComplexMatrix achieved_w;
};

// Phases from the renormalized diagonal of U'ᵀU' (principal square root),
// then O_post as the orthogonal polar factor of Re(U'·P_homo⁻¹).
inline std::optional<Realization> realize_from(const ComplexMatrix& u, const ComplexVector& d, const ComplexMatrix& r) {
  const Eigen::Index n = d.size();
  Realization out;
  out.phases.resize(n);
  ComplexVector inv(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (std::abs(d(j)) < kDegeneratePhaseThreshold) return std::nullopt;
    double half = std::arg(d(j)) / 2.0;  // arg ∈ (−π, π] so half ∈ (−π/2, π/2]
    out.phases(j) = half;
    inv(j) = std::polar(1.0, -half);
  }
  const RealMatrix raw = (u * inv.asDiagonal()).real();
  out.o_post = nearest_orthogonal<double>(raw);
  ComplexVector p(n);
  for (Eigen::Index j = 0; j < n; ++j) p(j) = std::polar(1.0, out.phases(j));
  out.achieved_w = out.o_post.cast<Complex>() * p.asDiagonal() * r;
  return out;
}

inline std::optional<Realization> realize(const RealMatrix& o, const ComplexMatrix& uv, const ComplexMatrix& r) {
  const ComplexMatrix u = uprime(o, uv, r);
  return realize_from(u, (u.transpose() * u).diagonal(), r);
}

// Normalized nullifiers without the unitarity precondition check; W comes
// from realize() and is unitary by construction.
inline RealVector normalized_nullifiers(const ComplexMatrix& w, const RealVector& squeeze_x,
                                        const RealMatrix& v, const RealVector& sql) {
  const RealMatrix re = w.real();
  const RealMatrix im = w.imag();
  const RealVector raw = (im - v * re).array().square().matrix() * squeeze_x +
                         (re + v * im).array().square().matrix() * squeeze_x.cwiseInverse();
  return raw.cwiseQuotient(sql);
}

inline double phase_penalty(const RealVector& phases, const PhaseRange& range) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < phases.size(); ++j) {
    const double below = range.min - phases(j);
    const double above = phases(j) - range.max;
    const double excess = std::max({0.0, below, above});
    sum += excess * excess;
  }
  return sum;
}

}  // namespace detail

/// Realizable solution for orientation O. Nullifiers always come from the
/// implementable W = O_post·P_homo·R, not from the target U_V·O.
inline SynthesisSolution extract_solution(const RealMatrix& o, const ComplexMatrix& uv, const ComplexMatrix& r,
                                          const AdjacencyMatrix& graph, const RealVector& squeeze_x) {
  SynthesisSolution s;
  s.residual = diagonality_residual(o, uv, r);
  auto real = detail::realize(o, uv, r);
  if (!real) {
    throw DegeneratePhaseError("a diagonal entry of U'ᵀU' vanishes; the homodyne phase is undefined");
  }
  s.phases = std::move(real->phases);
  s.o_post = std::move(real->o_post);
  s.achieved_w = std::move(real->achieved_w);
  s.orientation = o;
  s.nullifiers = nullifier_variances(s.achieved_w, squeeze_x, graph);
  return s;
}

struct SynthesisConfig {
  EsConfig es;
  std::optional<PhaseRange> phase_range;
  /// Stage 2 accepts residuals up to best·(1 + rel) + abs.
  double residual_rel_slack = 1e-3;
  double residual_abs_slack = 1e-7;
  /// Weight on residual excess beyond the slack during stage 2.
  double penalty_weight = 1e3;
  /// Stage 2 step size relative to es.sigma_init.
  double refine_sigma_scale = 0.1;
  int refine_generations = 600;
  bool refine = true;
};

/// Everything synthesize() computed on the way to the solution.
struct SynthesisRun {
  EigenmodeBasis<double> basis;
  RealVector squeeze_x;
  ComplexMatrix r;
  ComplexMatrix uv;
  double best_stage1_residual = 0.0;
  SynthesisSolution solution;
};

namespace detail {

// Orientation for a search point: O = D·G(angles), D = diag(±1, 1, ..., 1).
inline RealMatrix orientation(std::span<const double> angles, int sign, Eigen::Index n) {
  RealMatrix o = angles.empty() ? RealMatrix(RealMatrix::Identity(n, n)) : orthogonal_from_params(angles);
  if (sign < 0) o.row(0) = -o.row(0);
  return o;
}

inline constexpr double kDegeneratePenalty = 1e6;

}  // namespace detail

/// Search over orientations of a given target cluster unitary.
inline SynthesisRun synthesize_target(const EigenmodeBasis<double>& basis, const ComplexMatrix& uv,
                                      const AdjacencyMatrix& graph, const SynthesisConfig& config) {
  config.es.validate();
  const Eigen::Index n = basis.modes();
  if (graph.size() != n || uv.rows() != n || uv.cols() != n) {
    throw ConfigError("cluster: graph has " + std::to_string(graph.size()) + " nodes but the cascade has " +
                      std::to_string(n) + " modes");
  }
  SynthesisRun run;
  run.basis = basis;
  run.squeeze_x = squeeze_factors(basis.eta);
  run.r = build_R(basis);
  run.uv = uv;
  const std::size_t dim = angle_count(n);
  const ComplexMatrix& r = run.r;

  auto stage1_objective = [&](int sign) {
    return [&, sign](std::span<const double> x) {
      const RealMatrix o = detail::orientation(x, sign, n);
      const ComplexMatrix u = detail::uprime(o, uv, r);
      double value = detail::off_diagonal_weight(u.transpose() * u);
      if (config.phase_range) {
        auto real = detail::realize(o, uv, r);
        value += real ? detail::phase_penalty(real->phases, *config.phase_range) : detail::kDegeneratePenalty;
      }
      return value;
    };
  };

  const int signs[2] = {+1, -1};
  EsResult stage1[2];
  std::vector<TraceEntry> trace;
  double best1 = INFINITY;
  for (int s = 0; s < 2; ++s) {
    EsConfig cfg = config.es;
    cfg.seed = config.es.seed + static_cast<std::uint64_t>(s);
    stage1[s] = es_minimize(stage1_objective(signs[s]), dim, cfg);
    for (auto e : stage1[s].trace) {
      e.restart += s * config.es.restarts;
      trace.push_back(e);
    }
    best1 = std::min(best1, stage1[s].best_value);
  }
  run.best_stage1_residual = best1;

  const RealMatrix& v = graph.matrix();
  const RealVector sql = shot_noise_limits(graph);
  const double threshold = best1 * (1.0 + config.residual_rel_slack) + config.residual_abs_slack;
  auto stage2_objective = [&](int sign) {
    return [&, sign](std::span<const double> x) {
      const RealMatrix o = detail::orientation(x, sign, n);
      const ComplexMatrix u = detail::uprime(o, uv, r);
      const ComplexMatrix gram = u.transpose() * u;
      auto real = detail::realize_from(u, gram.diagonal(), r);
      if (!real) return detail::kDegeneratePenalty;
      double constraint = detail::off_diagonal_weight(gram);
      if (config.phase_range) constraint += detail::phase_penalty(real->phases, *config.phase_range);
      const RealVector normalized = detail::normalized_nullifiers(real->achieved_w, run.squeeze_x, v, sql);
      const double merit = std::exp(normalized.array().log().mean());
      return merit + config.penalty_weight * std::max(0.0, constraint - threshold);
    };
  };

  // Candidates: (objective value, sign index, params). Stage 1 winners are
  // kept as fallbacks when refinement is off.
  int best_sign = 0;
  std::vector<double> best_params;
  if (config.refine && dim > 0) {
    double best2 = INFINITY;
    EsConfig cfg = config.es;
    cfg.sigma_init = config.es.sigma_init * config.refine_sigma_scale;
    cfg.max_generations = config.refine_generations;
    cfg.target = 0.0;
    for (int s = 0; s < 2; ++s) {
      cfg.seed = config.es.seed + 2 + static_cast<std::uint64_t>(s);
      EsResult res = es_minimize(stage2_objective(signs[s]), dim, cfg, stage1[s].restart_params);
      for (auto e : res.trace) {
        e.restart += (2 + s) * config.es.restarts;
        trace.push_back(e);
      }
      if (res.best_value < best2) {
        best2 = res.best_value;
        best_sign = s;
        best_params = res.best_params;
      }
    }
  } else {
    best_sign = stage1[1].best_value < stage1[0].best_value ? 1 : 0;
    best_params = stage1[best_sign].best_params;
  }

  const RealMatrix o = detail::orientation(best_params, signs[best_sign], n);
  run.solution = extract_solution(o, uv, r, graph, run.squeeze_x);
  run.solution.optimizer_trace = std::move(trace);
  return run;
}

inline SynthesisRun synthesize(const EigenmodeBasis<double>& basis, const AdjacencyMatrix& graph,
                               const SynthesisConfig& config) {
  if (graph.size() != basis.modes()) {
    throw ConfigError("cluster: graph has " + std::to_string(graph.size()) + " nodes but the cascade has " +
                      std::to_string(basis.modes()) + " modes");
  }
  return synthesize_target(basis, canonical_cluster_unitary(graph).uv, graph, config);
}

/// Full pipeline: cascade → covariance → eigenmodes → orientation search.
inline SynthesisRun synthesize(const CascadeTopology& topology, const AdjacencyMatrix& graph,
                               const SynthesisConfig& config) {
  if (static_cast<Eigen::Index>(topology.mode_count()) != graph.size()) {
    throw ConfigError("cluster: graph has " + std::to_string(graph.size()) + " nodes but the cascade has " +
                      std::to_string(topology.mode_count()) + " modes");
  }
  const auto basis = decompose(covariance(build_cascade<double>(topology)));
  return synthesize(basis, graph, config);
}

}  // namespace fwmnet
