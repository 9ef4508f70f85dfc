#pragma once

// Machine-readable reports. JSON numbers are written in shortest round-trip
// form and CSV numbers with 17 significant digits, so every value reads back
// bit-exactly. Reports carry no timestamps: identical inputs give identical bytes.

#include "fwmnet/cluster.hpp"
#include "fwmnet/eigenmodes.hpp"
#include "fwmnet/io.hpp"
#include "fwmnet/synthesis.hpp"

#include <sstream>
#include <string>
#include <vector>

namespace fwmnet {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kReportSchema = "fwmnet/report/v1";
inline constexpr const char* kSolutionSchema = "fwmnet/solution/v1";

inline Json covariance_to_json(const CovarianceMatrix<double>& c) {
  return {{"labels", c.labels}, {"cxx", matrix_to_json(c.cxx)}, {"cpp", matrix_to_json(c.cpp)}};
}

inline Json eigenmodes_to_json(const EigenmodeBasis<double>& b, const ModeClassification& cls) {
  Json tags = Json::array();
  for (auto t : cls.tags) tags.push_back(to_string(t));
  // u0 columns are the eigenmodes; "modes" lists them row by row for readability.
  Json modes = Json::array();
  for (Eigen::Index k = 0; k < b.u0.cols(); ++k) modes.push_back(vector_to_json(RealVector(b.u0.col(k))));
  return {{"labels", b.labels},
          {"eta", vector_to_json(b.eta)},
          {"db", cls.squeezing_db},
          {"tags", tags},
          {"vacuum_count", cls.vacuum_count()},
          {"u0", matrix_to_json(b.u0)},
          {"modes", modes}};
}

inline Json nullifiers_to_json(const NullifierReport& r) {
  return {{"raw", vector_to_json(r.raw_variance)},
          {"sql", vector_to_json(r.sql)},
          {"normalized", vector_to_json(r.normalized)}};
}

inline Json trace_to_json(const std::vector<TraceEntry>& trace) {
  Json restart = Json::array(), generation = Json::array(), best = Json::array(), sigma = Json::array();
  for (const auto& e : trace) {
    restart.push_back(e.restart);
    generation.push_back(e.generation);
    best.push_back(e.best);
    sigma.push_back(e.sigma);
  }
  return {{"restart", restart}, {"generation", generation}, {"best", best}, {"sigma", sigma}};
}

inline Json solution_to_json(const SynthesisRun& run, const AdjacencyMatrix& graph) {
  const SynthesisSolution& s = run.solution;
  return {{"schema", kSolutionSchema},
          {"labels", run.basis.labels},
          {"graph", graph_to_json(graph)},
          {"eta", vector_to_json(run.basis.eta)},
          {"u0", matrix_to_json(run.basis.u0)},
          {"squeeze_x", vector_to_json(run.squeeze_x)},
          {"target_uv", complex_matrix_to_json(run.uv)},
          {"orientation", matrix_to_json(s.orientation)},
          {"phases", vector_to_json(s.phases)},
          {"o_post", matrix_to_json(s.o_post)},
          {"residual", s.residual},
          {"stage1_residual", run.best_stage1_residual},
          {"achieved_w", complex_matrix_to_json(s.achieved_w)},
          {"nullifiers", nullifiers_to_json(s.nullifiers)},
          {"feasible", s.feasible()},
          {"trace", trace_to_json(s.optimizer_trace)}};
}

inline Json make_report(const std::string& command, const Json& config) {
  return {{"schema", kReportSchema}, {"tool", {{"name", "fwmnet"}, {"version", kVersion}}}, {"command", command},
          {"config", config}};
}

/// One row per eigenmode, one column per output mode: the bar-chart layout.
inline std::string modes_csv(const EigenmodeBasis<double>& b, const ModeClassification& cls) {
  std::ostringstream os;
  os << "eigenmode,eta,db,tag";
  for (const auto& l : b.labels) os << ',' << l;
  os << '\n';
  for (Eigen::Index k = 0; k < b.eta.size(); ++k) {
    os << k + 1 << ',' << format_number(b.eta(k)) << ',' << format_number(cls.squeezing_db[k]) << ','
       << to_string(cls.tags[k]);
    for (Eigen::Index r = 0; r < b.u0.rows(); ++r) os << ',' << format_number(b.u0(r, k));
    os << '\n';
  }
  return os.str();
}

inline std::string nullifiers_csv(const NullifierReport& r) {
  std::ostringstream os;
  os << "nullifier,raw,sql,normalized,below_shot_noise\n";
  for (Eigen::Index i = 0; i < r.normalized.size(); ++i) {
    os << i + 1 << ',' << format_number(r.raw_variance(i)) << ',' << format_number(r.sql(i)) << ','
       << format_number(r.normalized(i)) << ',' << (r.normalized(i) < 1.0 ? "true" : "false") << '\n';
  }
  return os.str();
}

inline std::string trace_csv(const std::vector<TraceEntry>& trace) {
  std::ostringstream os;
  os << "restart,generation,best,sigma\n";
  for (const auto& e : trace) {
    os << e.restart << ',' << e.generation << ',' << format_number(e.best) << ',' << format_number(e.sigma) << '\n';
  }
  return os.str();
}

inline std::string covariance_csv(const CovarianceMatrix<double>& c) {
  std::ostringstream os;
  os << "block,row";
  for (const auto& l : c.labels) os << ',' << l;
  os << '\n';
  for (int b = 0; b < 2; ++b) {
    const RealMatrix& m = b == 0 ? c.cxx : c.cpp;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      os << (b == 0 ? "xx" : "pp") << ',' << c.labels[static_cast<std::size_t>(i)];
      for (Eigen::Index j = 0; j < m.cols(); ++j) os << ',' << format_number(m(i, j));
      os << '\n';
    }
  }
  return os.str();
}

struct VerifyReport {
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

/// Re-checks a solution document: unit-modulus phases, orthogonal O_post and
/// orientation, W = O_post·P_homo·U0·P_sqz, unitary W, and nullifiers and
/// residual recomputed from the stored matrices. Accepts a solution or a
/// report with a "synthesis" section. Malformed documents throw ConfigError.
inline VerifyReport verify_solution(const Json& doc) {
  const Json& sol = doc.contains("synthesis") ? doc.at("synthesis") : doc;
  const std::string root = doc.contains("synthesis") ? "synthesis" : "";
  auto field = [&](const char* key) -> const Json& { return io::require(sol, key, root); };
  auto path = [&](const char* key) { return io::join(root, key); };

  const AdjacencyMatrix graph = graph_from_json(field("graph"));
  const RealVector eta = vector_from_json(field("eta"), path("eta"));
  const RealMatrix u0 = matrix_from_json(field("u0"), path("u0"));
  const RealVector squeeze_x = vector_from_json(field("squeeze_x"), path("squeeze_x"));
  const ComplexMatrix target = complex_matrix_from_json(field("target_uv"), path("target_uv"));
  const RealMatrix orientation = matrix_from_json(field("orientation"), path("orientation"));
  const RealVector phases = vector_from_json(field("phases"), path("phases"));
  const RealMatrix o_post = matrix_from_json(field("o_post"), path("o_post"));
  const double residual = io::number(field("residual"), path("residual"));
  const ComplexMatrix w = complex_matrix_from_json(field("achieved_w"), path("achieved_w"));
  const Json& nj = field("nullifiers");
  const RealVector raw = vector_from_json(io::require(nj, "raw", path("nullifiers")), path("nullifiers.raw"));
  const RealVector sql = vector_from_json(io::require(nj, "sql", path("nullifiers")), path("nullifiers.sql"));
  const RealVector normalized =
      vector_from_json(io::require(nj, "normalized", path("nullifiers")), path("nullifiers.normalized"));

  const Eigen::Index n = graph.size();
  auto square = [n](const auto& m) { return m.rows() == n && m.cols() == n; };
  if (eta.size() != n || squeeze_x.size() != n || phases.size() != n || raw.size() != n || sql.size() != n ||
      normalized.size() != n || !square(u0) || !square(target) || !square(orientation) || !square(o_post) ||
      !square(w)) {
    throw ConfigError(root.empty() ? "<root>: matrix dimensions disagree with graph size"
                                   : root + ": matrix dimensions disagree with graph size");
  }

  VerifyReport rep;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) rep.failures.push_back(what);
  };
  auto close = [](double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); };

  bool eta_ok = (eta.array() > 0.0).all();
  check(eta_ok, "eta: all eigenvalues must be positive");
  check(orthogonality_deviation(u0) <= 1e-8, "u0: not orthogonal");
  if (eta_ok) {
    const RealVector expected = squeeze_factors(eta);
    bool match = true;
    for (Eigen::Index k = 0; k < n; ++k) match = match && close(squeeze_x(k), expected(k), 1e-9);
    check(match, "squeeze_x: does not equal max(eta, 1/eta)");
  }
  ComplexVector p(n);
  bool unit = true;
  for (Eigen::Index k = 0; k < n; ++k) {
    p(k) = std::polar(1.0, phases(k));
    unit = unit && std::abs(std::abs(p(k)) - 1.0) <= 1e-10;
  }
  check(unit, "phases: P_homo entries are not unit modulus");
  check(orthogonality_deviation(o_post) <= kOrthogonalityTolerance, "o_post: not orthogonal");
  check(orthogonality_deviation(orientation) <= kOrthogonalityTolerance, "orientation: not orthogonal");
  const double w_dev = unitarity_deviation(w);
  check(w_dev <= kUnitarityTolerance, "achieved_w: not unitary");

  if (eta_ok) {
    const ComplexMatrix r = u0.cast<Complex>() * squeezer_phases(eta).asDiagonal();
    const ComplexMatrix rebuilt = o_post.cast<Complex>() * p.asDiagonal() * r;
    check(max_abs(rebuilt - w) <= 1e-9, "achieved_w: does not equal o_post·P_homo·u0·P_sqz");
    if (orthogonality_deviation(orientation) <= kOrthogonalityTolerance) {
      const ComplexMatrix u = detail::uprime(orientation, target, r);
      check(close(detail::off_diagonal_weight(u.transpose() * u), residual, 1e-9),
            "residual: does not match the stored orientation and target");
    }
  }

  if (w_dev <= kUnitarityTolerance && (squeeze_x.array() >= 1.0).all()) {
    const NullifierReport again = nullifier_variances(w, squeeze_x, graph);
    bool match = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      match = match && close(again.raw_variance(i), raw(i), 1e-9) && close(again.sql(i), sql(i), 1e-9) &&
              close(again.normalized(i), normalized(i), 1e-9);
    }
    check(match, "nullifiers: stored values differ from those recomputed from achieved_w");
  } else {
    check(false, "nullifiers: cannot recompute (invalid achieved_w or squeeze_x)");
  }
  if (auto it = sol.find("feasible"); it != sol.end() && it->is_boolean()) {
    check(it->get<bool>() == (normalized.array() < 1.0).all(), "feasible: flag disagrees with nullifiers");
  }
  return rep;
}

}  // namespace fwmnet
