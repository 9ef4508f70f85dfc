#pragma once

// JSON documents: cascade topologies, cluster graphs, and matrix encodings.
// Parse errors throw ConfigError whose message starts with the offending
// field path, e.g. "cells[1].gain: expected a number".

#include "fwmnet/cluster.hpp"
#include "fwmnet/errors.hpp"
#include "fwmnet/linalg.hpp"
#include "fwmnet/symplectic.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fwmnet {

using Json = nlohmann::json;

inline constexpr const char* kTopologySchema = "fwmnet/topology/v1";
inline constexpr const char* kGraphSchema = "fwmnet/graph/v1";

namespace io {

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path + ": invalid JSON (" + std::string(e.what()) + ")");
  }
}

inline const Json& require(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ConfigError((path.empty() ? "<root>" : path) + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError((path.empty() ? "" : path + ".") + key + ": missing field");
  return *it;
}

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline std::string index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

inline double number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path + ": expected a finite number");
  return v;
}

inline int integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path + ": expected an integer");
  return j.get<int>();
}

inline std::string string(const Json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path + ": expected a string");
  return j.get<std::string>();
}

inline const Json& array(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + ": expected an array");
  return j;
}

}  // namespace io

/// {"cells": [{"gain": 1.2, "seed": "input"}, ...], "labels": [...]}; labels optional.
inline CascadeTopology topology_from_json(const Json& doc) {
  const Json& cells_json = io::array(io::require(doc, "cells", ""), "cells");
  std::vector<FwmCell> cells;
  for (std::size_t k = 0; k < cells_json.size(); ++k) {
    const std::string path = io::index("cells", k);
    const Json& c = cells_json[k];
    const double g = io::number(io::require(c, "gain", path), path + ".gain");
    if (g < 1.0) throw ConfigError(path + ".gain: must be >= 1, got " + std::to_string(g));
    FwmCell cell;
    cell.gain = Gain(g);
    cell.seed = io::string(io::require(c, "seed", path), path + ".seed");
    cells.push_back(std::move(cell));
  }
  std::vector<std::string> labels;
  if (auto it = doc.find("labels"); it != doc.end()) {
    const Json& arr = io::array(*it, "labels");
    for (std::size_t j = 0; j < arr.size(); ++j) labels.push_back(io::string(arr[j], io::index("labels", j)));
  }
  return CascadeTopology(std::move(cells), std::move(labels));
}

inline Json topology_to_json(const CascadeTopology& t) {
  Json cells = Json::array();
  for (const auto& c : t.cells()) cells.push_back({{"gain", c.gain.amplitude()}, {"seed", c.seed}});
  return {{"schema", kTopologySchema}, {"cells", cells}, {"labels", t.labels()}};
}

/// {"n": 4, "edges": [[1, 2, 1.0], [2, 3], ...]}: 1-based nodes, weight defaults to 1.
inline AdjacencyMatrix graph_from_json(const Json& doc) {
  const int n = io::integer(io::require(doc, "n", ""), "n");
  if (n < 1) throw ConfigError("n: must be a positive integer");
  const Json& edges_json = io::array(io::require(doc, "edges", ""), "edges");
  std::vector<AdjacencyMatrix::Edge> edges;
  for (std::size_t k = 0; k < edges_json.size(); ++k) {
    const std::string path = io::index("edges", k);
    const Json& e = io::array(edges_json[k], path);
    if (e.size() != 2 && e.size() != 3) throw ConfigError(path + ": expected [a, b] or [a, b, weight]");
    AdjacencyMatrix::Edge edge;
    edge.a = io::integer(e[0], io::index(path, 0));
    edge.b = io::integer(e[1], io::index(path, 1));
    for (int side = 0; side < 2; ++side) {
      const int node = side == 0 ? edge.a : edge.b;
      if (node < 1 || node > n) {
        throw ConfigError(io::index(path, static_cast<std::size_t>(side)) + ": node " + std::to_string(node) +
                          " outside 1.." + std::to_string(n));
      }
    }
    if (edge.a == edge.b) throw ConfigError(path + ": self-loops are not allowed");
    if (e.size() == 3) edge.weight = io::number(e[2], io::index(path, 2));
    edges.push_back(edge);
  }
  return AdjacencyMatrix::from_edges(n, edges);
}

inline Json graph_to_json(const AdjacencyMatrix& g) {
  Json edges = Json::array();
  const RealMatrix& v = g.matrix();
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (Eigen::Index j = i + 1; j < v.cols(); ++j)
      if (v(i, j) != 0.0) edges.push_back({i + 1, j + 1, v(i, j)});
  return {{"schema", kGraphSchema}, {"n", v.rows()}, {"edges", edges}};
}

template <typename Derived>
Json matrix_to_json(const Eigen::MatrixBase<Derived>& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(static_cast<double>(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename Derived>
Json vector_to_json(const Eigen::MatrixBase<Derived>& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(static_cast<double>(v(i)));
  return out;
}

inline Json complex_matrix_to_json(const ComplexMatrix& m) {
  return {{"re", matrix_to_json(RealMatrix(m.real()))}, {"im", matrix_to_json(RealMatrix(m.imag()))}};
}

inline RealMatrix matrix_from_json(const Json& j, const std::string& path) {
  const Json& rows = io::array(j, path);
  if (rows.empty()) return RealMatrix(0, 0);
  const std::size_t cols = io::array(rows[0], io::index(path, 0)).size();
  RealMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Json& row = io::array(rows[i], io::index(path, i));
    if (row.size() != cols) throw ConfigError(io::index(path, i) + ": ragged matrix row");
    for (std::size_t k = 0; k < cols; ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          io::number(row[k], io::index(io::index(path, i), k));
    }
  }
  return m;
}

inline RealVector vector_from_json(const Json& j, const std::string& path) {
  const Json& arr = io::array(j, path);
  RealVector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = io::number(arr[i], io::index(path, i));
  return v;
}

inline ComplexMatrix complex_matrix_from_json(const Json& j, const std::string& path) {
  const RealMatrix re = matrix_from_json(io::require(j, "re", path), io::join(path, "re"));
  const RealMatrix im = matrix_from_json(io::require(j, "im", path), io::join(path, "im"));
  if (re.rows() != im.rows() || re.cols() != im.cols()) {
    throw ConfigError(path + ": re and im parts differ in shape");
  }
  ComplexMatrix m(re.rows(), re.cols());
  m.real() = re;
  m.imag() = im;
  return m;
}

/// 17 significant digits: enough to round-trip any double.
inline std::string format_number(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace fwmnet
