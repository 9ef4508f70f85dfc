#pragma once

// Ideal four-wave-mixing cells as linear maps on quadratures.
//
// Conventions: X = a + a†, P = i(a† − a), vacuum variance 1. A cell with
// amplitude gain G and cross gain g = sqrt(G² − 1) maps its (seed, vacuum)
// inputs to (amplified, generated) outputs:
//
//   X: [[G, g], [g, G]]      P: [[G, −g], [−g, G]]
//
// A cascade is a list of cells. Each cell consumes one live mode (the external
// input or an output of an earlier cell) plus a fresh vacuum, so a cascade of
// n cells has n + 1 modes. Input slots are ordered (input, vacuum of cell 1,
// vacuum of cell 2, ...).

#include "fwmnet/errors.hpp"
#include "fwmnet/linalg.hpp"

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace fwmnet {

inline constexpr const char* kExternalInput = "input";

class Gain {
 public:
  Gain() = default;

  /// Throws DomainError unless G is finite and ≥ 1.
  explicit Gain(double amplitude) : amplitude_(amplitude) {
    if (!std::isfinite(amplitude) || amplitude < 1.0) {
      throw DomainError("gain must be a finite number >= 1, got " + std::to_string(amplitude));
    }
  }

  double amplitude() const noexcept { return amplitude_; }

  /// g = sqrt(G² − 1), evaluated in the requested precision.
  template <typename T = double>
  T cross() const {
    const T G = static_cast<T>(amplitude_);
    return std::sqrt((G - T(1)) * (G + T(1)));
  }

 private:
  double amplitude_ = 1.0;
};

struct FwmCell {
  Gain gain;
  std::string seed = kExternalInput;
};

/// Validated cascade wiring. Output modes are named after the cell that emits
/// them: cell k (1-based) produces `s<k>` and `i<k>`. The amplified seed keeps
/// the seed's type (signal for the external input and `s*` seeds, idler for
/// `i*` seeds); the generated beam takes the other type. This reproduces the
/// usual names: the two-cell chain emits (s1, i2, s2) and the symmetric tree
/// emits (s3, i2, s2, i3).
class CascadeTopology {
 public:
  CascadeTopology(std::vector<FwmCell> cells, std::vector<std::string> labels = {})
      : cells_(std::move(cells)) {
    resolve(std::move(labels));
  }

  /// Two cells; the idler of the first seeds the second. Outputs (s1, i2, s2).
  static CascadeTopology chain2(Gain g1, Gain g2) {
    return CascadeTopology({{g1, kExternalInput}, {g2, "i1"}}, {"s1", "i2", "s2"});
  }

  /// Three equal-gain cells; signal and idler of the first seed the other two.
  /// Outputs (s3, i2, s2, i3).
  static CascadeTopology tree3(Gain g) {
    return CascadeTopology({{g, kExternalInput}, {g, "i1"}, {g, "s1"}}, {"s3", "i2", "s2", "i3"});
  }

  /// Asymmetric chain: every cell after the first is seeded by the beam the
  /// previous cell generated. With two gains this is chain2.
  static CascadeTopology chain(const std::vector<Gain>& gains) {
    if (gains.empty()) throw TopologyError("cells: a cascade needs at least one cell");
    std::vector<FwmCell> cells;
    std::string seed = kExternalInput;
    char seed_type = 's';
    for (std::size_t k = 0; k < gains.size(); ++k) {
      cells.push_back({gains[k], seed});
      const char generated = seed_type == 's' ? 'i' : 's';
      seed = std::string(1, generated) + std::to_string(k + 1);
      seed_type = generated;
    }
    return CascadeTopology(std::move(cells));
  }

  const std::vector<FwmCell>& cells() const noexcept { return cells_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::size_t mode_count() const noexcept { return cells_.size() + 1; }

  /// Input slot consumed as seed by each cell, and the slot now holding each label.
  std::size_t seed_slot(std::size_t cell) const { return seed_slots_.at(cell); }
  std::size_t slot_of(const std::string& label) const { return label_slots_.at(label); }

  /// Same wiring with new gains (one per cell).
  CascadeTopology with_gains(const std::vector<Gain>& gains) const {
    if (gains.size() != cells_.size()) {
      throw ConfigError("gain: expected " + std::to_string(cells_.size()) + " gains, got " +
                        std::to_string(gains.size()));
    }
    std::vector<FwmCell> cells = cells_;
    for (std::size_t k = 0; k < cells.size(); ++k) cells[k].gain = gains[k];
    return CascadeTopology(std::move(cells), labels_);
  }

 private:
  void resolve(std::vector<std::string> labels) {
    if (cells_.empty()) throw TopologyError("cells: a cascade needs at least one cell");
    // live label -> (slot, type)
    std::map<std::string, std::pair<std::size_t, char>> live{{kExternalInput, {0, 's'}}};
    std::set<std::string> consumed;
    std::vector<std::string> creation_order;
    for (std::size_t k = 0; k < cells_.size(); ++k) {
      const std::string path = "cells[" + std::to_string(k) + "].seed";
      const std::string& seed = cells_[k].seed;
      auto it = live.find(seed);
      if (it == live.end()) {
        if (consumed.count(seed) != 0) {
          throw TopologyError(path + ": mode '" + seed + "' is already consumed by an earlier cell");
        }
        throw TopologyError(path + ": '" + seed +
                            "' is neither the external input nor an output of an earlier cell");
      }
      const auto [slot, type] = it->second;
      live.erase(it);
      consumed.insert(seed);
      seed_slots_.push_back(slot);

      const std::string index = std::to_string(k + 1);
      const char other = type == 's' ? 'i' : 's';
      const std::string amplified = std::string(1, type) + index;
      const std::string generated = std::string(1, other) + index;
      live[amplified] = {slot, type};
      live[generated] = {k + 1, other};
      creation_order.push_back(amplified);
      creation_order.push_back(generated);
    }

    for (const auto& [label, entry] : live) label_slots_[label] = entry.first;

    if (labels.empty()) {
      for (const auto& name : creation_order) {
        if (live.count(name) != 0) labels.push_back(name);
      }
    } else {
      if (labels.size() != live.size()) {
        throw TopologyError("labels: expected " + std::to_string(live.size()) +
                            " output labels, got " + std::to_string(labels.size()));
      }
      std::set<std::string> seen;
      for (std::size_t j = 0; j < labels.size(); ++j) {
        const std::string path = "labels[" + std::to_string(j) + "]";
        if (live.count(labels[j]) == 0) {
          throw TopologyError(path + ": '" + labels[j] + "' is not an output mode of this cascade");
        }
        if (!seen.insert(labels[j]).second) {
          throw TopologyError(path + ": duplicate label '" + labels[j] + "'");
        }
      }
    }
    labels_ = std::move(labels);
  }

  std::vector<FwmCell> cells_;
  std::vector<std::string> labels_;
  std::vector<std::size_t> seed_slots_;
  std::map<std::string, std::size_t> label_slots_;
};

/// Paired real matrices acting on X and P quadratures; rows are output modes
/// (named by `labels`), columns are input slots.
template <typename T = double>
struct QuadratureTransform {
  Matrix<T> ux;
  Matrix<T> up;
  std::vector<std::string> labels;

  Eigen::Index modes() const { return ux.rows(); }
};

/// Second moments of a zero-mean Gaussian state with decoupled X and P.
template <typename T = double>
struct CovarianceMatrix {
  Matrix<T> cxx;
  Matrix<T> cpp;
  std::vector<std::string> labels;

  Eigen::Index modes() const { return cxx.rows(); }
};

template <typename T>
T symplectic_deviation(const QuadratureTransform<T>& t) {
  return identity_deviation(t.ux * t.up.transpose());
}

template <typename T = double>
QuadratureTransform<T> fwm_transform(const Gain& gain) {
  const T G = static_cast<T>(gain.amplitude());
  const T g = gain.cross<T>();
  QuadratureTransform<T> t;
  t.ux.resize(2, 2);
  t.up.resize(2, 2);
  t.ux << G, g, g, G;
  t.up << G, -g, -g, G;
  t.labels = {"s1", "i1"};
  return t;
}

/// Composes the per-cell two-mode maps, each embedded in the full mode space
/// and acting as identity elsewhere, then orders rows by the topology labels.
template <typename T = double>
QuadratureTransform<T> build_cascade(const CascadeTopology& topology) {
  const Eigen::Index n = static_cast<Eigen::Index>(topology.mode_count());
  Matrix<T> ux = Matrix<T>::Identity(n, n);
  Matrix<T> up = Matrix<T>::Identity(n, n);

  for (std::size_t k = 0; k < topology.cells().size(); ++k) {
    const auto seed = static_cast<Eigen::Index>(topology.seed_slot(k));
    const auto vac = static_cast<Eigen::Index>(k + 1);
    const QuadratureTransform<T> cell = fwm_transform<T>(topology.cells()[k].gain);
    Matrix<T> ex = Matrix<T>::Identity(n, n);
    Matrix<T> ep = Matrix<T>::Identity(n, n);
    const Eigen::Index idx[2] = {seed, vac};
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        ex(idx[a], idx[b]) = cell.ux(a, b);
        ep(idx[a], idx[b]) = cell.up(a, b);
      }
    }
    ux = ex * ux;
    up = ep * up;
  }

  QuadratureTransform<T> out;
  out.ux.resize(n, n);
  out.up.resize(n, n);
  for (Eigen::Index row = 0; row < n; ++row) {
    const auto& label = topology.labels()[static_cast<std::size_t>(row)];
    const auto slot = static_cast<Eigen::Index>(topology.slot_of(label));
    out.ux.row(row) = ux.row(slot);
    out.up.row(row) = up.row(slot);
  }
  out.labels = topology.labels();
  return out;
}

/// Vacuum and coherent inputs have unit variance, so C = U·Uᵀ per block.
template <typename T>
CovarianceMatrix<T> covariance(const QuadratureTransform<T>& t) {
  CovarianceMatrix<T> c;
  const Matrix<T> cxx = t.ux * t.ux.transpose();
  const Matrix<T> cpp = t.up * t.up.transpose();
  c.cxx = (cxx + cxx.transpose()) / T(2);
  c.cpp = (cpp + cpp.transpose()) / T(2);
  c.labels = t.labels;
  return c;
}

template <typename T = double>
struct BogoliubovBlocks {
  Matrix<std::complex<T>> a;
  Matrix<std::complex<T>> b;
};

/// Annihilation-operator form a' = A·a + B·a†.
template <typename T>
BogoliubovBlocks<T> bogoliubov_blocks(const QuadratureTransform<T>& t) {
  const T dev = symplectic_deviation(t);
  if (!(dev <= T(1e-8))) {
    throw InconsistencyError("quadrature transform is not symplectic: |ux·upᵀ − I| = " +
                             std::to_string(static_cast<double>(dev)));
  }
  BogoliubovBlocks<T> blocks;
  blocks.a = ((t.ux + t.up) / T(2)).template cast<std::complex<T>>();
  blocks.b = ((t.ux - t.up) / T(2)).template cast<std::complex<T>>();
  return blocks;
}

}  // namespace fwmnet
