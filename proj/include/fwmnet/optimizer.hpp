#pragma once

// (μ+λ) evolution strategy with isotropic Gaussian mutations and a geometric
// step-size schedule, plus the Givens-angle chart of SO(n) it searches over.

#include "fwmnet/errors.hpp"
#include "fwmnet/linalg.hpp"
#include "fwmnet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace fwmnet {

/// n with n(n−1)/2 == count; throws DomainError when count is not triangular.
inline Eigen::Index dimension_from_angle_count(std::size_t count) {
  Eigen::Index n = 1;
  while (static_cast<std::size_t>(n * (n - 1) / 2) < count) ++n;
  if (static_cast<std::size_t>(n * (n - 1) / 2) != count) {
    throw DomainError(std::to_string(count) + " angles do not parametrize SO(n) for any n");
  }
  return n;
}

inline std::size_t angle_count(Eigen::Index n) { return static_cast<std::size_t>(n * (n - 1) / 2); }

/// Product of Givens rotations over pairs (1,2), (1,3), ..., (n−1,n), in that
/// order. Each factor rotates the (i, j) plane: [[c, −s], [s, c]].
inline RealMatrix orthogonal_from_params(std::span<const double> angles) {
  const Eigen::Index n = dimension_from_angle_count(angles.size());
  RealMatrix o = RealMatrix::Identity(n, n);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j, ++k) {
      const double c = std::cos(angles[k]);
      const double s = std::sin(angles[k]);
      // o ← o · G(i, j): only columns i and j change.
      const RealVector ci = o.col(i);
      const RealVector cj = o.col(j);
      o.col(i) = c * ci + s * cj;
      o.col(j) = -s * ci + c * cj;
    }
  }
  return o;
}

struct EsConfig {
  int population = 64;
  int parents = 8;
  double sigma_init = 0.3;
  double sigma_decay = 0.995;
  int max_generations = 2000;
  int restarts = 10;
  double target = 1e-8;
  std::uint64_t seed = 0;

  void validate() const {
    auto fail = [](const std::string& field, const std::string& why) {
      throw ConfigError(field + ": " + why);
    };
    if (population < 1) fail("population", "must be a positive integer");
    if (parents < 1 || parents > population) fail("parents", "must lie in 1..population");
    if (!(sigma_init > 0.0) || !std::isfinite(sigma_init)) fail("sigma_init", "must be positive");
    if (!(sigma_decay > 0.0 && sigma_decay <= 1.0)) fail("sigma_decay", "must lie in (0, 1]");
    if (max_generations < 1) fail("max_generations", "must be a positive integer");
    if (restarts < 1) fail("restarts", "must be a positive integer");
    if (!(target >= 0.0)) fail("target", "must be non-negative");
  }
};

struct TraceEntry {
  int restart = 0;
  int generation = 0;
  double best = 0.0;
  double sigma = 0.0;

  bool operator==(const TraceEntry&) const = default;
};

struct EsResult {
  std::vector<double> best_params;
  double best_value = INFINITY;
  int best_restart = 0;
  /// Final best of each restart, in restart order.
  std::vector<std::vector<double>> restart_params;
  std::vector<double> restart_values;
  std::vector<TraceEntry> trace;
};

namespace detail {

// Generation index used for the stream that draws initial parents.
inline constexpr std::uint64_t kInitStream = 0xFFFFFFFFULL;

inline std::string format_params(std::span<const double> p) {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ']';
  return os.str();
}

template <typename Objective>
double evaluate(Objective& objective, const std::vector<double>& x) {
  const double value = objective(std::span<const double>(x));
  if (!std::isfinite(value)) {
    throw OptimizationError("objective returned a non-finite value at params " + format_params(x));
  }
  return value;
}

}  // namespace detail

/// Minimizes `objective(std::span<const double>) -> double` over R^dim.
///
/// Each restart starts from `parents` uniform points in [−π, π)^dim, or, when
/// `starts` has an entry for that restart, from copies of that point. Every
/// generation draws `population` children, child k mutating parent k mod
/// `parents`; the best `parents` of parents ∪ children survive (ties keep the
/// older point). Sigma decays geometrically; a restart stops early once its
/// best value is ≤ target. The best restart wins, ties to the lowest index.
template <typename Objective>
EsResult es_minimize(Objective&& objective, std::size_t dim, const EsConfig& config,
                     std::span<const std::vector<double>> starts = {}) {
  config.validate();
  using Member = std::pair<double, std::vector<double>>;
  EsResult result;
  const auto parents = static_cast<std::size_t>(config.parents);

  for (int r = 0; r < config.restarts; ++r) {
    std::vector<Member> elite;
    Xoshiro256 init = Xoshiro256::stream(config.seed, static_cast<std::uint64_t>(r), detail::kInitStream);
    const bool seeded = static_cast<std::size_t>(r) < starts.size();
    if (seeded && starts[static_cast<std::size_t>(r)].size() != dim) {
      throw ConfigError("es_minimize: start point dimension mismatch");
    }
    for (std::size_t p = 0; p < (seeded ? 1 : parents); ++p) {
      std::vector<double> x(dim);
      if (seeded) {
        x = starts[static_cast<std::size_t>(r)];
      } else {
        for (auto& xi : x) xi = init.uniform(-std::numbers::pi, std::numbers::pi);
      }
      const double value = detail::evaluate(objective, x);
      elite.emplace_back(value, std::move(x));
    }
    if (seeded) elite.resize(parents, elite.front());
    std::stable_sort(elite.begin(), elite.end(),
                     [](const Member& a, const Member& b) { return a.first < b.first; });

    double sigma = config.sigma_init;
    for (int gen = 0; gen < config.max_generations && dim > 0; ++gen) {
      if (elite.front().first <= config.target) break;
      Xoshiro256 rng = Xoshiro256::stream(config.seed, static_cast<std::uint64_t>(r),
                                          static_cast<std::uint64_t>(gen));
      std::vector<Member> pool = elite;
      pool.reserve(elite.size() + static_cast<std::size_t>(config.population));
      for (int k = 0; k < config.population; ++k) {
        std::vector<double> child = elite[static_cast<std::size_t>(k) % elite.size()].second;
        for (auto& xi : child) xi += sigma * rng.normal();
        const double value = detail::evaluate(objective, child);
        pool.emplace_back(value, std::move(child));
      }
      std::stable_sort(pool.begin(), pool.end(),
                       [](const Member& a, const Member& b) { return a.first < b.first; });
      pool.resize(parents);
      elite = std::move(pool);
      result.trace.push_back({r, gen, elite.front().first, sigma});
      sigma *= config.sigma_decay;
    }

    result.restart_values.push_back(elite.front().first);
    result.restart_params.push_back(elite.front().second);
    if (elite.front().first < result.best_value) {
      result.best_value = elite.front().first;
      result.best_params = elite.front().second;
      result.best_restart = r;
    }
  }
  return result;
}

}  // namespace fwmnet
