#ifndef VSTOP_METRICS_HPP
#define VSTOP_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "vstop/core.hpp"

namespace vstop {

/// Normalization constant for the normalized generalized Levenshtein
/// distance. `alpha` must bound the per-character distance from above;
/// under the halved taxicab metric below the bound is 1.
struct MetricConfig {
  double alpha = 1.0;
};

/// Halved taxicab (L1) distance between two character distributions,
/// taken over the union of their supports. Ranges over [0, 1]; equals 1
/// exactly for distributions with disjoint support.
inline double char_distance(const CharDistribution& u,
                            const CharDistribution& v) {
  // Merge over label-sorted copies so the cost is k log k in the support
  // sizes rather than quadratic; integrated rows can grow dense.
  thread_local std::vector<CharDistribution::Entry> a, b;
  a.assign(u.entries().begin(), u.entries().end());
  b.assign(v.entries().begin(), v.entries().end());
  const auto by_label = [](const CharDistribution::Entry& x,
                           const CharDistribution::Entry& y) {
    return x.first < y.first;
  };
  std::sort(a.begin(), a.end(), by_label);
  std::sort(b.begin(), b.end(), by_label);
  double acc = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first < b[j].first) {
      acc += a[i++].second;
    } else if (b[j].first < a[i].first) {
      acc += b[j++].second;
    } else {
      acc += std::abs(a[i++].second - b[j++].second);
    }
  }
  for (; i < a.size(); ++i) acc += a[i].second;
  for (; j < b.size(); ++j) acc += b[j].second;
  return 0.5 * acc;
}

/// Distance of a row to the pure gap symbol; the insertion/deletion cost
/// in the generalized edit distance.
inline double gap_cost(const CharDistribution& u) {
  static const CharDistribution eps = CharDistribution::one_hot(kEpsilon);
  return char_distance(u, eps);
}

/// Generalized Levenshtein distance between alternatives matrices.
/// Substitution costs char_distance, insertion/deletion cost the distance
/// to a one-hot gap row. Two-row dynamic program.
inline double gld(const AlternativesMatrix& x, const AlternativesMatrix& y) {
  const std::size_t nx = x.length();
  const std::size_t ny = y.length();
  std::vector<double> prev(ny + 1), cur(ny + 1);
  prev[0] = 0.0;
  for (std::size_t j = 1; j <= ny; ++j) {
    prev[j] = prev[j - 1] + gap_cost(y.positions[j - 1]);
  }
  for (std::size_t i = 1; i <= nx; ++i) {
    const double del = gap_cost(x.positions[i - 1]);
    cur[0] = prev[0] + del;
    for (std::size_t j = 1; j <= ny; ++j) {
      const double sub =
          prev[j - 1] + char_distance(x.positions[i - 1], y.positions[j - 1]);
      const double ins = cur[j - 1] + gap_cost(y.positions[j - 1]);
      cur[j] = std::min({sub, ins, prev[j] + del});
    }
    std::swap(prev, cur);
  }
  return prev[ny];
}

/// Normalized generalized Levenshtein distance,
/// rho = 2*GLD / (alpha*(|x|+|y|) + GLD), with rho(empty, empty) = 0.
/// A metric in [0, 1] whenever alpha bounds the character distance.
inline double rho(const AlternativesMatrix& x, const AlternativesMatrix& y,
                  const MetricConfig& cfg = {}) {
  if (x.empty() && y.empty()) return 0.0;
  const double g = gld(x, y);
  return 2.0 * g / (cfg.alpha * static_cast<double>(x.length() + y.length()) + g);
}

}  // namespace vstop

#endif  // VSTOP_METRICS_HPP
