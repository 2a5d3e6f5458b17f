#ifndef VSTOP_COMBINATION_HPP
#define VSTOP_COMBINATION_HPP

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "vstop/core.hpp"
#include "vstop/metrics.hpp"

namespace vstop {

/// Running combination of per-frame alternatives matrices into an
/// integrated result: each new observation is aligned against the current
/// composite by a minimal-cost edit script under char_distance (gap
/// symbol epsilon), then averaged in. Positions absent from an
/// observation contribute gap mass, so the composite rows stay
/// row-stochastic after division by the observation count.
class Accumulator {
public:
  struct Aggregate {
    // Accumulated (unnormalized) weight per label, sorted by label.
    std::vector<std::pair<char32_t, double>> sums;
    // Observations that contributed a non-gap row at this position.
    std::size_t support_count = 0;

    void add_weight(char32_t label, double w) {
      auto it = std::lower_bound(
          sums.begin(), sums.end(), label,
          [](const auto& e, char32_t l) { return e.first < l; });
      if (it != sums.end() && it->first == label) {
        it->second += w;
      } else {
        sums.insert(it, {label, w});
      }
    }

    void add_row(const CharDistribution& row) {
      for (const auto& [label, w] : row.entries()) add_weight(label, w);
      ++support_count;
    }

    CharDistribution mean(std::size_t n) const {
      std::vector<CharDistribution::Entry> entries;
      entries.reserve(sums.size());
      for (const auto& [label, w] : sums) {
        entries.emplace_back(label, w / static_cast<double>(n));
      }
      return CharDistribution(std::move(entries));
    }
  };

  std::size_t n_observations() const { return n_; }
  const std::vector<Aggregate>& composite() const { return composite_; }

  /// Folds one observation into the composite.
  void push(const AlternativesMatrix& x) {
    if (n_ == 0) {
      composite_.reserve(x.length());
      for (const auto& row : x.positions) {
        Aggregate agg;
        agg.add_row(row);
        composite_.push_back(std::move(agg));
      }
      n_ = 1;
      return;
    }

    const std::vector<Op> script = align(x);
    std::vector<Aggregate> next;
    next.reserve(script.size());
    std::size_t ci = 0, xi = 0;
    for (const Op op : script) {
      switch (op) {
        case Op::Match: {
          Aggregate agg = std::move(composite_[ci++]);
          agg.add_row(x.positions[xi++]);
          next.push_back(std::move(agg));
          break;
        }
        case Op::DropComposite: {
          Aggregate agg = std::move(composite_[ci++]);
          agg.add_weight(kEpsilon, 1.0);
          next.push_back(std::move(agg));
          break;
        }
        case Op::Insert: {
          Aggregate agg;
          agg.add_weight(kEpsilon, static_cast<double>(n_));
          agg.add_row(x.positions[xi++]);
          next.push_back(std::move(agg));
          break;
        }
      }
    }
    composite_ = std::move(next);
    ++n_;
  }

  /// Current integrated result R_n.
  AlternativesMatrix integrated() const {
    if (n_ == 0) {
      throw std::logic_error("Accumulator: integrated() on empty accumulator");
    }
    AlternativesMatrix out;
    out.positions.reserve(composite_.size());
    for (const auto& agg : composite_) out.positions.push_back(agg.mean(n_));
    return out;
  }

  /// Modeled next result R(x_1, ..., x_n, x) without mutating this
  /// accumulator.
  AlternativesMatrix combine_with(const AlternativesMatrix& x) const {
    if (n_ == 0) {
      throw std::logic_error("Accumulator: combine_with() on empty accumulator");
    }
    Accumulator copy = *this;
    copy.push(x);
    return copy.integrated();
  }

private:
  enum class Op { Match, DropComposite, Insert };

  // Minimal-cost alignment of x against the composite means. Ties prefer
  // match/substitution, then insertion, then dropping a composite
  // position, which keeps the script deterministic.
  std::vector<Op> align(const AlternativesMatrix& x) const {
    const std::size_t mc = composite_.size();
    const std::size_t mx = x.length();
    std::vector<CharDistribution> means;
    means.reserve(mc);
    for (const auto& agg : composite_) means.push_back(agg.mean(n_));
    std::vector<double> drop_cost(mc), ins_cost(mx);
    for (std::size_t i = 0; i < mc; ++i) drop_cost[i] = gap_cost(means[i]);
    for (std::size_t j = 0; j < mx; ++j) ins_cost[j] = gap_cost(x.positions[j]);

    std::vector<std::vector<double>> d(mc + 1, std::vector<double>(mx + 1));
    for (std::size_t i = 1; i <= mc; ++i) d[i][0] = d[i - 1][0] + drop_cost[i - 1];
    for (std::size_t j = 1; j <= mx; ++j) d[0][j] = d[0][j - 1] + ins_cost[j - 1];
    for (std::size_t i = 1; i <= mc; ++i) {
      for (std::size_t j = 1; j <= mx; ++j) {
        const double sub =
            d[i - 1][j - 1] + char_distance(means[i - 1], x.positions[j - 1]);
        const double ins = d[i][j - 1] + ins_cost[j - 1];
        const double drop = d[i - 1][j] + drop_cost[i - 1];
        d[i][j] = std::min({sub, ins, drop});
      }
    }

    std::vector<Op> script;
    script.reserve(mc + mx);
    std::size_t i = mc, j = mx;
    while (i > 0 || j > 0) {
      if (i > 0 && j > 0 &&
          d[i][j] == d[i - 1][j - 1] +
                         char_distance(means[i - 1], x.positions[j - 1])) {
        script.push_back(Op::Match);
        --i;
        --j;
      } else if (j > 0 && d[i][j] == d[i][j - 1] + ins_cost[j - 1]) {
        script.push_back(Op::Insert);
        --j;
      } else {
        script.push_back(Op::DropComposite);
        --i;
      }
    }
    std::reverse(script.begin(), script.end());
    return script;
  }

  std::vector<Aggregate> composite_;
  std::size_t n_ = 0;
};

}  // namespace vstop

#endif  // VSTOP_COMBINATION_HPP
