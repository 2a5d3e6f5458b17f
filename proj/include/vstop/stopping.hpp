#ifndef VSTOP_STOPPING_HPP
#define VSTOP_STOPPING_HPP

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "vstop/combination.hpp"
#include "vstop/core.hpp"
#include "vstop/metrics.hpp"

namespace vstop {

/// Thresholds of the next-result-modelling rule: stop once the modeled
/// expected change of the integrated result drops to the observation
/// cost.
struct DeltaPolicyParams {
  double cost = 0.0;
  double delta = 0.1;
  std::size_t min_stage = 1;
};

/// The three thresholds of the clustering rules.
struct ClusterPolicyParams {
  std::size_t min_cluster_size = 1;
  double min_confidence = 0.0;
  double min_confidence_gap = 0.0;
};

/// One length-cluster of observations.
struct ClusterSummary {
  std::size_t length = 0;  // shared argmax length M(C)
  std::size_t size = 0;    // number of members
  double confidence = 0.0;
};

/// Estimate of the expected distance between the current integrated result
/// and the next one:
///   (delta + sum_i rho(R_n, R(x_1..x_n, x_i))) / (n + 1).
inline double delta_hat(const Accumulator& acc,
                        const std::vector<AlternativesMatrix>& history,
                        double delta, const MetricConfig& cfg = {}) {
  if (history.empty()) {
    throw std::invalid_argument("delta_hat: empty history");
  }
  const AlternativesMatrix current = acc.integrated();
  double sum = delta;
  for (const auto& x : history) {
    sum += rho(current, acc.combine_with(x), cfg);
  }
  return sum / static_cast<double>(history.size() + 1);
}

inline StoppingDecision policy_n_delta(
    const DeltaPolicyParams& params, const Accumulator& acc,
    const std::vector<AlternativesMatrix>& history,
    const MetricConfig& cfg = {}) {
  const double stat = delta_hat(acc, history, params.delta, cfg);
  const bool stop =
      history.size() >= params.min_stage && stat <= params.cost;
  return {stop ? Verdict::Stop : Verdict::Continue, stat};
}

/// Position top-weights counted towards Eq.-style confidence: only
/// positions whose argmax is a real character, so the count matches the
/// argmax length used for clustering.
inline double min_max_weight(const AlternativesMatrix& x) {
  double m = 1.0;
  bool any = false;
  for (const auto& pos : x.positions) {
    if (pos.top_label() == kEpsilon) continue;
    m = std::min(m, pos.top_weight());
    any = true;
  }
  return any ? m : 0.0;
}

/// Cluster confidence: Q = 1 - prod over members of
/// (1 - min over positions of the top class weight). Empty-string members
/// carry no character evidence, so a length-0 cluster has Q = 0.
inline double cluster_confidence(const std::vector<AlternativesMatrix>& members) {
  double prod = 1.0;
  for (const auto& x : members) {
    prod *= 1.0 - min_max_weight(x);
  }
  return 1.0 - prod;
}

/// Groups items by argmax-string length and summarizes each cluster.
/// Returned clusters are ordered by decreasing size, ties by higher
/// confidence, then by smaller length.
inline std::vector<ClusterSummary> summarize_clusters(
    const std::vector<AlternativesMatrix>& items) {
  struct Bucket {
    std::size_t length;
    std::vector<AlternativesMatrix> members;
  };
  std::vector<Bucket> buckets;
  for (const auto& x : items) {
    const std::size_t len = argmax_string(x).size();
    auto it = std::find_if(buckets.begin(), buckets.end(),
                           [len](const Bucket& b) { return b.length == len; });
    if (it == buckets.end()) {
      buckets.push_back({len, {x}});
    } else {
      it->members.push_back(x);
    }
  }
  std::vector<ClusterSummary> out;
  out.reserve(buckets.size());
  for (const auto& b : buckets) {
    const double q = b.length == 0 ? 0.0 : cluster_confidence(b.members);
    out.push_back({b.length, b.members.size(), q});
  }
  std::sort(out.begin(), out.end(),
            [](const ClusterSummary& a, const ClusterSummary& b) {
              if (a.size != b.size) return a.size > b.size;
              if (a.confidence != b.confidence) return a.confidence > b.confidence;
              return a.length < b.length;
            });
  return out;
}

/// Triple-threshold decision over length clusters. Callers pass per-frame
/// results x_1..x_n for the N_CX variant or integrated results R_1..R_n
/// for N_CR; the rule itself is the same.
inline StoppingDecision policy_n_cluster(
    const ClusterPolicyParams& params,
    const std::vector<AlternativesMatrix>& items) {
  const auto clusters = summarize_clusters(items);
  if (clusters.empty()) return {Verdict::Continue, -1.0};
  const ClusterSummary& best = clusters.front();
  bool stop = best.size >= params.min_cluster_size &&
              best.confidence >= params.min_confidence;
  if (stop && clusters.size() >= 2) {
    stop = best.confidence - clusters[1].confidence >= params.min_confidence_gap;
  }
  return {stop ? Verdict::Stop : Verdict::Continue, best.confidence};
}

/// Fixed-count baseline: stop at the K-th observation.
inline StoppingDecision policy_n_k(std::size_t k, std::size_t stage) {
  return {stage >= k ? Verdict::Stop : Verdict::Continue,
          static_cast<double>(stage)};
}

}  // namespace vstop

#endif  // VSTOP_STOPPING_HPP
