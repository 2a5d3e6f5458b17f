#ifndef VSTOP_EVALUATION_HPP
#define VSTOP_EVALUATION_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "vstop/combination.hpp"
#include "vstop/core.hpp"
#include "vstop/metrics.hpp"
#include "vstop/stopping.hpp"

namespace vstop {

/// What a stopping policy gets to see at stage n. Ground truth is absent
/// by construction.
struct StageInputs {
  const Accumulator& acc;
  const std::vector<AlternativesMatrix>& history;     // x_1..x_n
  const std::vector<AlternativesMatrix>& integrated;  // R_1..R_n
  std::size_t stage = 0;                              // n
};

using Policy = std::function<StoppingDecision(const StageInputs&)>;

inline Policy make_n_delta_policy(DeltaPolicyParams params,
                                  MetricConfig cfg = {}) {
  return [params, cfg](const StageInputs& in) {
    return policy_n_delta(params, in.acc, in.history, cfg);
  };
}

inline Policy make_n_cx_policy(ClusterPolicyParams params) {
  return [params](const StageInputs& in) {
    return policy_n_cluster(params, in.history);
  };
}

inline Policy make_n_cr_policy(ClusterPolicyParams params) {
  return [params](const StageInputs& in) {
    return policy_n_cluster(params, in.integrated);
  };
}

inline Policy make_n_k_policy(std::size_t k) {
  return [k](const StageInputs& in) { return policy_n_k(k, in.stage); };
}

struct StageRecord {
  std::u32string integrated_argmax;
  double distance = 0.0;   // rho(R_n, ground truth)
  double statistic = -1.0; // policy statistic, if any
};

struct EpisodeTrace {
  std::string clip_id;
  std::vector<StageRecord> stages;
  std::size_t stopping_stage = 0;  // 1-based
  double final_distance = 0.0;
};

/// Plays one clip against a policy: frames are pushed in order, the
/// policy is asked after each push, with a forced stop at the horizon.
inline EpisodeTrace run_episode(const ClipStream& clip, const Policy& policy,
                                const MetricConfig& cfg = {}) {
  const AlternativesMatrix truth = from_plain_string(clip.ground_truth);
  EpisodeTrace trace;
  trace.clip_id = clip.clip_id;
  Accumulator acc;
  std::vector<AlternativesMatrix> history;
  std::vector<AlternativesMatrix> integrated;
  for (std::size_t f = 0; f < clip.frames.size(); ++f) {
    history.push_back(clip.frames[f]);
    acc.push(clip.frames[f]);
    integrated.push_back(acc.integrated());

    StageRecord rec;
    rec.integrated_argmax = argmax_string(integrated.back());
    rec.distance = rho(integrated.back(), truth, cfg);
    const StoppingDecision decision =
        policy({acc, history, integrated, f + 1});
    rec.statistic = decision.statistic;
    trace.stages.push_back(std::move(rec));

    if (decision.stop() || f + 1 == clip.frames.size()) {
      trace.stopping_stage = f + 1;
      trace.final_distance = trace.stages.back().distance;
      break;
    }
  }
  return trace;
}

/// Empirical mean of the stopping loss rho(R_N, x*) + c*N over episodes.
inline double expected_loss(const std::vector<EpisodeTrace>& traces,
                            double cost) {
  if (traces.empty()) {
    throw std::invalid_argument("expected_loss: no traces");
  }
  double sum = 0.0;
  for (const auto& t : traces) {
    sum += t.final_distance + cost * static_cast<double>(t.stopping_stage);
  }
  return sum / static_cast<double>(traces.size());
}

// ---------------------------------------------------------------------------
// Precomputed per-clip stage statistics. A policy grid only thresholds
// these, so the expensive combination work happens once per dataset.

struct ClusterStageStats {
  std::size_t top_size = 0;
  double top_q = 0.0;
  double second_q = 0.0;
  std::size_t n_clusters = 0;

  bool stops(const ClusterPolicyParams& p) const {
    if (top_size < p.min_cluster_size) return false;
    if (top_q < p.min_confidence) return false;
    if (n_clusters >= 2 && top_q - second_q < p.min_confidence_gap)
      return false;
    return true;
  }
};

struct ClipStats {
  std::string clip_id;
  std::vector<double> rho_truth;   // rho(R_n, x*) per stage
  std::vector<double> delta_sum;   // sum_i rho(R_n, R(x_1..x_n, x_i))
  std::vector<double> consecutive; // rho(R_n, R_{n+1}), n = 1..N-1
  std::vector<ClusterStageStats> cx;
  std::vector<ClusterStageStats> cr;

  std::size_t horizon() const { return rho_truth.size(); }
};

inline ClusterStageStats summarize_stage_clusters(
    const std::vector<AlternativesMatrix>& items) {
  const auto clusters = summarize_clusters(items);
  ClusterStageStats s;
  s.n_clusters = clusters.size();
  if (!clusters.empty()) {
    s.top_size = clusters[0].size;
    s.top_q = clusters[0].confidence;
    if (clusters.size() >= 2) s.second_q = clusters[1].confidence;
  }
  return s;
}

inline ClipStats compute_clip_stats(const ClipStream& clip,
                                    const MetricConfig& cfg = {}) {
  const AlternativesMatrix truth = from_plain_string(clip.ground_truth);
  ClipStats stats;
  stats.clip_id = clip.clip_id;
  Accumulator acc;
  std::vector<AlternativesMatrix> history;
  std::vector<AlternativesMatrix> integrated;
  for (const auto& frame : clip.frames) {
    history.push_back(frame);
    acc.push(frame);
    integrated.push_back(acc.integrated());
    const AlternativesMatrix& current = integrated.back();

    stats.rho_truth.push_back(rho(current, truth, cfg));
    double sum = 0.0;
    for (const auto& x : history) {
      sum += rho(current, acc.combine_with(x), cfg);
    }
    stats.delta_sum.push_back(sum);
    stats.cx.push_back(summarize_stage_clusters(history));
    stats.cr.push_back(summarize_stage_clusters(integrated));
  }
  for (std::size_t n = 0; n + 1 < integrated.size(); ++n) {
    stats.consecutive.push_back(rho(integrated[n], integrated[n + 1], cfg));
  }
  return stats;
}

/// Stats for a whole dataset; clips are independent, so they may be
/// processed on several threads. Results land in index order either way.
inline std::vector<ClipStats> compute_dataset_stats(
    const std::vector<ClipStream>& dataset, const MetricConfig& cfg = {},
    unsigned jobs = 1) {
  std::vector<ClipStats> out(dataset.size());
  if (jobs <= 1 || dataset.size() < 2) {
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      out[i] = compute_clip_stats(dataset[i], cfg);
    }
    return out;
  }
  std::vector<std::thread> workers;
  std::size_t n_workers = std::min<std::size_t>(jobs, dataset.size());
  for (std::size_t w = 0; w < n_workers; ++w) {
    workers.emplace_back([&, w] {
      for (std::size_t i = w; i < dataset.size(); i += n_workers) {
        out[i] = compute_clip_stats(dataset[i], cfg);
      }
    });
  }
  for (auto& t : workers) t.join();
  return out;
}

// ---------------------------------------------------------------------------
// Threshold sweeps over precomputed stats.

inline std::size_t stop_stage_n_delta(const ClipStats& s,
                                      const DeltaPolicyParams& p) {
  for (std::size_t n = p.min_stage; n <= s.horizon(); ++n) {
    const double stat =
        (p.delta + s.delta_sum[n - 1]) / static_cast<double>(n + 1);
    if (stat <= p.cost) return n;
  }
  return s.horizon();
}

inline std::size_t stop_stage_n_cluster(
    const std::vector<ClusterStageStats>& stages,
    const ClusterPolicyParams& p) {
  for (std::size_t n = 1; n <= stages.size(); ++n) {
    if (stages[n - 1].stops(p)) return n;
  }
  return stages.size();
}

struct ProfilePoint {
  double mean_stage = 0.0;
  double mean_distance = 0.0;
  std::string policy;  // "ndelta" | "ncx" | "ncr" | "nk"
  std::string params;  // e.g. "c=0.01;delta=0.1"
};

namespace detail {

inline std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

template <class StopFn>
inline ProfilePoint profile_point(const std::vector<ClipStats>& stats,
                                  StopFn&& stop_stage) {
  double stage_sum = 0.0, dist_sum = 0.0;
  for (const auto& s : stats) {
    const std::size_t n = stop_stage(s);
    stage_sum += static_cast<double>(n);
    dist_sum += s.rho_truth[n - 1];
  }
  ProfilePoint p;
  p.mean_stage = stage_sum / static_cast<double>(stats.size());
  p.mean_distance = dist_sum / static_cast<double>(stats.size());
  return p;
}

inline void sort_by_stage(std::vector<ProfilePoint>& points) {
  std::stable_sort(points.begin(), points.end(),
                   [](const ProfilePoint& a, const ProfilePoint& b) {
                     return a.mean_stage < b.mean_stage;
                   });
}

}  // namespace detail

/// Default sweep grids; all overridable through the harness config.
struct ParameterGrids {
  std::vector<double> costs;
  std::vector<double> deltas;
  std::vector<std::size_t> cluster_sizes;
  std::vector<double> cluster_confidences;
  std::vector<double> cluster_gaps;
  std::vector<std::size_t> fixed_counts;

  static ParameterGrids defaults(std::size_t horizon = 30) {
    ParameterGrids g;
    // 41 log/linear mixed points in [0, 0.2]: a coarse geometric sweep,
    // then a fine linear section approaching delta/2 = 0.1 from below,
    // where the stage-1/stage-2 boundary makes the profile most
    // sensitive, then a coarse linear tail.
    g.costs.push_back(0.0);
    for (int i = 0; i < 28; ++i) {
      g.costs.push_back(0.001 *
                        std::pow(80.0, static_cast<double>(i) / 27.0));
    }
    for (double c : {0.085, 0.09, 0.0925, 0.095, 0.0975, 0.099, 0.0995, 0.1})
      g.costs.push_back(c);
    for (double c : {0.125, 0.15, 0.175, 0.2}) g.costs.push_back(c);
    g.deltas = {0.0, 0.05, 0.1, 0.2};
    for (std::size_t s = 1; s <= 10; ++s) g.cluster_sizes.push_back(s);
    g.cluster_confidences = {0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99};
    g.cluster_gaps = {0.0, 0.05, 0.1, 0.2};
    for (std::size_t k = 1; k <= horizon; ++k) g.fixed_counts.push_back(k);
    return g;
  }
};

inline std::vector<ProfilePoint> profile_n_delta(
    const std::vector<ClipStats>& stats, const std::vector<double>& costs,
    const std::vector<double>& deltas, std::size_t min_stage = 1) {
  std::vector<ProfilePoint> out;
  for (double delta : deltas) {
    for (double cost : costs) {
      DeltaPolicyParams p{cost, delta, min_stage};
      ProfilePoint pt = detail::profile_point(
          stats, [&](const ClipStats& s) { return stop_stage_n_delta(s, p); });
      pt.policy = "ndelta";
      pt.params = "c=" + detail::fmt_num(cost) +
                  ";delta=" + detail::fmt_num(delta);
      out.push_back(std::move(pt));
    }
  }
  detail::sort_by_stage(out);
  return out;
}

inline std::vector<ProfilePoint> profile_n_cluster(
    const std::vector<ClipStats>& stats, bool integrated_variant,
    const std::vector<std::size_t>& sizes,
    const std::vector<double>& confidences, const std::vector<double>& gaps) {
  std::vector<ProfilePoint> out;
  for (std::size_t size : sizes) {
    for (double conf : confidences) {
      for (double gap : gaps) {
        ClusterPolicyParams p{size, conf, gap};
        ProfilePoint pt =
            detail::profile_point(stats, [&](const ClipStats& s) {
              return stop_stage_n_cluster(integrated_variant ? s.cr : s.cx, p);
            });
        pt.policy = integrated_variant ? "ncr" : "ncx";
        pt.params = "size=" + std::to_string(size) +
                    ";conf=" + detail::fmt_num(conf) +
                    ";gap=" + detail::fmt_num(gap);
        out.push_back(std::move(pt));
      }
    }
  }
  detail::sort_by_stage(out);
  return out;
}

inline std::vector<ProfilePoint> profile_n_k(
    const std::vector<ClipStats>& stats,
    const std::vector<std::size_t>& fixed_counts) {
  std::vector<ProfilePoint> out;
  for (std::size_t k : fixed_counts) {
    ProfilePoint pt = detail::profile_point(stats, [&](const ClipStats& s) {
      return std::min(k, s.horizon());
    });
    pt.policy = "nk";
    pt.params = "K=" + std::to_string(k);
    out.push_back(std::move(pt));
  }
  detail::sort_by_stage(out);
  return out;
}

// ---------------------------------------------------------------------------
// Pareto front and capped-budget table.

/// Non-dominated subset under minimization of both axes, sorted by
/// mean_stage; exact (stage, distance) duplicates are kept once.
inline std::vector<ProfilePoint> pareto_front(
    const std::vector<ProfilePoint>& points) {
  if (points.empty()) {
    throw std::invalid_argument("pareto_front: empty input");
  }
  std::vector<ProfilePoint> sorted = points;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ProfilePoint& a, const ProfilePoint& b) {
                     if (a.mean_stage != b.mean_stage)
                       return a.mean_stage < b.mean_stage;
                     return a.mean_distance < b.mean_distance;
                   });
  std::vector<ProfilePoint> front;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : sorted) {
    if (!front.empty() && p.mean_stage == front.back().mean_stage &&
        p.mean_distance == front.back().mean_distance) {
      continue;  // duplicate pair
    }
    if (!front.empty() && p.mean_stage == front.back().mean_stage) {
      continue;  // same stage, strictly worse distance
    }
    if (p.mean_distance < best) {
      front.push_back(p);
      best = p.mean_distance;
    }
  }
  return front;
}

struct BudgetTable {
  std::vector<double> caps;
  std::vector<std::string> policies;
  // cells[row][col]: best mean distance of policies[row] subject to
  // mean_stage <= caps[col]; empty when no profile point qualifies.
  std::vector<std::vector<std::optional<double>>> cells;
};

inline BudgetTable capped_budget_table(
    const std::vector<std::pair<std::string, std::vector<ProfilePoint>>>&
        profiles,
    const std::vector<double>& caps) {
  if (!std::is_sorted(caps.begin(), caps.end())) {
    throw std::invalid_argument("capped_budget_table: caps must be ascending");
  }
  BudgetTable table;
  table.caps = caps;
  for (const auto& [name, points] : profiles) {
    table.policies.push_back(name);
    std::vector<std::optional<double>> row;
    for (double cap : caps) {
      std::optional<double> best;
      for (const auto& p : points) {
        if (p.mean_stage <= cap &&
            (!best.has_value() || p.mean_distance < *best)) {
          best = p.mean_distance;
        }
      }
      row.push_back(best);
    }
    table.cells.push_back(std::move(row));
  }
  return table;
}

// ---------------------------------------------------------------------------
// CSV export. All numbers go through the same %.9g formatting so repeated
// runs produce byte-identical files.

inline void write_profiles_csv(const std::vector<ProfilePoint>& points,
                               std::ostream& out) {
  out << "policy,params,mean_stage,mean_distance\n";
  for (const auto& p : points) {
    out << p.policy << ",\"" << p.params << "\","
        << detail::fmt_num(p.mean_stage) << ","
        << detail::fmt_num(p.mean_distance) << "\n";
  }
}

inline void write_table_csv(const BudgetTable& table, std::ostream& out) {
  out << "policy";
  for (double cap : table.caps) out << ",cap_" << detail::fmt_num(cap);
  out << "\n";
  for (std::size_t r = 0; r < table.policies.size(); ++r) {
    out << table.policies[r];
    for (const auto& cell : table.cells[r]) {
      out << ",";
      if (cell.has_value()) out << detail::fmt_num(*cell);
    }
    out << "\n";
  }
}

inline void write_traces_csv(const std::vector<EpisodeTrace>& traces,
                             std::ostream& out) {
  out << "clip_id,stage,integrated,distance,statistic,stopped\n";
  for (const auto& t : traces) {
    for (std::size_t s = 0; s < t.stages.size(); ++s) {
      const auto& rec = t.stages[s];
      out << t.clip_id << "," << (s + 1) << ",\""
          << utf8_encode(rec.integrated_argmax) << "\","
          << detail::fmt_num(rec.distance) << ",";
      if (rec.statistic >= 0.0) out << detail::fmt_num(rec.statistic);
      out << "," << (s + 1 == t.stopping_stage ? 1 : 0) << "\n";
    }
  }
}

}  // namespace vstop

#endif  // VSTOP_EVALUATION_HPP
