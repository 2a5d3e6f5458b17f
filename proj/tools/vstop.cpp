// Command-line harness: simulate synthetic datasets, evaluate stopping
// policies, plot performance profiles, and inspect single episodes.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vstop/vstop.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

using SimulateSpec = vstop::DatasetSpec;

struct ExperimentConfig {
  std::optional<std::string> dataset_file;
  std::optional<SimulateSpec> simulate;
  vstop::MetricConfig metric;
  vstop::ParameterGrids grids = vstop::ParameterGrids::defaults();
  std::size_t min_stage = 1;
  std::vector<double> caps = {3, 4, 5, 6, 7, 8, 9, 10};
  std::uint64_t seed = 1;
  unsigned jobs = 0;  // 0 = hardware concurrency
  std::string out_dir = "out";
  std::string policy = "all";
};

template <class T>
void maybe_get(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

SimulateSpec parse_simulate_spec(const json& j) {
  SimulateSpec s;
  maybe_get(j, "n_clips", s.n_clips);
  maybe_get(j, "n_frames", s.n_frames);
  maybe_get(j, "min_field_length", s.min_field_length);
  maybe_get(j, "max_field_length", s.max_field_length);
  maybe_get(j, "substitution_rates", s.substitution_rates);
  maybe_get(j, "insertion_rate", s.insertion_rate);
  maybe_get(j, "deletion_rate", s.deletion_rate);
  maybe_get(j, "confusion_temperature", s.confusion_temperature);
  if (j.contains("alphabet")) {
    s.alphabet = vstop::utf8_decode(j.at("alphabet").get<std::string>());
  }
  return s;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j = json::parse(in);
  ExperimentConfig cfg;
  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    const bool has_file = d.contains("file");
    const bool has_sim = d.contains("simulate");
    if (has_file == has_sim) {
      throw std::runtime_error(
          "config error at dataset: exactly one of 'file' or 'simulate' "
          "is required");
    }
    if (has_file) {
      cfg.dataset_file = d.at("file").get<std::string>();
    } else {
      cfg.simulate = parse_simulate_spec(d.at("simulate"));
    }
  } else {
    cfg.simulate = SimulateSpec{};
  }
  if (j.contains("metric")) maybe_get(j.at("metric"), "alpha", cfg.metric.alpha);
  if (j.contains("grids")) {
    const json& g = j.at("grids");
    maybe_get(g, "costs", cfg.grids.costs);
    maybe_get(g, "deltas", cfg.grids.deltas);
    maybe_get(g, "cluster_sizes", cfg.grids.cluster_sizes);
    maybe_get(g, "cluster_confidences", cfg.grids.cluster_confidences);
    maybe_get(g, "cluster_gaps", cfg.grids.cluster_gaps);
    maybe_get(g, "fixed_counts", cfg.grids.fixed_counts);
  }
  maybe_get(j, "min_stage", cfg.min_stage);
  maybe_get(j, "caps", cfg.caps);
  maybe_get(j, "seed", cfg.seed);
  maybe_get(j, "jobs", cfg.jobs);
  maybe_get(j, "out", cfg.out_dir);
  maybe_get(j, "policy", cfg.policy);
  for (const auto& grid :
       {cfg.grids.costs, cfg.grids.deltas, cfg.grids.cluster_confidences,
        cfg.grids.cluster_gaps}) {
    if (grid.empty()) throw std::runtime_error("config error: empty grid");
  }
  if (cfg.grids.cluster_sizes.empty() || cfg.grids.fixed_counts.empty()) {
    throw std::runtime_error("config error: empty grid");
  }
  return cfg;
}

ordered_json effective_config_json(const ExperimentConfig& cfg) {
  ordered_json j;
  if (cfg.dataset_file) {
    j["dataset"]["file"] = *cfg.dataset_file;
  } else {
    const SimulateSpec& s = *cfg.simulate;
    ordered_json sim;
    sim["n_clips"] = s.n_clips;
    sim["n_frames"] = s.n_frames;
    sim["min_field_length"] = s.min_field_length;
    sim["max_field_length"] = s.max_field_length;
    sim["substitution_rates"] = s.substitution_rates;
    sim["insertion_rate"] = s.insertion_rate;
    sim["deletion_rate"] = s.deletion_rate;
    sim["confusion_temperature"] = s.confusion_temperature;
    sim["alphabet"] = vstop::utf8_encode(s.alphabet);
    j["dataset"]["simulate"] = sim;
  }
  j["metric"]["alpha"] = cfg.metric.alpha;
  j["grids"]["costs"] = cfg.grids.costs;
  j["grids"]["deltas"] = cfg.grids.deltas;
  j["grids"]["cluster_sizes"] = cfg.grids.cluster_sizes;
  j["grids"]["cluster_confidences"] = cfg.grids.cluster_confidences;
  j["grids"]["cluster_gaps"] = cfg.grids.cluster_gaps;
  j["grids"]["fixed_counts"] = cfg.grids.fixed_counts;
  j["min_stage"] = cfg.min_stage;
  j["caps"] = cfg.caps;
  j["seed"] = cfg.seed;
  j["jobs"] = cfg.jobs;
  j["out"] = cfg.out_dir;
  j["policy"] = cfg.policy;
  return j;
}

std::vector<vstop::ClipStream> build_dataset(const ExperimentConfig& cfg) {
  if (cfg.dataset_file) return vstop::read_dataset(*cfg.dataset_file);
  return vstop::simulate_dataset(*cfg.simulate, cfg.seed);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

bool family_selected(const std::string& selection, const std::string& name) {
  return selection == "all" || selection == name;
}

int cmd_simulate(const ExperimentConfig& cfg) {
  if (!cfg.simulate) {
    throw std::runtime_error("simulate: config selects a dataset file");
  }
  fs::create_directories(cfg.out_dir);
  const auto dataset = build_dataset(cfg);
  vstop::write_dataset(dataset, (fs::path(cfg.out_dir) / "dataset.jsonl").string());
  write_file(fs::path(cfg.out_dir) / "config.json",
             effective_config_json(cfg).dump(2) + "\n");
  std::cout << "wrote " << dataset.size() << " clips to " << cfg.out_dir
            << "/dataset.jsonl\n";
  return 0;
}

int cmd_evaluate(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  const auto dataset = build_dataset(cfg);
  const unsigned jobs =
      cfg.jobs > 0 ? cfg.jobs : std::max(1u, std::thread::hardware_concurrency());
  const auto stats = vstop::compute_dataset_stats(dataset, cfg.metric, jobs);

  std::vector<std::pair<std::string, std::vector<vstop::ProfilePoint>>> profiles;
  if (family_selected(cfg.policy, "ndelta")) {
    profiles.emplace_back(
        "ndelta", vstop::profile_n_delta(stats, cfg.grids.costs,
                                         cfg.grids.deltas, cfg.min_stage));
  }
  if (family_selected(cfg.policy, "ncx")) {
    profiles.emplace_back(
        "ncx", vstop::profile_n_cluster(stats, false, cfg.grids.cluster_sizes,
                                        cfg.grids.cluster_confidences,
                                        cfg.grids.cluster_gaps));
  }
  if (family_selected(cfg.policy, "ncr")) {
    profiles.emplace_back(
        "ncr", vstop::profile_n_cluster(stats, true, cfg.grids.cluster_sizes,
                                        cfg.grids.cluster_confidences,
                                        cfg.grids.cluster_gaps));
  }
  if (family_selected(cfg.policy, "nk")) {
    profiles.emplace_back("nk",
                          vstop::profile_n_k(stats, cfg.grids.fixed_counts));
  }
  if (profiles.empty()) {
    throw std::runtime_error("unknown policy selection: " + cfg.policy);
  }

  std::ostringstream profiles_csv;
  {
    std::vector<vstop::ProfilePoint> all;
    for (const auto& [name, pts] : profiles) {
      all.insert(all.end(), pts.begin(), pts.end());
    }
    vstop::write_profiles_csv(all, profiles_csv);
  }
  write_file(fs::path(cfg.out_dir) / "profiles.csv", profiles_csv.str());

  std::ostringstream pareto_csv;
  {
    std::vector<vstop::ProfilePoint> fronts;
    for (const auto& [name, pts] : profiles) {
      if (name == "ncx" || name == "ncr") {
        const auto front = vstop::pareto_front(pts);
        fronts.insert(fronts.end(), front.begin(), front.end());
      }
    }
    vstop::write_profiles_csv(fronts, pareto_csv);
  }
  write_file(fs::path(cfg.out_dir) / "pareto.csv", pareto_csv.str());

  std::ostringstream table_csv;
  vstop::write_table_csv(vstop::capped_budget_table(profiles, cfg.caps),
                         table_csv);
  write_file(fs::path(cfg.out_dir) / "table.csv", table_csv.str());

  // Reference episode traces: one default configuration per family.
  std::vector<vstop::EpisodeTrace> traces;
  for (const auto& [name, pts] : profiles) {
    vstop::Policy policy;
    if (name == "ndelta") {
      policy = vstop::make_n_delta_policy({0.01, 0.1, cfg.min_stage},
                                          cfg.metric);
    } else if (name == "ncx") {
      policy = vstop::make_n_cx_policy({3, 0.8, 0.1});
    } else if (name == "ncr") {
      policy = vstop::make_n_cr_policy({3, 0.8, 0.1});
    } else {
      policy = vstop::make_n_k_policy(5);
    }
    for (const auto& clip : dataset) {
      auto trace = vstop::run_episode(clip, policy, cfg.metric);
      trace.clip_id = name + ":" + trace.clip_id;
      traces.push_back(std::move(trace));
    }
  }
  std::ostringstream traces_csv;
  vstop::write_traces_csv(traces, traces_csv);
  write_file(fs::path(cfg.out_dir) / "traces.csv", traces_csv.str());

  write_file(fs::path(cfg.out_dir) / "config.json",
             effective_config_json(cfg).dump(2) + "\n");
  std::cout << "wrote profiles.csv, pareto.csv, table.csv, traces.csv to "
            << cfg.out_dir << "\n";
  return 0;
}

// --- plot ------------------------------------------------------------------

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::vector<Series> read_profile_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open profile CSV: " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("empty profile CSV: " + path);
  }
  std::map<std::string, std::vector<std::pair<double, double>>> by_policy;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < 4) {
      throw std::runtime_error("malformed CSV row in " + path + ": " + line);
    }
    by_policy[fields[0]].emplace_back(std::stod(fields[2]),
                                      std::stod(fields[3]));
  }
  if (by_policy.empty()) {
    throw std::runtime_error("profile CSV has no data rows: " + path);
  }
  std::vector<Series> out;
  for (auto& [name, pts] : by_policy) {
    std::sort(pts.begin(), pts.end());
    out.push_back({name, std::move(pts)});
  }
  return out;
}

std::string render_svg(const std::vector<Series>& series) {
  const double width = 720, height = 480;
  const double ml = 60, mr = 20, mt = 20, mb = 45;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  // 5% margins; degenerate spans get a unit pad.
  const double xpad = (xmax > xmin) ? 0.05 * (xmax - xmin) : 0.5;
  const double ypad = (ymax > ymin) ? 0.05 * (ymax - ymin) : 0.5;
  xmin -= xpad; xmax += xpad; ymin -= ypad; ymax += ypad;
  auto sx = [&](double x) {
    return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr);
  };
  auto sy = [&](double y) {
    return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb);
  };
  const std::vector<std::string> colors = {"#1f77b4", "#d62728", "#2ca02c",
                                           "#9467bd", "#ff7f0e", "#8c564b"};
  std::ostringstream svg;
  char buf[256];
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  std::snprintf(buf, sizeof(buf),
                "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" "
                "fill=\"none\" stroke=\"black\"/>\n",
                ml, mt, width - ml - mr, height - mt - mb);
  svg << buf;
  svg << "<text x=\"" << (width / 2)
      << "\" y=\"" << (height - 8)
      << "\" text-anchor=\"middle\" font-size=\"14\">mean observations</text>\n";
  svg << "<text x=\"16\" y=\"" << (height / 2)
      << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 16 "
      << (height / 2) << ")\">mean distance</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::string& color = colors[i % colors.size()];
    const auto& pts = series[i].points;
    if (pts.size() > 1) {
      svg << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.5\" points=\"";
      for (const auto& [x, y] : pts) {
        std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", sx(x), sy(y));
        svg << buf;
      }
      svg << "\"/>\n";
    }
    for (const auto& [x, y] : pts) {
      std::snprintf(buf, sizeof(buf),
                    "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"%s\"/>\n",
                    sx(x), sy(y), color.c_str());
      svg << buf;
    }
    const double lx = ml + 12, ly = mt + 18 + 18 * static_cast<double>(i);
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"%.1f\" y=\"%.1f\" width=\"12\" height=\"12\" "
                  "fill=\"%s\"/>\n",
                  lx, ly - 10, color.c_str());
    svg << buf;
    svg << "<text x=\"" << (lx + 18) << "\" y=\"" << ly
        << "\" font-size=\"13\">" << series[i].name << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

int cmd_plot(const std::vector<std::string>& csv_paths,
             const std::string& out_dir) {
  std::vector<Series> series;
  for (const auto& path : csv_paths) {
    auto more = read_profile_csv(path);
    series.insert(series.end(), more.begin(), more.end());
  }
  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "profiles.svg", render_svg(series));
  std::cout << "wrote " << out_dir << "/profiles.svg\n";
  return 0;
}

int cmd_inspect(const ExperimentConfig& cfg, const std::string& clip_id) {
  const auto dataset = build_dataset(cfg);
  const vstop::ClipStream* clip = nullptr;
  for (const auto& c : dataset) {
    if (clip_id.empty() || c.clip_id == clip_id) {
      clip = &c;
      break;
    }
  }
  if (!clip) throw std::runtime_error("clip not found: " + clip_id);
  const auto policy =
      vstop::make_n_delta_policy({0.01, 0.1, cfg.min_stage}, cfg.metric);
  const auto trace = vstop::run_episode(*clip, policy, cfg.metric);
  std::cout << "clip " << clip->clip_id << " field " << clip->field_id
            << " truth \"" << vstop::utf8_encode(clip->ground_truth) << "\"\n";
  for (std::size_t s = 0; s < trace.stages.size(); ++s) {
    const auto& rec = trace.stages[s];
    std::cout << "  stage " << (s + 1) << ": R=\""
              << vstop::utf8_encode(rec.integrated_argmax)
              << "\" rho=" << rec.distance;
    if (rec.statistic >= 0.0) std::cout << " stat=" << rec.statistic;
    if (s + 1 == trace.stopping_stage) std::cout << "  <- stop";
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Video-stream recognition stopping harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
  std::string policy;
  std::string clip_id;
  std::vector<std::string> csv_paths;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* opt = cmd->add_option("--config", config_path, "config file (JSON)");
    if (needs_config) opt->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed, "RNG seed (overrides config)");
    cmd->add_option("--jobs", jobs, "worker threads (default: cores)");
  };

  auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
  add_common(sim, true);
  auto* eval = app.add_subcommand("evaluate", "run stopping policies");
  add_common(eval, true);
  eval->add_option("--policy", policy, "ndelta|ncx|ncr|nk|all");
  auto* plot = app.add_subcommand("plot", "render profile CSVs to SVG");
  plot->add_option("csv", csv_paths, "profile CSV files")->required();
  plot->add_option("--out", out_dir, "output directory");
  auto* inspect = app.add_subcommand("inspect", "pretty-print one episode");
  add_common(inspect, true);
  inspect->add_option("--clip", clip_id, "clip id (default: first clip)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (plot->parsed()) {
      return cmd_plot(csv_paths, out_dir.empty() ? "." : out_dir);
    }
    ExperimentConfig cfg = load_config(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (seed) cfg.seed = *seed;
    if (jobs) cfg.jobs = *jobs;
    if (!policy.empty()) cfg.policy = policy;
    if (sim->parsed()) return cmd_simulate(cfg);
    if (eval->parsed()) return cmd_evaluate(cfg);
    return cmd_inspect(cfg, clip_id);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
