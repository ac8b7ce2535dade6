#pragma once

/**
 * Run orchestration: drive one agent through one seeded environment, persist
 * run artifacts (manifest, per-episode CSV, summary JSON, checkpoint), fan a
 * sweep out over (config, seed) cells with a thread pool, and aggregate runs
 * into comparison reports and plot-ready CSV bundles.
 *
 * Runs are the unit of parallelism: each run is single-threaded, owns its
 * environment and agent, and writes to its own directory, so sweep results
 * are independent of execution order and parallelism degree.
 */

#include <atomic>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "nomarl/agents.hpp"
#include "nomarl/config.hpp"
#include "nomarl/ddpg.hpp"
#include "nomarl/embedding.hpp"
#include "nomarl/env.hpp"
#include "nomarl/npg.hpp"
#include "nomarl/stats.hpp"

namespace nomarl {

/** One row of the per-episode trace: per-step reward means plus metrics. */
struct EpisodeRow {
  int episode = 0;  // 1-based
  RewardBreakdown reward;
  EpisodeMetrics metrics;
};

struct RunResult {
  ExperimentConfig config;
  std::uint64_t seed = 0;
  std::vector<EpisodeRow> rows;
  std::vector<std::vector<int>> last_assignments;  // final step's codes, per episode
  RunSummary summary;
  std::string checkpoint;    // serialized final agent parameters
  std::filesystem::path dir;  // empty when the run was not persisted
};

/** What report/plot aggregation needs to know about one finished run. */
struct RunRecord {
  std::string name;
  ScenarioKind scenario = ScenarioKind::SmartCity;
  AgentKind agent = AgentKind::Static;
  std::uint64_t seed = 0;
  std::vector<EpisodeRow> rows;
};

inline RunRecord to_record(const RunResult& r) {
  RunRecord rec;
  rec.name = r.config.name;
  rec.scenario = r.config.scenario.kind;
  rec.agent = r.config.agent;
  rec.seed = r.seed;
  rec.rows = r.rows;
  return rec;
}

namespace detail {

inline std::vector<DeviceClass> device_classes(const NomaEnv& env) {
  std::vector<DeviceClass> cls;
  cls.reserve(env.profiles().size());
  for (const auto& p : env.profiles()) cls.push_back(p.cls);
  return cls;
}

inline std::string iso8601_utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[72];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
  return buf;
}

inline std::string matrix_lines(const Eigen::MatrixXd& m) {
  std::string out;
  char buf[40];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
      out += buf;
      out += c + 1 < m.cols() ? ' ' : '\n';
    }
  }
  return out;
}

inline std::string npg_checkpoint(const NpgPolicy& policy) {
  std::string out = "agent npg\n";
  const auto& theta = policy.parameters();
  out += "devices " + std::to_string(theta.size()) + " dim " +
         std::to_string(theta.empty() ? 0 : theta.front().size()) + "\n";
  char buf[40];
  for (const auto& th : theta) {
    for (Eigen::Index k = 0; k < th.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", th(k));
      out += buf;
      out += k + 1 < th.size() ? ' ' : '\n';
    }
  }
  return out;
}

inline std::string ddpg_checkpoint(const DdpgAgent& agent) {
  std::string out = "agent ddpg\n";
  out += "[actor]\n" + save_network_string(agent.actor());
  out += "[critic]\n" + save_network_string(agent.critic());
  out += "[actor_target]\n" + save_network_string(agent.actor_target());
  out += "[critic_target]\n" + save_network_string(agent.critic_target());
  const Eigen::MatrixXd& v = agent.embedding().vectors;
  out += "[embedding]\n" + std::to_string(v.rows()) + " " + std::to_string(v.cols()) + "\n";
  out += matrix_lines(v);
  return out;
}

}  // namespace detail

/**
 * Execute one run entirely in memory: `config.episodes` sequential episodes
 * of the configured agent against a fresh environment seeded by `seed`.
 * Learning agents train as they go (the trace is a training curve, not a
 * frozen evaluation).
 */
inline RunResult run_experiment(const ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  RunResult result;
  result.config = cfg;
  result.seed = seed;

  NomaEnv env(cfg.env_config(), cfg.build_codebook(), seed);
  const int n = env.num_devices();
  const int steps = env.steps_per_episode();
  const std::vector<DeviceClass> classes = detail::device_classes(env);

  // Only the configured agent is instantiated.
  std::optional<Assignment> static_action;
  std::optional<RngStream> policy_rng;
  std::optional<NpgPolicy> npg;
  std::optional<DdpgAgent> ddpg;
  switch (cfg.agent) {
    case AgentKind::Static:
      static_action = static_assign(n, env.num_codes());
      break;
    case AgentKind::Random:
      policy_rng.emplace(seed, "policy");
      break;
    case AgentKind::Greedy:
      break;
    case AgentKind::Npg:
      policy_rng.emplace(seed, "policy");
      npg.emplace(cfg.npg, env.codebook(), std::span<const DeviceClass>(classes), *policy_rng);
      break;
    case AgentKind::Ddpg: {
      const double kappa = cfg.embedding.kappa > 0.0 ? cfg.embedding.kappa
                                                     : default_embedding_scale(env.codebook());
      RngStream embed_rng(seed, "embedding");
      const EmbeddingCodebook emb =
          init_embedding_codebook(env.codebook(), cfg.embedding.dimension, kappa, embed_rng,
                                  cfg.embedding.max_iters, cfg.embedding.learning_rate);
      ddpg.emplace(cfg.ddpg, emb, std::span<const DeviceClass>(classes), seed);
      break;
    }
  }

  result.rows.reserve(static_cast<std::size_t>(cfg.episodes));
  result.last_assignments.reserve(static_cast<std::size_t>(cfg.episodes));
  for (int ep = 1; ep <= cfg.episodes; ++ep) {
    NetworkObservation obs = env.reset();
    if (ddpg) ddpg->begin_episode();

    NpgTrajectory traj;
    RewardBreakdown sums;
    Assignment action;
    for (int t = 0; t < steps; ++t) {
      std::optional<DdpgActResult> ddpg_act;
      switch (cfg.agent) {
        case AgentKind::Static:
          action = *static_action;
          break;
        case AgentKind::Random:
          action = random_assign(n, env.num_codes(), *policy_rng);
          break;
        case AgentKind::Greedy:
          action =
              greedy_sinr_assign(env.active(), env.powers_mw(), env.raw_gains(), env.codebook());
          break;
        case AgentKind::Npg:
          traj.observations.push_back(obs);
          action = npg->sample(obs, *policy_rng);
          traj.actions.push_back(action);
          break;
        case AgentKind::Ddpg:
          ddpg_act = ddpg->act(obs, /*explore=*/true);
          action = ddpg_act->assignment;
          break;
      }

      StepResult sr = env.step(action);
      if (npg) traj.rewards.push_back(sr.reward.combined);
      if (ddpg) {
        ddpg->observe(obs, *ddpg_act, sr.reward.combined, sr.obs, sr.done);
        ddpg->train_step();
      }
      sums.throughput += sr.reward.throughput;
      sums.energy += sr.reward.energy;
      sums.reliability += sr.reward.reliability;
      sums.interference += sr.reward.interference;
      sums.fairness += sr.reward.fairness;
      sums.combined += sr.reward.combined;
      obs = std::move(sr.obs);
    }
    if (npg) {
      const NpgTrajectory batch[] = {std::move(traj)};
      npg->update(batch);
    }

    EpisodeRow row;
    row.episode = ep;
    const double s = static_cast<double>(steps);
    row.reward.throughput = sums.throughput / s;
    row.reward.energy = sums.energy / s;
    row.reward.reliability = sums.reliability / s;
    row.reward.interference = sums.interference / s;
    row.reward.fairness = sums.fairness / s;
    row.reward.combined = sums.combined / s;
    row.metrics = env.episode_metrics();
    result.rows.push_back(std::move(row));
    result.last_assignments.push_back(action.codes);
  }

  std::vector<EpisodeMetrics> eps;
  eps.reserve(result.rows.size());
  for (const auto& r : result.rows) eps.push_back(r.metrics);
  result.summary = summarize_run(eps);

  if (npg)
    result.checkpoint = detail::npg_checkpoint(*npg);
  else if (ddpg)
    result.checkpoint = detail::ddpg_checkpoint(*ddpg);
  else
    result.checkpoint = std::string("agent ") + to_string(cfg.agent) + "\nparameters none\n";
  return result;
}

inline constexpr const char* kEpisodeCsvHeader =
    "episode,reward_combined,reward_throughput,reward_energy,reward_reliability,"
    "reward_interference,reward_fairness,throughput_mbps,energy_bits_per_j,"
    "critical_reliability,fairness,interference";

inline std::string episode_csv_line(const EpisodeRow& r) {
  std::string line = std::to_string(r.episode);
  const double cols[] = {r.metrics.combined_reward,
                         r.reward.throughput,
                         r.reward.energy,
                         r.reward.reliability,
                         r.reward.interference,
                         r.reward.fairness,
                         r.metrics.throughput_mbps,
                         r.metrics.energy_bits_per_j,
                         r.metrics.critical_reliability,
                         r.metrics.fairness,
                         r.metrics.interference};
  for (double v : cols) {
    line += ',';
    line += format_g17(v);
  }
  return line;
}

inline nlohmann::json summary_to_json(const RunSummary& s) {
  nlohmann::json j;
  j["episodes"] = s.episodes;
  j["window"] = s.window;
  j["metrics"] = nlohmann::json::object();
  for (const auto& [name, m] : s.metrics)
    j["metrics"][name] = {{"mean", m.mean}, {"stdev", m.stdev}, {"ci_half", m.ci_half}};
  if (s.convergence_ep)
    j["convergence_episode"] = *s.convergence_ep;
  else
    j["convergence_episode"] = nullptr;
  j["reach90_episode"] = s.reach90_ep;
  return j;
}

inline std::string run_directory_name(const ExperimentConfig& cfg, std::uint64_t seed) {
  return cfg.name + "-" + to_string(cfg.agent) + "-s" + std::to_string(seed);
}

namespace detail {

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline nlohmann::json manifest_json(const ExperimentConfig& cfg, std::uint64_t seed,
                                    const std::string& status, const std::string& started,
                                    const std::string& finished) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["name"] = cfg.name;
  j["agent"] = to_string(cfg.agent);
  j["scenario"] = to_string(cfg.scenario.kind);
  j["seed"] = seed;
  j["status"] = status;
  j["started_utc"] = started;
  j["finished_utc"] = finished;
  j["config"] = config_to_json(cfg);
  nlohmann::json prov = nlohmann::json::object();
  for (const auto& [key, source] : parameter_provenance()) prov[key] = source;
  j["provenance"] = prov;
  return j;
}

}  // namespace detail

/**
 * Run and persist the four run artifacts under root/<name>-<agent>-s<seed>/:
 * manifest.json, episodes.csv, summary.json, checkpoint.txt.  The manifest is
 * written up front with status "running" so an aborted run leaves a partial-
 * results marker, and rewritten with status "complete" at the end.
 */
inline RunResult run_to_directory(const ExperimentConfig& cfg, std::uint64_t seed,
                                  const std::filesystem::path& root) {
  cfg.validate();
  const std::filesystem::path dir = root / run_directory_name(cfg, seed);
  std::filesystem::create_directories(dir);
  const std::string started = detail::iso8601_utc_now();
  detail::write_text_file(dir / "manifest.json",
                          detail::manifest_json(cfg, seed, "running", started, "").dump(2) + "\n");

  RunResult result;
  try {
    result = run_experiment(cfg, seed);

    std::string csv = kEpisodeCsvHeader;
    csv += '\n';
    for (const auto& row : result.rows) {
      csv += episode_csv_line(row);
      csv += '\n';
    }
    detail::write_text_file(dir / "episodes.csv", csv);
    detail::write_text_file(dir / "summary.json", summary_to_json(result.summary).dump(2) + "\n");
    detail::write_text_file(dir / "checkpoint.txt", result.checkpoint);
  } catch (...) {
    // Leave the partial-results marker in place with a failure note.
    try {
      detail::write_text_file(
          dir / "manifest.json",
          detail::manifest_json(cfg, seed, "failed", started, detail::iso8601_utc_now()).dump(2) +
              "\n");
    } catch (...) {
      // Nothing more to record if even the marker cannot be written.
    }
    throw;
  }
  detail::write_text_file(
      dir / "manifest.json",
      detail::manifest_json(cfg, seed, "complete", started, detail::iso8601_utc_now()).dump(2) +
          "\n");
  result.dir = dir;
  return result;
}

/**
 * Run every (config, seed) cell, `parallelism` runs at a time.  Results come
 * back in deterministic cell order (configs outer, seeds inner) regardless of
 * scheduling; the first failure (in cell order) is rethrown after all workers
 * finish.
 */
inline std::vector<RunResult> run_sweep(const std::vector<ExperimentConfig>& configs,
                                        int parallelism, const std::filesystem::path& root) {
  if (parallelism < 1) throw std::invalid_argument("parallelism must be >= 1");
  struct Cell {
    const ExperimentConfig* config;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (const auto& cfg : configs) {
    cfg.validate();
    for (std::uint64_t seed : cfg.seeds) cells.push_back({&cfg, seed});
  }
  std::vector<RunResult> results(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        results[i] = run_to_directory(*cells[i].config, cells[i].seed, root);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const int workers = std::min<int>(parallelism, static_cast<int>(cells.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);
  return results;
}

// ---------------------------------------------------------------------------
// Loading persisted runs back for reporting.

inline RunRecord load_run(const std::filesystem::path& dir) {
  std::ifstream mf(dir / "manifest.json");
  if (!mf) throw std::runtime_error("cannot open manifest: " + (dir / "manifest.json").string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(mf);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("corrupt manifest in " + dir.string() + ": " + e.what());
  }
  if (manifest.value("status", "") != "complete")
    throw std::runtime_error("run is not complete (partial results): " + dir.string());

  RunRecord rec;
  const ExperimentConfig cfg = config_from_json(manifest.at("config"));
  rec.name = cfg.name;
  rec.scenario = cfg.scenario.kind;
  rec.agent = cfg.agent;
  rec.seed = manifest.at("seed").get<std::uint64_t>();

  std::ifstream csv(dir / "episodes.csv");
  if (!csv) throw std::runtime_error("cannot open episodes.csv in " + dir.string());
  std::string line;
  if (!std::getline(csv, line) || line != kEpisodeCsvHeader)
    throw std::runtime_error("unexpected episodes.csv header in " + dir.string());
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::vector<double> vals;
    std::size_t begin = 0;
    while (begin <= line.size()) {
      const std::size_t comma = line.find(',', begin);
      const std::string tok =
          line.substr(begin, comma == std::string::npos ? comma : comma - begin);
      try {
        vals.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw std::runtime_error("bad numeric field '" + tok + "' in " + dir.string());
      }
      if (comma == std::string::npos) break;
      begin = comma + 1;
    }
    if (vals.size() != 12)
      throw std::runtime_error("expected 12 columns per episode row in " + dir.string());
    EpisodeRow row;
    row.episode = static_cast<int>(vals[0]);
    row.metrics.combined_reward = vals[1];
    row.reward.combined = vals[1];
    row.reward.throughput = vals[2];
    row.reward.energy = vals[3];
    row.metrics.energy_component = vals[3];
    row.reward.reliability = vals[4];
    row.reward.interference = vals[5];
    row.reward.fairness = vals[6];
    row.metrics.throughput_mbps = vals[7];
    row.metrics.energy_bits_per_j = vals[8];
    row.metrics.critical_reliability = vals[9];
    row.metrics.fairness = vals[10];
    row.metrics.interference = vals[11];
    rec.rows.push_back(row);
  }
  if (rec.rows.empty()) throw std::runtime_error("episodes.csv has no rows in " + dir.string());
  return rec;
}

// ---------------------------------------------------------------------------
// Cross-run aggregation: comparison report and plot data.

/** One (scenario, agent) group aggregated across seeds. */
struct ReportCell {
  ScenarioKind scenario = ScenarioKind::SmartCity;
  AgentKind agent = AgentKind::Static;
  std::vector<std::uint64_t> seeds;                 // sorted
  std::map<std::string, MetricSummary> metrics;     // across-seed stats of per-run window means
  std::vector<double> reward_by_seed;               // per-seed window-mean combined reward
  std::map<std::string, double> delta_vs_static;    // percent, per metric
  std::optional<TTestResult> ttest_vs_static;       // paired across seeds, combined reward
  std::optional<double> cohens_d_vs_static;
};

inline const std::vector<std::string>& report_metric_names() {
  static const std::vector<std::string> names = {"throughput_mbps", "energy_bits_per_j",
                                                 "critical_reliability", "fairness",
                                                 "interference", "combined_reward"};
  return names;
}

namespace detail {

/** Per-run window means (same trailing window as the run summary). */
inline std::map<std::string, double> window_means(const RunRecord& rec, int eval_window) {
  std::vector<EpisodeMetrics> eps;
  eps.reserve(rec.rows.size());
  for (const auto& r : rec.rows) eps.push_back(r.metrics);
  const RunSummary s = summarize_run(eps, eval_window);
  std::map<std::string, double> out;
  for (const auto& name : report_metric_names()) out[name] = s.metrics.at(name).mean;
  return out;
}

}  // namespace detail

/**
 * Group runs by (scenario, agent), aggregate window means across seeds, and
 * attach percent deltas plus paired significance tests against the static
 * baseline of the same scenario (pairs matched by seed).
 */
inline std::vector<ReportCell> aggregate_report(std::span<const RunRecord> runs,
                                                int eval_window = 100) {
  if (runs.empty()) throw std::invalid_argument("no runs to aggregate");
  using Key = std::pair<int, int>;  // (scenario, agent) — ordered, deterministic
  struct Group {
    std::map<std::uint64_t, std::map<std::string, double>> by_seed;
  };
  std::map<Key, Group> groups;
  for (const auto& rec : runs) {
    const Key key{static_cast<int>(rec.scenario), static_cast<int>(rec.agent)};
    auto& slot = groups[key].by_seed[rec.seed];
    if (!slot.empty())
      throw std::invalid_argument("duplicate run for scenario/agent/seed " + rec.name + "/s" +
                                  std::to_string(rec.seed));
    slot = detail::window_means(rec, eval_window);
  }

  std::vector<ReportCell> cells;
  for (const auto& [key, group] : groups) {
    ReportCell cell;
    cell.scenario = static_cast<ScenarioKind>(key.first);
    cell.agent = static_cast<AgentKind>(key.second);
    std::map<std::string, std::vector<double>> series;
    for (const auto& [seed, means] : group.by_seed) {
      cell.seeds.push_back(seed);
      for (const auto& [metric, value] : means) series[metric].push_back(value);
      cell.reward_by_seed.push_back(means.at("combined_reward"));
    }
    for (const auto& [metric, values] : series) cell.metrics[metric] = summarize_metric(values);
    cells.push_back(std::move(cell));
  }

  // Deltas and paired tests against the same-scenario static baseline.
  for (auto& cell : cells) {
    const ReportCell* baseline = nullptr;
    for (const auto& other : cells)
      if (other.scenario == cell.scenario && other.agent == AgentKind::Static) baseline = &other;
    if (baseline == nullptr) continue;
    for (const auto& name : report_metric_names()) {
      const double base = baseline->metrics.at(name).mean;
      const double mine = cell.metrics.at(name).mean;
      if (base != 0.0)
        cell.delta_vs_static[name] = (mine - base) / std::fabs(base) * 100.0;
      else if (mine == 0.0)
        cell.delta_vs_static[name] = 0.0;
    }
    if (cell.seeds.size() >= 2 && cell.seeds == baseline->seeds) {
      cell.ttest_vs_static = paired_t_test(cell.reward_by_seed, baseline->reward_by_seed);
      cell.cohens_d_vs_static = cohens_d(cell.reward_by_seed, baseline->reward_by_seed);
    }
  }
  return cells;
}

/** Aligned-column text table: one block per scenario, one row per agent. */
inline std::string format_report(std::span<const ReportCell> cells) {
  auto fmt = [](double v, const char* spec) {
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, v);
    return std::string(buf);
  };

  std::string out;
  int last_scenario = -1;
  const auto& names = report_metric_names();
  for (const auto& cell : cells) {
    if (static_cast<int>(cell.scenario) != last_scenario) {
      last_scenario = static_cast<int>(cell.scenario);
      out += "\nscenario: ";
      out += to_string(cell.scenario);
      out += "  (seeds: " + std::to_string(cell.seeds.size()) + ")\n";
      char head[256];
      std::snprintf(head, sizeof head, "  %-8s %26s %26s %26s %26s %26s %26s %12s %10s\n", "agent",
                    "throughput_mbps", "energy_bits_per_j", "critical_reliability", "fairness",
                    "interference", "combined_reward", "p_vs_static", "cohens_d");
      out += head;
    }
    std::string row;
    char agent_col[32];
    std::snprintf(agent_col, sizeof agent_col, "  %-8s", to_string(cell.agent));
    row += agent_col;
    for (const auto& name : names) {
      const MetricSummary& m = cell.metrics.at(name);
      std::string val = fmt(m.mean, "%.4g") + "+-" + fmt(m.ci_half, "%.3g");
      if (auto it = cell.delta_vs_static.find(name); it != cell.delta_vs_static.end())
        val += " (" + fmt(it->second, "%+.1f") + "%)";
      char col[64];
      std::snprintf(col, sizeof col, " %26s", val.c_str());
      row += col;
    }
    char tail[64];
    if (cell.ttest_vs_static) {
      std::snprintf(tail, sizeof tail, " %12s %10s",
                    fmt(cell.ttest_vs_static->p, "%.4g").c_str(),
                    fmt(*cell.cohens_d_vs_static, "%.3g").c_str());
    } else {
      std::snprintf(tail, sizeof tail, " %12s %10s", "-", "-");
    }
    row += tail;
    row += '\n';
    out += row;
  }
  if (!out.empty() && out.front() == '\n') out.erase(out.begin());
  return out;
}

inline nlohmann::json report_to_json(std::span<const ReportCell> cells) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& cell : cells) {
    nlohmann::json j;
    j["scenario"] = to_string(cell.scenario);
    j["agent"] = to_string(cell.agent);
    j["seeds"] = cell.seeds;
    for (const auto& [name, m] : cell.metrics)
      j["metrics"][name] = {{"mean", m.mean}, {"stdev", m.stdev}, {"ci_half", m.ci_half}};
    for (const auto& [name, d] : cell.delta_vs_static) j["delta_vs_static_percent"][name] = d;
    if (cell.ttest_vs_static) {
      j["paired_t_vs_static"] = {{"t", cell.ttest_vs_static->t},
                                 {"p", cell.ttest_vs_static->p},
                                 {"dof", cell.ttest_vs_static->dof},
                                 {"degenerate", cell.ttest_vs_static->degenerate}};
      j["cohens_d_vs_static"] = *cell.cohens_d_vs_static;
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

// ---------------------------------------------------------------------------
// Plot data: convergence curves and cross-agent variance ratios.

/**
 * Long-format convergence table: for every (scenario, agent, episode), the
 * across-seed mean combined reward with a 95% CI band (zero width for a
 * single seed).  Runs in a group must agree on episode count.
 */
inline std::string convergence_csv(std::span<const RunRecord> runs) {
  using Key = std::pair<int, int>;
  std::map<Key, std::vector<const RunRecord*>> groups;
  for (const auto& rec : runs)
    groups[{static_cast<int>(rec.scenario), static_cast<int>(rec.agent)}].push_back(&rec);

  std::string out = "scenario,agent,episode,mean_reward,ci_lo,ci_hi\n";
  for (const auto& [key, members] : groups) {
    const std::size_t episodes = members.front()->rows.size();
    for (const auto* rec : members)
      if (rec->rows.size() != episodes)
        throw std::invalid_argument("episode counts differ across seeds for one agent group");
    for (std::size_t e = 0; e < episodes; ++e) {
      std::vector<double> vals;
      vals.reserve(members.size());
      for (const auto* rec : members) vals.push_back(rec->rows[e].metrics.combined_reward);
      const ConfidenceInterval ci = confidence_interval_95(vals);
      out += to_string(static_cast<ScenarioKind>(key.first));
      out += ',';
      out += to_string(static_cast<AgentKind>(key.second));
      out += ',';
      out += std::to_string(e + 1);
      out += ',';
      out += format_g17(ci.mean);
      out += ',';
      out += format_g17(ci.mean - ci.half_width);
      out += ',';
      out += format_g17(ci.mean + ci.half_width);
      out += '\n';
    }
  }
  return out;
}

/**
 * Across-seed reward variance over the trailing window, averaged per episode,
 * for one (scenario, agent) group.
 */
inline double across_seed_variance(std::span<const RunRecord> runs, ScenarioKind scenario,
                                   AgentKind agent, int window = 50) {
  std::vector<const RunRecord*> members;
  for (const auto& rec : runs)
    if (rec.scenario == scenario && rec.agent == agent) members.push_back(&rec);
  if (members.empty()) throw std::invalid_argument("no runs for the requested scenario/agent");
  const std::size_t episodes = members.front()->rows.size();
  for (const auto* rec : members)
    if (rec->rows.size() != episodes)
      throw std::invalid_argument("episode counts differ across seeds for one agent group");
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(window), episodes);

  double acc = 0.0;
  for (std::size_t e = episodes - w; e < episodes; ++e) {
    Welford welf;
    for (const auto* rec : members) welf.push(rec->rows[e].metrics.combined_reward);
    acc += welf.variance_sample();
  }
  return acc / static_cast<double>(w);
}

/**
 * Variance-ratio table (one row per scenario with both learning agents):
 * across-seed last-window reward variance for the deterministic-actor agent
 * over the stochastic-policy agent.  Two identical groups give ratio 1.
 */
inline std::string variance_ratio_csv(std::span<const RunRecord> runs, int window = 50) {
  std::map<int, std::pair<bool, bool>> present;  // scenario -> (has npg, has ddpg)
  for (const auto& rec : runs) {
    auto& flags = present[static_cast<int>(rec.scenario)];
    if (rec.agent == AgentKind::Npg) flags.first = true;
    if (rec.agent == AgentKind::Ddpg) flags.second = true;
  }
  std::string out = "scenario,npg_variance,ddpg_variance,ratio_ddpg_over_npg\n";
  for (const auto& [sc, flags] : present) {
    if (!flags.first || !flags.second) continue;
    const auto scenario = static_cast<ScenarioKind>(sc);
    const double v_npg = across_seed_variance(runs, scenario, AgentKind::Npg, window);
    const double v_ddpg = across_seed_variance(runs, scenario, AgentKind::Ddpg, window);
    const double ratio = v_npg > 0.0
                             ? v_ddpg / v_npg
                             : (v_ddpg == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
    out += to_string(scenario);
    out += ',';
    out += format_g17(v_npg);
    out += ',';
    out += format_g17(v_ddpg);
    out += ',';
    out += format_g17(ratio);
    out += '\n';
  }
  return out;
}

/** Write convergence.csv and variance_ratio.csv under out_dir. */
inline void emit_plot_data(std::span<const RunRecord> runs, const std::filesystem::path& out_dir) {
  if (runs.empty()) throw std::invalid_argument("no runs to plot");
  std::filesystem::create_directories(out_dir);
  detail::write_text_file(out_dir / "convergence.csv", convergence_csv(runs));
  detail::write_text_file(out_dir / "variance_ratio.csv", variance_ratio_csv(runs));
}

}  // namespace nomarl
