/**
 * Command-line front end: inspect spreading codebooks, execute single runs,
 * fan out sweeps, and aggregate finished runs into reports and plot data.
 *
 * Exit codes: 0 success, 1 configuration error, 2 runtime failure.
 */

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nomarl/config.hpp"
#include "nomarl/gold.hpp"
#include "nomarl/runner.hpp"

namespace fs = std::filesystem;

namespace {

/** Output root: NOMARL_OUTPUT_ROOT env var wins over the config value. */
fs::path resolve_output_root(const std::string& config_output_dir) {
  if (const char* env = std::getenv("NOMARL_OUTPUT_ROOT"); env != nullptr && *env != '\0')
    return fs::path(env);
  return fs::path(config_output_dir);
}

nomarl::ExperimentConfig load_with_overrides(const std::string& path,
                                             const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw nomarl::ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw nomarl::ConfigError(std::string("invalid JSON in ") + path + ": " + e.what());
  }
  for (const auto& spec : overrides) nomarl::apply_override(doc, spec);
  return nomarl::config_from_json(doc);
}

int cmd_codes(int degree, int num_codes, const std::string& strategy, int misalignment) {
  const nomarl::GoldFamily family = nomarl::default_gold_family(degree);
  const auto strat = nomarl::strategy_from_string(strategy, "strategy");
  const int C = num_codes > 0 ? num_codes : static_cast<int>(family.codes.size());
  const nomarl::Codebook cb = nomarl::select_codebook(family, C, strat, misalignment);

  std::cout << "degree " << degree << ": family of " << family.codes.size() << " sequences, length "
            << family.length << "\n";
  std::cout << "selected " << cb.num_codes << " codes (strategy " << strategy
            << ", misalignment window +-" << misalignment << " chips)\n";
  double max_off = 0.0, sum_off = 0.0;
  long pairs = 0;
  for (int i = 0; i < cb.num_codes; ++i)
    for (int j = i + 1; j < cb.num_codes; ++j) {
      max_off = std::max(max_off, cb.rho(i, j));
      sum_off += cb.rho(i, j);
      ++pairs;
    }
  std::cout << "off-diagonal effective correlation: mean "
            << nomarl::format_g17(pairs > 0 ? sum_off / static_cast<double>(pairs) : 0.0)
            << ", max " << nomarl::format_g17(max_off) << "\n";
  std::cout << "processing gain 10*log10(" << family.length
            << ") = " << nomarl::format_g17(10.0 * std::log10(family.length)) << " dB\n";
  return 0;
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides,
            std::uint64_t seed, bool seed_given) {
  nomarl::ExperimentConfig cfg = load_with_overrides(config_path, overrides);
  const std::uint64_t run_seed = seed_given ? seed : cfg.seeds.front();
  const fs::path root = resolve_output_root(cfg.output_dir);

  const nomarl::RunResult result = nomarl::run_to_directory(cfg, run_seed, root);
  std::cout << "run complete: " << result.dir.string() << "\n";
  std::cout << "episodes " << result.summary.episodes << ", eval window " << result.summary.window
            << "\n";
  const auto& m = result.summary.metrics.at("combined_reward");
  std::cout << "combined reward (last window): " << nomarl::format_g17(m.mean) << " +- "
            << nomarl::format_g17(m.ci_half) << "\n";
  if (result.summary.convergence_ep)
    std::cout << "converged at episode " << *result.summary.convergence_ep << "\n";
  else
    std::cout << "no convergence within " << result.summary.episodes << " episodes\n";
  return 0;
}

int cmd_sweep(const std::string& config_dir, const std::string& seeds_csv, int parallel,
              const std::vector<std::string>& overrides) {
  std::vector<std::string> config_files;
  for (const auto& entry : fs::directory_iterator(config_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      config_files.push_back(entry.path().string());
  std::sort(config_files.begin(), config_files.end());
  if (config_files.empty())
    throw nomarl::ConfigError("no .json configs found in " + config_dir);

  std::vector<std::uint64_t> seed_override;
  if (!seeds_csv.empty()) {
    std::istringstream ss(seeds_csv);
    for (std::string tok; std::getline(ss, tok, ',');) {
      try {
        seed_override.push_back(std::stoull(tok));
      } catch (const std::exception&) {
        throw nomarl::ConfigError("bad seed '" + tok + "' in --seeds");
      }
    }
  }

  std::vector<nomarl::ExperimentConfig> configs;
  for (const auto& file : config_files) {
    nomarl::ExperimentConfig cfg = load_with_overrides(file, overrides);
    if (!seed_override.empty()) cfg.seeds = seed_override;
    cfg.validate();
    configs.push_back(std::move(cfg));
  }

  const fs::path root = resolve_output_root(configs.front().output_dir);
  const auto results = nomarl::run_sweep(configs, parallel, root);

  std::vector<nomarl::RunRecord> records;
  records.reserve(results.size());
  for (const auto& r : results) records.push_back(nomarl::to_record(r));
  const auto cells = nomarl::aggregate_report(records);
  const std::string text = nomarl::format_report(cells);

  std::ofstream(root / "report.txt") << text;
  std::ofstream(root / "report.json") << nomarl::report_to_json(cells).dump(2) << "\n";
  nomarl::emit_plot_data(records, root / "plots");

  std::cout << results.size() << " runs complete under " << root.string() << "\n\n" << text;
  std::cout << "\nnote: p-values are raw (uncorrected) paired t-tests vs the static baseline\n";
  return 0;
}

std::vector<nomarl::RunRecord> load_records(const std::vector<std::string>& dirs) {
  std::vector<nomarl::RunRecord> records;
  records.reserve(dirs.size());
  for (const auto& d : dirs) records.push_back(nomarl::load_run(d));
  return records;
}

int cmd_report(const std::vector<std::string>& dirs, bool as_json) {
  const auto records = load_records(dirs);
  const auto cells = nomarl::aggregate_report(records);
  if (as_json)
    std::cout << nomarl::report_to_json(cells).dump(2) << "\n";
  else
    std::cout << nomarl::format_report(cells)
              << "\nnote: p-values are raw (uncorrected) paired t-tests vs the static baseline\n";
  return 0;
}

int cmd_plot_data(const std::vector<std::string>& dirs, const std::string& out) {
  const auto records = load_records(dirs);
  const fs::path out_dir =
      out.empty() ? resolve_output_root("runs") / "plots" : fs::path(out);
  nomarl::emit_plot_data(records, out_dir);
  std::cout << "wrote " << (out_dir / "convergence.csv").string() << " and "
            << (out_dir / "variance_ratio.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic IoT-NOMA code-assignment experiments"};
  app.require_subcommand(1);

  // codes
  auto* codes = app.add_subcommand("codes", "inspect a spreading codebook");
  int degree = 7, num_codes = 0, misalignment = 2;
  std::string strategy = "first_c";
  codes->add_option("--degree", degree, "shift-register degree (5 or 7)");
  codes->add_option("--num-codes", num_codes, "codebook size (0 = whole family)");
  codes->add_option("--strategy", strategy, "first_c | greedy_min_avg_rho");
  codes->add_option("--misalignment", misalignment, "chip misalignment window");

  // run
  auto* run = app.add_subcommand("run", "execute one seeded run");
  std::string run_config;
  std::vector<std::string> run_sets;
  std::uint64_t run_seed = 0;
  run->add_option("--config", run_config, "experiment config JSON")->required();
  run->add_option("--set", run_sets, "override, e.g. --set npg.alpha_base=0.01");
  auto* seed_opt = run->add_option("--seed", run_seed, "seed (default: first in config)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "run every config in a directory across seeds");
  std::string sweep_dir, sweep_seeds;
  int sweep_parallel = 1;
  std::vector<std::string> sweep_sets;
  sweep->add_option("--config-dir", sweep_dir, "directory of config JSON files")->required();
  sweep->add_option("--seeds", sweep_seeds, "comma-separated seed list (overrides configs)");
  sweep->add_option("--parallel", sweep_parallel, "concurrent runs");
  sweep->add_option("--set", sweep_sets, "override applied to every config");

  // report
  auto* report = app.add_subcommand("report", "aggregate finished runs into a comparison table");
  std::vector<std::string> report_dirs;
  bool report_json = false;
  report->add_option("--runs", report_dirs, "run directories")->required()->expected(-1);
  report->add_flag("--json", report_json, "emit machine-readable JSON");

  // plot-data
  auto* plot = app.add_subcommand("plot-data", "emit convergence and variance-ratio CSVs");
  std::vector<std::string> plot_dirs;
  std::string plot_out;
  plot->add_option("--runs", plot_dirs, "run directories")->required()->expected(-1);
  plot->add_option("--out", plot_out, "output directory (default <root>/plots)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // bad usage is a configuration error
  }

  try {
    if (codes->parsed()) return cmd_codes(degree, num_codes, strategy, misalignment);
    if (run->parsed()) return cmd_run(run_config, run_sets, run_seed, seed_opt->count() > 0);
    if (sweep->parsed()) return cmd_sweep(sweep_dir, sweep_seeds, sweep_parallel, sweep_sets);
    if (report->parsed()) return cmd_report(report_dirs, report_json);
    if (plot->parsed()) return cmd_plot_data(plot_dirs, plot_out);
  } catch (const nomarl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
