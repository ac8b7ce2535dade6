/**
 * Run one seeded experiment from a JSON config and print a learning curve.
 * Equivalent to `nomarl run --config <cfg> --seed <seed>` but shows how to
 * drive the runner from your own code and read results in memory.
 *
 * Usage: sample_single_run [config.json] [seed]
 * Defaults: configs/reduced_smart_city.json, seed 1.
 *
 * Build target: sample_single_run
 */

#include <cstdio>
#include <cstdlib>
#include <string>

#include "nomarl/config.hpp"
#include "nomarl/runner.hpp"

int main(int argc, char** argv) {
  using namespace nomarl;

  const std::string path = argc > 1 ? argv[1] : "configs/reduced_smart_city.json";
  const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;

  ExperimentConfig cfg = load_config(path);
  cfg.agent = AgentKind::Npg;
  std::printf("config '%s': %d devices, %d codes, %d episodes x %d steps, agent %s, seed %llu\n",
              cfg.name.c_str(), cfg.scenario.resolved_num_devices(), cfg.num_codes, cfg.episodes,
              cfg.steps_per_episode, to_string(cfg.agent),
              static_cast<unsigned long long>(seed));

  const RunResult run = run_experiment(cfg, seed);

  std::printf("%8s %10s %10s %8s %9s\n", "episode", "combined", "thr Mbps", "crit%", "fairness");
  for (std::size_t e = 0; e < run.rows.size(); ++e) {
    if ((e + 1) % 50 != 0) continue;
    const EpisodeRow& row = run.rows[e];
    std::printf("%8zu %10.3f %10.3f %8.1f %9.3f\n", e + 1, row.metrics.combined_reward,
                row.metrics.throughput_mbps, 100.0 * row.metrics.critical_reliability,
                row.metrics.fairness);
  }

  const MetricSummary& combined = run.summary.metrics.at("combined_reward");
  std::printf("trailing window (%d episodes): combined %.3f +- %.3f (95%% CI)",
              run.summary.window, combined.mean, combined.ci_half);
  if (run.summary.convergence_ep)
    std::printf(", converged at episode %d", *run.summary.convergence_ep);
  std::printf("\nepisode trace: %s\n",
              run.dir.empty() ? "(in memory only)" : (run.dir / "episodes.csv").c_str());
  return 0;
}
