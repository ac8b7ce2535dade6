/**
 * Drive the simulator directly — no runner, no built-in agent.  A hand-rolled
 * epsilon-greedy assigner picks codes from observed interference, which is
 * the integration point for plugging in an external training stack.
 *
 * Build target: sample_custom_loop
 */

#include <cstdio>
#include <vector>

#include "nomarl/env.hpp"
#include "nomarl/gold.hpp"
#include "nomarl/rng.hpp"

int main() {
  using namespace nomarl;

  EnvConfig cfg;
  cfg.scenario.kind = ScenarioKind::SmartCity;
  cfg.scenario.num_devices = 12;
  cfg.steps_per_episode = 100;
  // Keep every class busy so code choices matter from the first episode.
  cfg.traffic.event_rate_hz = 500.0;
  cfg.traffic.periodic_rate_hz = 100.0;
  cfg.classes.critical.duty_cycle = 0.9;
  cfg.classes.periodic.duty_cycle = 0.9;
  cfg.classes.best_effort.duty_cycle = 0.9;

  const Codebook cb = select_codebook(default_gold_family(5), 8, CodebookStrategy::FirstC, 2);
  NomaEnv env(cfg, cb, /*master_seed=*/42);
  const int n = env.num_devices(), C = env.num_codes();
  std::printf("%d devices, %d codes, %d steps per episode\n", n, C, env.steps_per_episode());

  RngStream explore(42, "explorer");
  std::vector<int> codes(static_cast<std::size_t>(n));
  for (auto& c : codes) c = explore.uniform_int(1, C);

  for (int episode = 1; episode <= 20; ++episode) {
    NetworkObservation obs = env.reset();
    double ep_reward = 0.0;
    for (int t = 0; t < env.steps_per_episode(); ++t) {
      // Epsilon-greedy: mostly keep the current assignment, occasionally move
      // one device to the code with the least coupling to everyone else.
      if (explore.uniform() < 0.2) {
        const int mover = explore.uniform_int(0, n - 1);
        int best_code = codes[static_cast<std::size_t>(mover)];
        double best_cost = 1e300;
        for (int cand = 1; cand <= C; ++cand) {
          double cost = 0.0;
          for (int j = 0; j < n; ++j)
            if (j != mover && obs.activity[static_cast<std::size_t>(j)])
              cost += cb.rho(cand - 1, codes[static_cast<std::size_t>(j)] - 1);
          if (cost < best_cost) {
            best_cost = cost;
            best_code = cand;
          }
        }
        codes[static_cast<std::size_t>(mover)] = best_code;
      }
      const StepResult sr = env.step(Assignment{codes});
      obs = sr.obs;
      ep_reward += sr.reward.combined;
      if (sr.done) break;
    }
    if (episode % 5 == 0)
      std::printf("episode %2d: mean step reward %.3f, dropped so far %ld\n", episode,
                  ep_reward / env.steps_per_episode(), env.total_dropped_packets());
  }
  return 0;
}
