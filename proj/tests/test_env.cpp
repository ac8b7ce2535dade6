#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "nomarl/env.hpp"

using namespace nomarl;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

EnvConfig small_config(int n, bool busy) {
  EnvConfig cfg;
  cfg.scenario.kind = ScenarioKind::SensorNetwork;
  cfg.scenario.num_devices = n;
  cfg.steps_per_episode = 20;
  if (busy) {
    // Saturating traffic and open gates: every device transmits every step.
    cfg.traffic.event_rate_hz = 5000.0;
    cfg.classes.critical.duty_cycle = 1.0;
    cfg.classes.periodic.duty_cycle = 1.0;
    cfg.classes.best_effort.duty_cycle = 1.0;
    cfg.traffic.periodic_rate_hz = 1000.0;  // one periodic packet per step
  }
  return cfg;
}

Codebook small_codebook(int c) {
  return select_codebook(default_gold_family(5), c, CodebookStrategy::FirstC, 2);
}

Assignment round_robin(int n, int c) {
  Assignment a;
  for (int i = 0; i < n; ++i) a.codes.push_back(i % c + 1);
  return a;
}

}  // namespace

TEST_CASE("reset gives full batteries, empty buffers, and is reproducible", "[env]") {
  NomaEnv env(small_config(6, false), small_codebook(8), 42);
  const auto obs = env.reset();
  REQUIRE(obs.size() == 6);
  REQUIRE(obs.flatten().size() == 24);
  for (double e : obs.energies) REQUIRE(e == 1.0);
  for (double b : obs.buffers) REQUIRE(b == 0.0);
  for (double g : obs.channel_gains) {
    REQUIRE(std::isfinite(g));
    REQUIRE(g >= 0.0);
  }

  NomaEnv env2(small_config(6, false), small_codebook(8), 42);
  REQUIRE(env2.reset().flatten() == obs.flatten());

  NomaEnv env3(small_config(6, false), small_codebook(8), 43);
  REQUIRE(env3.reset().flatten() != obs.flatten());
}

TEST_CASE("trajectories replay bit-for-bit under a shared seed", "[env]") {
  const Assignment act = round_robin(5, 8);
  NomaEnv a(small_config(5, true), small_codebook(8), 7);
  NomaEnv b(small_config(5, true), small_codebook(8), 7);
  a.reset();
  b.reset();
  for (int ep = 0; ep < 2; ++ep) {
    for (int s = 0; s < 20; ++s) {
      const auto ra = a.step(act);
      const auto rb = b.step(act);
      REQUIRE(ra.obs.flatten() == rb.obs.flatten());
      REQUIRE(ra.reward.combined == rb.reward.combined);
      REQUIRE(ra.sinr == rb.sinr);
      REQUIRE(ra.done == rb.done);
    }
    a.reset();
    b.reset();
  }
}

TEST_CASE("malformed actions are rejected before any state mutation", "[env]") {
  NomaEnv env(small_config(4, true), small_codebook(8), 21);
  NomaEnv twin(small_config(4, true), small_codebook(8), 21);
  env.reset();
  twin.reset();

  Assignment wrong_size;
  wrong_size.codes = {1, 2, 3};
  REQUIRE_THROWS_AS(env.step(wrong_size), std::invalid_argument);
  Assignment bad_code = round_robin(4, 8);
  bad_code.codes[2] = 9;
  REQUIRE_THROWS_AS(env.step(bad_code), std::invalid_argument);
  bad_code.codes[2] = 0;
  REQUIRE_THROWS_AS(env.step(bad_code), std::invalid_argument);

  // After the failed calls the environment behaves as if they never happened.
  const auto r1 = env.step(round_robin(4, 8));
  const auto r2 = twin.step(round_robin(4, 8));
  REQUIRE(r1.obs.flatten() == r2.obs.flatten());
  REQUIRE(r1.reward.combined == r2.reward.combined);
}

TEST_CASE("an idle network produces the degenerate reward profile", "[env]") {
  EnvConfig cfg = small_config(5, false);
  cfg.traffic.event_rate_hz = 0.0;             // no event arrivals
  cfg.scenario.class_shares = {0.6, 0.0, 0.4};  // no periodic devices either
  NomaEnv env(cfg, small_codebook(8), 3);
  env.reset();
  for (int s = 0; s < 20; ++s) {
    const auto r = env.step(round_robin(5, 8));
    REQUIRE(r.reward.throughput == 0.0);
    REQUIRE(r.reward.interference == 0.0);
    REQUIRE(r.reward.energy == 0.0);
    REQUIRE(r.reward.reliability == 0.0);  // idle critical devices sit at SINR 0
    REQUIRE(r.reward.fairness == 1.0);
    for (double s_i : r.sinr) REQUIRE(s_i == 0.0);
  }
  const auto& m = env.episode_metrics();
  REQUIRE(m.throughput_mbps == 0.0);
  REQUIRE(m.critical_reliability == 0.0);
  REQUIRE(m.fairness == 1.0);
}

TEST_CASE("combined reward recombines from its components exactly", "[env]") {
  EnvConfig cfg = small_config(6, true);
  cfg.reward.alpha = 1.25;
  cfg.reward.beta = 0.75;
  cfg.reward.gamma = 1.5;
  cfg.reward.delta = 0.25;
  cfg.reward.epsilon = 0.5;
  NomaEnv env(cfg, small_codebook(8), 11);
  env.reset();
  for (int s = 0; s < 20; ++s) {
    const auto r = env.step(round_robin(6, 8));
    const double recombined = cfg.reward.alpha * r.reward.throughput +
                              cfg.reward.beta * r.reward.energy +
                              cfg.reward.gamma * r.reward.reliability -
                              cfg.reward.delta * r.reward.interference +
                              cfg.reward.epsilon * r.reward.fairness;
    REQUIRE_THAT(r.reward.combined, WithinAbs(recombined, 1e-12));
  }
}

TEST_CASE("step reward matches an independently coded oracle", "[env]") {
  const Codebook cb = small_codebook(8);
  NomaEnv env(small_config(3, true), cb, 99);
  env.reset();

  const Assignment act{{2, 5, 2}};
  for (int s = 0; s < 10; ++s) {
    // Snapshot pre-step state through the read-only accessors.
    const auto gains = env.raw_gains();
    const auto active = env.active();
    const auto& powers = env.powers_mw();
    const auto& weights = env.class_weights();
    const auto& reqs = env.sinr_requirements_linear();
    const auto& profiles = env.profiles();
    const auto& states = env.device_states();
    const auto& ch = env.config().channel;
    const auto& tr = env.config().traffic;
    const std::size_t n = gains.size();

    std::vector<double> pre_energy(n), interference(n, 0.0);
    std::vector<int> buffers(n);
    for (std::size_t i = 0; i < n; ++i) {
      pre_energy[i] = states[i].energy_j;
      buffers[i] = states[i].buffer;
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j || !active[i] || !active[j]) continue;
        interference[i] += effective_correlation(cb.codes[static_cast<std::size_t>(act.codes[i] - 1)],
                                                 cb.codes[static_cast<std::size_t>(act.codes[j] - 1)],
                                                 cb.max_misalignment) *
                           powers[j] * gains[j];
      }
    const double noise = ch.noise_floor_mw();
    const double iext = ch.external_interference_mw();
    std::vector<double> sinr(n, 0.0), served(n, 0.0);
    double thr = 0.0, en = 0.0, rel = 0.0, intf = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      sinr[i] = ch.processing_gain * powers[i] * gains[i] / (noise + interference[i] + iext);
      thr += weights[i] * std::log2(1.0 + sinr[i]);
      en -= powers[i] / 1000.0 / (pre_energy[i] + env.config().reward.eps_small_j);
      if (sinr[i] >= reqs[i]) {
        const long pkts = std::min<long>(
            buffers[i], static_cast<long>(std::floor(ch.bandwidth_hz * std::log2(1.0 + sinr[i]) *
                                                     tr.step_duration_s / tr.packet_size_bits)));
        served[i] = static_cast<double>(pkts) * tr.packet_size_bits;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (profiles[i].cls == DeviceClass::Critical && sinr[i] >= reqs[i]) rel += 1.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j || !active[i] || !active[j]) continue;
        intf += effective_correlation(cb.codes[static_cast<std::size_t>(act.codes[i] - 1)],
                                      cb.codes[static_cast<std::size_t>(act.codes[j] - 1)],
                                      cb.max_misalignment) *
                gains[j];
      }
    }
    std::vector<double> active_served;
    for (std::size_t i = 0; i < n; ++i)
      if (active[i]) active_served.push_back(served[i]);
    double fair = 1.0;
    if (!active_served.empty()) {
      double sum = 0.0, sum2 = 0.0;
      for (double x : active_served) {
        sum += x;
        sum2 += x * x;
      }
      fair = sum2 == 0.0 ? 1.0 : sum * sum / (static_cast<double>(active_served.size()) * sum2);
    }
    const auto& rc = env.config().reward;
    const double expect =
        rc.alpha * thr + rc.beta * en + rc.gamma * rel - rc.delta * intf + rc.epsilon * fair;

    const auto r = env.step(act);
    REQUIRE_THAT(r.reward.combined, WithinRel(expect, 1e-9));
    for (std::size_t i = 0; i < n; ++i) {
      if (sinr[i] == 0.0)
        REQUIRE(r.sinr[i] == 0.0);
      else
        REQUIRE_THAT(r.sinr[i], WithinRel(sinr[i], 1e-9));
    }
  }
}

TEST_CASE("sharing one code never beats distinct codes on interference", "[env]") {
  const Codebook cb = small_codebook(8);
  RngStream rng(55, "mono");
  for (int inst = 0; inst < 50; ++inst) {
    const int n = rng.uniform_int(2, 6);
    std::vector<std::uint8_t> active(static_cast<std::size_t>(n), 1);
    std::vector<double> gains(static_cast<std::size_t>(n));
    for (auto& g : gains) g = rng.uniform(1e-11, 1e-7);
    std::vector<int> distinct(static_cast<std::size_t>(n)), same(static_cast<std::size_t>(n), 1);
    for (int i = 0; i < n; ++i) distinct[static_cast<std::size_t>(i)] = i + 1;
    REQUIRE(reward_interference(distinct, active, gains, cb) <=
            reward_interference(same, active, gains, cb));
  }
}

TEST_CASE("fairness component conventions", "[env]") {
  std::vector<double> served{500.0, 0.0, 0.0};
  std::vector<std::uint8_t> active{1, 0, 0};
  REQUIRE(reward_fairness(served, active) == 1.0);  // single active device

  active = {1, 1, 1};
  REQUIRE_THAT(reward_fairness(served, active), WithinAbs(1.0 / 3.0, 1e-15));

  served = {0.0, 0.0, 0.0};
  REQUIRE(reward_fairness(served, active) == 1.0);  // active but nothing deliverable
}

TEST_CASE("episodes terminate at the configured horizon", "[env]") {
  NomaEnv env(small_config(4, true), small_codebook(8), 5);
  env.reset();
  for (int s = 0; s < 19; ++s) REQUIRE_FALSE(env.step(round_robin(4, 8)).done);
  REQUIRE(env.step(round_robin(4, 8)).done);
  REQUIRE_THROWS_AS(env.step(round_robin(4, 8)), std::logic_error);

  // Metrics are finalized and within their ranges.
  const auto& m = env.episode_metrics();
  REQUIRE(m.fairness >= 0.0);
  REQUIRE(m.fairness <= 1.0);
  REQUIRE(m.critical_reliability >= 0.0);
  REQUIRE(m.critical_reliability <= 1.0);
  REQUIRE(std::isfinite(m.combined_reward));
  REQUIRE(std::isfinite(m.throughput_mbps));
  REQUIRE(m.throughput_mbps >= 0.0);
  REQUIRE(m.energy_bits_per_j >= 0.0);
}

TEST_CASE("busy networks consume energy and move buffers", "[env]") {
  NomaEnv env(small_config(6, true), small_codebook(8), 33);
  env.reset();
  double combined_sum = 0.0;
  for (int s = 0; s < 20; ++s) combined_sum += env.step(round_robin(6, 8)).reward.combined;
  const auto& m = env.episode_metrics();
  REQUIRE_THAT(m.combined_reward, WithinRel(combined_sum / 20.0, 1e-12));
  REQUIRE(m.throughput_mbps > 0.0);
  REQUIRE(m.energy_component < 0.0);
  // Everyone transmitted, so batteries dropped below full.
  const auto& profiles = env.profiles();
  const auto& states = env.device_states();
  for (std::size_t i = 0; i < states.size(); ++i)
    REQUIRE(states[i].energy_j < profiles[i].battery_capacity_j);
}
