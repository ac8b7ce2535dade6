#pragma once
/**
 * The code-assignment MDP.  One environment owns a fixed device population
 * (spawned once from the topology stream), per-episode link states (LoS and
 * correlated shadowing redrawn at reset), per-step fading, traffic-driven
 * activity, and the five-component reward.
 *
 * Step ordering (fixed, load-bearing for reproducibility):
 *   validate action -> interference/SINR over current activity ->
 *   reward components (energies read pre-drain) -> serve buffers ->
 *   accumulate metrics -> drain batteries -> advance traffic ->
 *   redraw fading -> build next observation.
 *
 * Every random draw is action-independent (gates and fading are drawn for
 * every device every step), so two agents sharing a master seed see
 * identical channel and traffic realizations — the basis for paired
 * within-seed comparisons.
 */

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "nomarl/channel.hpp"
#include "nomarl/devices.hpp"
#include "nomarl/gold.hpp"
#include "nomarl/rng.hpp"
#include "nomarl/stats.hpp"

namespace nomarl {

struct NetworkObservation {
  std::vector<double> channel_gains;  // |h|^2 / sigma_h (standardized, unbounded)
  std::vector<double> energies;       // E / E_max in [0, 1]
  std::vector<std::uint8_t> activity;
  std::vector<double> buffers;  // Q / capacity in [0, 1]

  std::size_t size() const { return channel_gains.size(); }

  std::vector<double> flatten() const {
    std::vector<double> out;
    out.reserve(4 * size());
    out.insert(out.end(), channel_gains.begin(), channel_gains.end());
    out.insert(out.end(), energies.begin(), energies.end());
    for (auto a : activity) out.push_back(static_cast<double>(a));
    out.insert(out.end(), buffers.begin(), buffers.end());
    return out;
  }
};

struct Assignment {
  std::vector<int> codes;  // one 1-based codebook index per device
};

struct RewardCoefficients {
  double alpha = 1.0;    // throughput
  double beta = 0.5;     // energy
  double gamma = 2.0;    // reliability
  double delta = 0.5;    // interference
  double epsilon = 1.0;  // fairness
  double eps_small_j = 1e-6;
};

struct RewardBreakdown {
  double throughput = 0.0;
  double energy = 0.0;
  double reliability = 0.0;
  double interference = 0.0;
  double fairness = 0.0;
  double combined = 0.0;
};

/// Sum over active devices of w_i * log2(1 + SINR_i).
inline double reward_throughput(std::span<const double> sinr, std::span<const double> weights,
                                std::span<const std::uint8_t> active) {
  double acc = 0.0;
  for (std::size_t i = 0; i < sinr.size(); ++i)
    if (active[i]) acc += weights[i] * std::log2(1.0 + sinr[i]);
  return acc;
}

/// -sum over active devices of P_i[W] / (E_i + eps); more negative when depleted.
inline double reward_energy(std::span<const double> powers_w,
                            std::span<const std::uint8_t> active,
                            std::span<const double> energies_j, double eps_small_j) {
  double acc = 0.0;
  for (std::size_t i = 0; i < powers_w.size(); ++i)
    if (active[i]) acc += powers_w[i] / (energies_j[i] + eps_small_j);
  return -acc;
}

/// Count of critical devices meeting their SINR requirement (inclusive).
inline double reward_reliability(std::span<const double> sinr,
                                 std::span<const std::uint8_t> is_critical,
                                 std::span<const double> sinr_req_linear) {
  double count = 0.0;
  for (std::size_t i = 0; i < sinr.size(); ++i)
    if (is_critical[i] && sinr[i] >= sinr_req_linear[i]) count += 1.0;
  return count;
}

/**
 * Code-coupling penalty: sum over ordered active pairs i != j of
 * rho[a_i][a_j] * |h_j|^2.  Both endpoints restricted to active devices
 * (interference at an idle receiver carries no meaning).
 */
inline double reward_interference(std::span<const int> codes,
                                  std::span<const std::uint8_t> active,
                                  std::span<const double> gains, const Codebook& cb) {
  double acc = 0.0;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (!active[i]) continue;
    for (std::size_t j = 0; j < codes.size(); ++j) {
      if (j == i || !active[j]) continue;
      acc += cb.rho(codes[i] - 1, codes[j] - 1) * gains[j];
    }
  }
  return acc;
}

/// Jain index over the served bits of active devices; idle network -> 1.
inline double reward_fairness(std::span<const double> served_bits,
                              std::span<const std::uint8_t> active) {
  std::vector<double> xs;
  xs.reserve(served_bits.size());
  for (std::size_t i = 0; i < served_bits.size(); ++i)
    if (active[i]) xs.push_back(served_bits[i]);
  if (xs.empty()) return 1.0;
  return jain_index(xs);
}

inline RewardBreakdown combine_reward(double thr, double en, double rel, double intf, double fair,
                                      const RewardCoefficients& rc) {
  RewardBreakdown r;
  r.throughput = thr;
  r.energy = en;
  r.reliability = rel;
  r.interference = intf;
  r.fairness = fair;
  r.combined = rc.alpha * thr + rc.beta * en + rc.gamma * rel - rc.delta * intf + rc.epsilon * fair;
  return r;
}

struct StepResult {
  NetworkObservation obs;
  RewardBreakdown reward;
  std::vector<double> sinr;
  bool done = false;
};

struct EnvConfig {
  ScenarioParams scenario;
  ClassConfig classes;
  TrafficParams traffic;
  ChannelParams channel;
  RewardCoefficients reward;
  int steps_per_episode = 100;
  bool has_beta_class = false;
  std::array<std::array<double, 3>, 3> beta_class{{{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}};

  void validate() const {
    scenario.validate();
    classes.validate();
    traffic.validate();
    channel.validate();
    if (steps_per_episode < 1) throw std::invalid_argument("steps_per_episode must be >= 1");
    if (has_beta_class)
      for (const auto& row : beta_class)
        for (double b : row)
          if (b < 0.0) throw std::invalid_argument("interference sensitivity must be >= 0");
  }
};

class NomaEnv {
 public:
  NomaEnv(EnvConfig cfg, Codebook codebook, std::uint64_t master_seed)
      : cfg_(std::move(cfg)),
        cb_(std::move(codebook)),
        topology_rng_(master_seed, "topology"),
        shadowing_rng_(master_seed, "shadowing"),
        fading_rng_(master_seed, "fading"),
        traffic_rng_(master_seed, "traffic") {
    cfg_.validate();
    devices_ = spawn_scenario(cfg_.scenario, cfg_.classes, topology_rng_);
    const std::size_t n = devices_.size();

    std::vector<Vec2> positions(n);
    powers_mw_.resize(n);
    powers_w_.resize(n);
    weights_.resize(n);
    sinr_req_lin_.resize(n);
    is_critical_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      positions[i] = devices_[i].position;
      powers_mw_[i] = devices_[i].tx_power_mw();
      powers_w_[i] = devices_[i].tx_power_w();
      const ClassParams& cp = cfg_.classes.params(devices_[i].cls);
      weights_[i] = cp.class_weight;
      sinr_req_lin_[i] = db_to_linear(cp.sinr_req_db);
      is_critical_[i] = devices_[i].cls == DeviceClass::Critical ? 1 : 0;
    }
    shadow_model_ = std::make_unique<ShadowingModel>(positions, cfg_.channel.shadow_corr_dist_m);

    if (cfg_.has_beta_class) {
      beta_.resize(n * n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          beta_[i * n + j] = cfg_.beta_class[static_cast<std::size_t>(devices_[i].cls)]
                                            [static_cast<std::size_t>(devices_[j].cls)];
    }

    links_.resize(n);
    states_.resize(n);
    active_.resize(n);
    gains_.resize(n);
  }

  int num_devices() const { return static_cast<int>(devices_.size()); }
  int num_codes() const { return cb_.num_codes; }
  int steps_per_episode() const { return cfg_.steps_per_episode; }
  const EnvConfig& config() const { return cfg_; }
  const Codebook& codebook() const { return cb_; }
  const std::vector<DeviceProfile>& profiles() const { return devices_; }
  const std::vector<DeviceState>& device_states() const { return states_; }
  const std::vector<LinkState>& links() const { return links_; }
  const std::vector<double>& raw_gains() const { return gains_; }
  const std::vector<std::uint8_t>& active() const { return active_; }
  const std::vector<double>& powers_mw() const { return powers_mw_; }
  const std::vector<double>& class_weights() const { return weights_; }
  const std::vector<double>& sinr_requirements_linear() const { return sinr_req_lin_; }
  const EpisodeMetrics& episode_metrics() const { return metrics_; }
  long total_dropped_packets() const {
    long d = 0;
    for (const auto& s : states_) d += s.dropped_packets;
    return d;
  }

  NetworkObservation reset() {
    const std::size_t n = devices_.size();
    const long period = cfg_.traffic.periodic_period_steps();
    for (std::size_t i = 0; i < n; ++i) {
      states_[i] = DeviceState{};
      states_[i].energy_j = devices_[i].battery_capacity_j;
      if (devices_[i].cls == DeviceClass::Periodic)
        states_[i].next_periodic_step =
            traffic_rng_.uniform_int(0, static_cast<int>(period) - 1);
    }

    // Large-scale link state holds for the whole episode.
    std::vector<double> sigmas(n);
    for (std::size_t i = 0; i < n; ++i) {
      LinkState& ls = links_[i];
      ls.device_id = static_cast<int>(i);
      ls.distance_m = devices_[i].distance_from_origin();
      ls.is_los = shadowing_rng_.bernoulli(los_probability(ls.distance_m));
      sigmas[i] = ls.is_los ? cfg_.channel.shadow_sigma_los_db : cfg_.channel.shadow_sigma_nlos_db;
    }
    const auto shadow = shadow_model_->sample(std::span<const double>(sigmas), shadowing_rng_);
    for (std::size_t i = 0; i < n; ++i) links_[i].shadowing_db = shadow[i];

    redraw_fading();
    step_count_ = 0;
    advance_traffic();  // arrivals and gates for the first step
    metrics_ = EpisodeMetrics{};
    acc_ = Accumulators{};
    welford_ = Welford{};
    return build_observation();
  }

  StepResult step(const Assignment& action) {
    const std::size_t n = devices_.size();
    if (step_count_ >= cfg_.steps_per_episode)
      throw std::logic_error("step() called on a finished episode; call reset()");
    if (action.codes.size() != n)
      throw std::invalid_argument("assignment covers " + std::to_string(action.codes.size()) +
                                  " devices, expected " + std::to_string(n));
    for (int c : action.codes)
      if (c < 1 || c > cb_.num_codes)
        throw std::invalid_argument("code index " + std::to_string(c) + " outside [1, " +
                                    std::to_string(cb_.num_codes) + "]");

    const auto interference =
        compute_interference(action.codes, active_, powers_mw_, gains_, cb_,
                             beta_.empty() ? nullptr : beta_.data());
    const auto sinr =
        compute_sinr(active_, powers_mw_, gains_, interference, cfg_.channel.processing_gain,
                     cfg_.channel.noise_floor_mw(), cfg_.channel.external_interference_mw());

    // Service: active devices above their class threshold drain their queue.
    std::vector<double> served_bits(n, 0.0);
    double step_served_bits = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active_[i] || sinr[i] < sinr_req_lin_[i]) continue;
      const double rate_bps = cfg_.channel.bandwidth_hz * std::log2(1.0 + sinr[i]);
      const long deliverable = static_cast<long>(
          std::floor(rate_bps * cfg_.traffic.step_duration_s /
                     static_cast<double>(cfg_.traffic.packet_size_bits)));
      const long pkts = std::min<long>(states_[i].buffer, deliverable);
      states_[i].buffer -= static_cast<int>(pkts);
      served_bits[i] = static_cast<double>(pkts) * cfg_.traffic.packet_size_bits;
      step_served_bits += served_bits[i];
    }

    // Reward components; energies are the pre-drain values.
    std::vector<double> energies(n);
    for (std::size_t i = 0; i < n; ++i) energies[i] = states_[i].energy_j;
    const double thr = reward_throughput(sinr, weights_, active_);
    const double en = reward_energy(powers_w_, active_, energies, cfg_.reward.eps_small_j);
    const double rel = reward_reliability(sinr, is_critical_, sinr_req_lin_);
    const double intf = reward_interference(action.codes, active_, gains_, cb_);
    const double fair = reward_fairness(served_bits, active_);
    const RewardBreakdown reward = combine_reward(thr, en, rel, intf, fair, cfg_.reward);

    accumulate_metrics(sinr, reward, step_served_bits);

    for (std::size_t i = 0; i < n; ++i)
      update_energy(states_[i], active_[i], devices_[i].tx_power_dbm,
                    cfg_.traffic.step_duration_s);

    ++step_count_;
    const bool done = step_count_ >= cfg_.steps_per_episode;
    if (!done) {
      advance_traffic();
      redraw_fading();
    } else {
      finalize_metrics();
    }

    StepResult out;
    out.obs = build_observation();
    out.reward = reward;
    out.sinr = sinr;
    out.done = done;
    return out;
  }

 private:
  struct Accumulators {
    double rate_sum = 0.0;  // sum over steps of per-device mean active rate (bps)
    double served_bits = 0.0;
    double energy_used_j = 0.0;
    double reliability_hits = 0.0;
    double fairness_sum = 0.0;
    double interference_sum = 0.0;
    double energy_component_sum = 0.0;
    double combined_sum = 0.0;
  };

  void advance_traffic() {
    for (std::size_t i = 0; i < devices_.size(); ++i) {
      step_traffic(states_[i], devices_[i], cfg_.classes.params(devices_[i].cls), cfg_.traffic,
                   step_count_, traffic_rng_);
      active_[i] = states_[i].active ? 1 : 0;
    }
  }

  void redraw_fading() {
    for (std::size_t i = 0; i < devices_.size(); ++i) {
      LinkState& ls = links_[i];
      ls.fading = sample_fading(fading_rng_, ls.is_los, cfg_.channel.rician_k_db);
      ls.channel_gain = compute_channel_gain(
          path_loss_db(ls.distance_m, cfg_.channel.carrier_freq_ghz, ls.is_los), ls.shadowing_db,
          ls.fading);
      gains_[i] = ls.channel_gain;
    }
  }

  void accumulate_metrics(const std::vector<double>& sinr, const RewardBreakdown& r,
                          double step_served_bits) {
    const std::size_t n = devices_.size();
    double rate = 0.0;
    double energy_step = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active_[i]) continue;
      rate += cfg_.channel.bandwidth_hz * std::log2(1.0 + sinr[i]);
      energy_step += powers_w_[i] * cfg_.traffic.step_duration_s;
    }
    acc_.rate_sum += rate / static_cast<double>(n);
    acc_.served_bits += step_served_bits;
    acc_.energy_used_j += energy_step;
    int ncrit = 0;
    for (std::size_t i = 0; i < n; ++i) ncrit += is_critical_[i];
    if (ncrit > 0) {
      double hits = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (is_critical_[i] && sinr[i] >= sinr_req_lin_[i]) hits += 1.0;
      acc_.reliability_hits += hits / static_cast<double>(ncrit);
    }
    acc_.fairness_sum += r.fairness;
    acc_.interference_sum += r.interference;
    acc_.energy_component_sum += r.energy;
    acc_.combined_sum += r.combined;
  }

  void finalize_metrics() {
    const double steps = static_cast<double>(cfg_.steps_per_episode);
    int ncrit = 0;
    for (auto c : is_critical_) ncrit += c;
    metrics_.throughput_mbps = acc_.rate_sum / steps / 1e6;
    metrics_.energy_bits_per_j =
        acc_.energy_used_j > 0.0 ? acc_.served_bits / acc_.energy_used_j : 0.0;
    metrics_.energy_component = acc_.energy_component_sum / steps;
    metrics_.critical_reliability = ncrit > 0 ? acc_.reliability_hits / steps : 1.0;
    metrics_.fairness = acc_.fairness_sum / steps;
    metrics_.interference = acc_.interference_sum / steps;
    metrics_.combined_reward = acc_.combined_sum / steps;
  }

  NetworkObservation build_observation() {
    const std::size_t n = devices_.size();
    NetworkObservation obs;
    obs.channel_gains.resize(n);
    obs.energies.resize(n);
    obs.activity = active_;
    obs.buffers.resize(n);
    for (std::size_t i = 0; i < n; ++i) welford_.push(gains_[i]);
    const double sd = welford_.stddev_sample();
    const double scale = sd > 0.0 ? sd : 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      obs.channel_gains[i] = gains_[i] / scale;
      obs.energies[i] = states_[i].energy_j / devices_[i].battery_capacity_j;
      obs.buffers[i] = static_cast<double>(states_[i].buffer) /
                       static_cast<double>(devices_[i].buffer_capacity);
    }
    return obs;
  }

  EnvConfig cfg_;
  Codebook cb_;
  RngStream topology_rng_, shadowing_rng_, fading_rng_, traffic_rng_;
  std::vector<DeviceProfile> devices_;
  std::vector<DeviceState> states_;
  std::vector<LinkState> links_;
  std::unique_ptr<ShadowingModel> shadow_model_;
  std::vector<double> powers_mw_, powers_w_, weights_, sinr_req_lin_, gains_, beta_;
  std::vector<std::uint8_t> is_critical_, active_;
  int step_count_ = 0;
  EpisodeMetrics metrics_;
  Accumulators acc_;
  Welford welford_;
};

}  // namespace nomarl
