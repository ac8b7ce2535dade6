#pragma once

/**
 * Deep deterministic policy gradient over the continuous code-embedding
 * space.  The actor maps the flattened network observation (4N) to one
 * d-dimensional latent vector per device; each latent is hard-quantized to
 * the nearest embedding-codebook vector to obtain the discrete code, while
 * the pre-quantization latent is what gets stored, replayed, and trained on.
 * The actor objective adds a quantization penalty pulling latents toward the
 * codebook so the continuous policy and its discrete projection stay close.
 *
 * Exploration noise is Gaussian, scaled per device class (cautious around
 * critical traffic, explorative where losses are cheap) and decayed per
 * episode.  Training uses prioritized replay with importance-sampling
 * correction on the critic only.
 */

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "nomarl/devices.hpp"
#include "nomarl/embedding.hpp"
#include "nomarl/env.hpp"
#include "nomarl/nn.hpp"
#include "nomarl/replay.hpp"
#include "nomarl/rng.hpp"

namespace nomarl {

struct DdpgConfig {
  int hidden_width = 128;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double discount = 0.95;
  double tau = 0.005;            // soft-update rate for both target networks
  double lambda_quant = 0.1;     // weight of the quantization penalty
  double sigma_initial = 0.2;    // exploration noise scale at episode 0
  double sigma_decay = 0.999;    // per-episode multiplicative decay
  double noise_scale_critical = 0.5;
  double noise_scale_periodic = 1.0;
  double noise_scale_best_effort = 1.5;
  std::size_t replay_capacity = 1000000;
  double replay_alpha = 0.6;
  double replay_epsilon = 1e-3;
  double beta_initial = 0.4;     // IS exponent, annealed linearly to 1
  long beta_anneal_steps = 20000;
  int batch_size = 64;
  bool adaptive_codebook = false;
  double codebook_lr = 1e-4;

  void validate() const {
    if (hidden_width < 1) throw std::invalid_argument("hidden_width must be >= 1");
    if (actor_lr < 0.0 || critic_lr < 0.0) throw std::invalid_argument("negative learning rate");
    if (discount < 0.0 || discount > 1.0) throw std::invalid_argument("discount must be in [0,1]");
    if (tau < 0.0 || tau > 1.0) throw std::invalid_argument("tau must be in [0,1]");
    if (lambda_quant < 0.0) throw std::invalid_argument("lambda_quant must be >= 0");
    if (sigma_initial < 0.0) throw std::invalid_argument("sigma_initial must be >= 0");
    if (sigma_decay <= 0.0 || sigma_decay > 1.0)
      throw std::invalid_argument("sigma_decay must be in (0,1]");
    if (noise_scale_critical < 0.0 || noise_scale_periodic < 0.0 || noise_scale_best_effort < 0.0)
      throw std::invalid_argument("noise scales must be >= 0");
    if (replay_capacity < 1 || replay_capacity > 1000000)
      throw std::invalid_argument("replay_capacity must be in [1, 1e6]");
    if (beta_initial < 0.0 || beta_initial > 1.0)
      throw std::invalid_argument("beta_initial must be in [0,1]");
    if (beta_anneal_steps < 1) throw std::invalid_argument("beta_anneal_steps must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (codebook_lr < 0.0) throw std::invalid_argument("codebook_lr must be >= 0");
  }
};

struct DdpgActResult {
  Eigen::VectorXd latent;  // N·d, device-major (device i occupies [i·d, (i+1)·d))
  Assignment assignment;
};

struct DdpgTrainStats {
  bool applied = false;      // false when skipped (buffer too small) or aborted
  bool degenerate = false;   // non-finite loss/gradient detected; step aborted
  double critic_loss = 0.0;  // IS-weighted mean squared TD error
  double mean_q = 0.0;       // mean critic value of the current actor's actions
  double quant_loss = 0.0;   // mean squared distance of latents to the codebook
  double beta = 0.0;         // IS exponent used for this sample
};

class DdpgAgent {
 public:
  DdpgAgent(const DdpgConfig& cfg, const EmbeddingCodebook& embedding,
            std::span<const DeviceClass> classes, std::uint64_t master_seed)
      : cfg_(cfg),
        embedding_(embedding),
        classes_(classes.begin(), classes.end()),
        replay_(cfg.replay_capacity, cfg.replay_alpha, cfg.replay_epsilon),
        explore_rng_(master_seed, "ddpg-exploration"),
        replay_rng_(master_seed, "ddpg-replay") {
    cfg_.validate();
    if (classes_.empty()) throw std::invalid_argument("need at least one device");
    if (embedding_.num_codes() < 1) throw std::invalid_argument("empty embedding codebook");
    const int n = static_cast<int>(classes_.size());
    const int d = embedding_.dimension();
    obs_dim_ = 4 * n;
    act_dim_ = n * d;
    RngStream init(master_seed, "ddpg-init");
    actor_ = DenseNet({obs_dim_, cfg_.hidden_width, cfg_.hidden_width, act_dim_},
                      {Activation::Relu, Activation::Relu, Activation::Tanh}, init);
    critic_ = DenseNet({obs_dim_ + act_dim_, cfg_.hidden_width, cfg_.hidden_width, 1},
                       {Activation::Relu, Activation::Relu, Activation::Identity}, init);
    actor_target_ = actor_;
    critic_target_ = critic_;
    actor_adam_ = AdamState(actor_, cfg_.actor_lr);
    critic_adam_ = AdamState(critic_, cfg_.critic_lr);
    sigma_ = cfg_.sigma_initial;
  }

  const DdpgConfig& config() const { return cfg_; }
  const EmbeddingCodebook& embedding() const { return embedding_; }
  const DenseNet& actor() const { return actor_; }
  const DenseNet& critic() const { return critic_; }
  const DenseNet& actor_target() const { return actor_target_; }
  const DenseNet& critic_target() const { return critic_target_; }
  const PrioritizedReplay& replay() const { return replay_; }
  double sigma() const { return sigma_; }
  long train_steps() const { return train_steps_; }
  bool degenerate() const { return degenerate_; }
  int num_devices() const { return static_cast<int>(classes_.size()); }

  double noise_scale(DeviceClass c) const {
    switch (c) {
      case DeviceClass::Critical: return cfg_.noise_scale_critical;
      case DeviceClass::Periodic: return cfg_.noise_scale_periodic;
      case DeviceClass::BestEffort: return cfg_.noise_scale_best_effort;
    }
    throw std::logic_error("unknown device class");
  }

  /** Call at the start of each episode; decays the exploration scale. */
  void begin_episode() {
    sigma_ = cfg_.sigma_initial * std::pow(cfg_.sigma_decay, static_cast<double>(episodes_));
    ++episodes_;
  }

  /**
   * Deterministic actor output plus (optionally) class-scaled Gaussian noise,
   * then nearest-neighbor quantization per device.  The returned latent is
   * the post-noise vector — the one that belongs in the replay buffer.
   */
  DdpgActResult act(const NetworkObservation& obs, bool explore) {
    const Eigen::VectorXd x = flatten_obs(obs);
    DdpgActResult out;
    out.latent = actor_.forward(x).col(0);
    const int d = embedding_.dimension();
    for (int i = 0; i < num_devices(); ++i) {
      if (explore) {
        const double scale = sigma_ * noise_scale(classes_[static_cast<std::size_t>(i)]);
        for (int k = 0; k < d; ++k) out.latent(i * d + k) += scale * explore_rng_.gaussian();
      }
    }
    out.assignment.codes.resize(classes_.size());
    for (int i = 0; i < num_devices(); ++i)
      out.assignment.codes[static_cast<std::size_t>(i)] =
          hard_quantize(out.latent.segment(i * d, d), embedding_);
    return out;
  }

  /**
   * Store one transition.  The replay-context weights are frozen here: a
   * transition taken while critical devices crowd the channel, or while
   * batteries run low, keeps that elevated priority for its whole life.
   */
  void observe(const NetworkObservation& obs, const DdpgActResult& action, double reward,
               const NetworkObservation& next_obs, bool done) {
    if (static_cast<int>(obs.size()) != num_devices() ||
        static_cast<int>(next_obs.size()) != num_devices())
      throw std::invalid_argument("observation size mismatch");
    ReplayEntry e;
    e.obs = obs.flatten();
    e.action.assign(action.latent.data(), action.latent.data() + action.latent.size());
    e.assignment = action.assignment.codes;
    e.reward = reward;
    e.next_obs = next_obs.flatten();
    e.done = done;
    int active = 0, critical = 0;
    double energy_sum = 0.0;
    for (int i = 0; i < num_devices(); ++i) {
      const auto ui = static_cast<std::size_t>(i);
      if (obs.activity[ui]) {
        ++active;
        if (classes_[ui] == DeviceClass::Critical) ++critical;
      }
      energy_sum += obs.energies[ui];
    }
    e.w_device = 1.0 + (active > 0 ? static_cast<double>(critical) / active : 0.0);
    e.w_energy = 1.0 + (1.0 - energy_sum / num_devices());
    replay_.push(std::move(e));
  }

  /** One gradient step on critic and actor from a prioritized batch. */
  DdpgTrainStats train_step() {
    DdpgTrainStats stats;
    const auto B = static_cast<std::size_t>(cfg_.batch_size);
    if (replay_.size() < B) return stats;  // not enough experience yet

    stats.beta = std::min(
        1.0, cfg_.beta_initial + (1.0 - cfg_.beta_initial) * static_cast<double>(train_steps_) /
                                     static_cast<double>(cfg_.beta_anneal_steps));
    const auto sample = replay_.sample(B, stats.beta, replay_rng_);

    const auto Bi = static_cast<int>(B);
    Eigen::MatrixXd S(obs_dim_, Bi), S2(obs_dim_, Bi), A(act_dim_, Bi);
    Eigen::RowVectorXd r(Bi), w(Bi);
    for (int b = 0; b < Bi; ++b) {
      const ReplayEntry& e = replay_.entry(sample.indices[static_cast<std::size_t>(b)]);
      S.col(b) = Eigen::Map<const Eigen::VectorXd>(e.obs.data(), obs_dim_);
      S2.col(b) = Eigen::Map<const Eigen::VectorXd>(e.next_obs.data(), obs_dim_);
      A.col(b) = Eigen::Map<const Eigen::VectorXd>(e.action.data(), act_dim_);
      r(b) = e.reward;
      w(b) = sample.weights[static_cast<std::size_t>(b)];
    }

    // Bootstrapped target from the target networks.
    const Eigen::MatrixXd a2 = actor_target_.forward(S2);
    Eigen::MatrixXd sa2(obs_dim_ + act_dim_, Bi);
    sa2.topRows(obs_dim_) = S2;
    sa2.bottomRows(act_dim_) = a2;
    const Eigen::RowVectorXd q2 = critic_target_.forward(sa2).row(0);
    const Eigen::RowVectorXd y = r + cfg_.discount * q2;

    // Critic: importance-weighted squared TD error.
    Eigen::MatrixXd sa(obs_dim_ + act_dim_, Bi);
    sa.topRows(obs_dim_) = S;
    sa.bottomRows(act_dim_) = A;
    const ForwardCache critic_cache = forward_cached(critic_, sa);
    const Eigen::RowVectorXd delta = y - critic_cache.output.row(0);
    stats.critic_loss = (w.array() * delta.array().square()).mean();
    const Eigen::MatrixXd critic_upstream =
        (-2.0 / static_cast<double>(B)) * (w.array() * delta.array()).matrix();
    const Gradients critic_grads = backward(critic_, critic_cache, critic_upstream);

    // Actor: maximize Q(s, μ(s)) minus the quantization penalty.
    const ForwardCache actor_cache = forward_cached(actor_, S);
    const Eigen::MatrixXd& v = actor_cache.output;  // act_dim × B
    Eigen::MatrixXd sav(obs_dim_ + act_dim_, Bi);
    sav.topRows(obs_dim_) = S;
    sav.bottomRows(act_dim_) = v;
    const ForwardCache q_cache = forward_cached(critic_, sav);
    stats.mean_q = q_cache.output.row(0).mean();
    const Gradients q_grads = backward(
        critic_, q_cache, Eigen::MatrixXd::Constant(1, Bi, -1.0 / static_cast<double>(B)));

    const int d = embedding_.dimension();
    const int N = num_devices();
    Eigen::MatrixXd actor_upstream = q_grads.input.bottomRows(act_dim_);
    const double quant_norm = 1.0 / (static_cast<double>(B) * N);
    Eigen::MatrixXd codebook_grad = Eigen::MatrixXd::Zero(d, embedding_.num_codes());
    for (int b = 0; b < Bi; ++b) {
      for (int i = 0; i < N; ++i) {
        const Eigen::VectorXd vi = v.col(b).segment(i * d, d);
        const int code = hard_quantize(vi, embedding_);
        const Eigen::VectorXd diff = vi - embedding_.vectors.col(code - 1);
        stats.quant_loss += quant_norm * diff.squaredNorm();
        actor_upstream.col(b).segment(i * d, d) += cfg_.lambda_quant * 2.0 * quant_norm * diff;
        if (cfg_.adaptive_codebook) codebook_grad.col(code - 1) -= 2.0 * quant_norm * diff;
      }
    }
    const Gradients actor_grads = backward(actor_, actor_cache, actor_upstream);

    // Abort, without touching any parameters, if anything went non-finite.
    if (!std::isfinite(stats.critic_loss) || !std::isfinite(stats.mean_q) ||
        !std::isfinite(stats.quant_loss) || !delta.allFinite() ||
        !gradients_finite(critic_grads) || !gradients_finite(actor_grads)) {
      degenerate_ = true;
      stats.degenerate = true;
      return stats;
    }

    for (int b = 0; b < Bi; ++b)
      replay_.update_priority(sample.indices[static_cast<std::size_t>(b)], delta(b));
    adam_step(critic_adam_, critic_, critic_grads);
    adam_step(actor_adam_, actor_, actor_grads);
    soft_update(actor_target_, actor_, cfg_.tau);
    soft_update(critic_target_, critic_, cfg_.tau);
    if (cfg_.adaptive_codebook) embedding_.vectors -= cfg_.codebook_lr * codebook_grad;

    ++train_steps_;
    stats.applied = true;
    return stats;
  }

 private:
  Eigen::VectorXd flatten_obs(const NetworkObservation& obs) const {
    if (static_cast<int>(obs.size()) != num_devices())
      throw std::invalid_argument("observation size mismatch");
    const std::vector<double> flat = obs.flatten();
    return Eigen::Map<const Eigen::VectorXd>(flat.data(), static_cast<int>(flat.size()));
  }

  static bool gradients_finite(const Gradients& g) {
    for (const auto& m : g.weights)
      if (!m.allFinite()) return false;
    for (const auto& b : g.biases)
      if (!b.allFinite()) return false;
    return true;
  }

  DdpgConfig cfg_;
  EmbeddingCodebook embedding_;
  std::vector<DeviceClass> classes_;
  int obs_dim_ = 0;
  int act_dim_ = 0;
  DenseNet actor_, critic_, actor_target_, critic_target_;
  AdamState actor_adam_, critic_adam_;
  PrioritizedReplay replay_;
  RngStream explore_rng_, replay_rng_;
  double sigma_ = 0.0;
  long episodes_ = 0;
  long train_steps_ = 0;
  bool degenerate_ = false;
};

}  // namespace nomarl
