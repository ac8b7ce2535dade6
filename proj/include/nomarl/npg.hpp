#pragma once

/**
 * Natural policy gradient over a factorized per-device softmax policy.
 *
 * Each device i keeps its own linear parameters θ_i over features
 * φ(s, i, c) = [one-hot(c) | gain_i | energy_i | activity_i | ρ_avg(c) |
 * class-embedding(4)], so the joint policy is a product of small categorical
 * distributions and the Fisher information is exactly block-diagonal per
 * device.  Scores are nonzero only in the one-hot block and the ρ_avg slot
 * (every other feature is constant across candidate codes and cancels in the
 * softmax), which the Fisher-vector product exploits: each visited state
 * contributes in O(C) instead of O(D²).
 */

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "nomarl/devices.hpp"
#include "nomarl/env.hpp"
#include "nomarl/gold.hpp"
#include "nomarl/rng.hpp"

namespace nomarl {

struct NpgConfig {
  double alpha_base = 0.001;      // base learning rate
  double energy_lr_coeff = 0.5;   // λ in α_i = α_base·(1 + λ·(1 − E/Emax))
  double discount = 0.95;
  double fisher_damping = 1e-3;
  int cg_iterations = 15;
  double cg_tolerance = 1e-6;     // relative residual target
  double baseline_decay = 0.9;    // EMA decay of the per-step return baseline
  double w_critical = 1.75;
  double w_periodic = 1.0;
  double w_best_effort = 1.0;

  void validate() const {
    if (alpha_base < 0.0 || energy_lr_coeff < 0.0) throw std::invalid_argument("negative rate");
    if (discount < 0.0 || discount > 1.0) throw std::invalid_argument("discount must be in [0,1]");
    if (fisher_damping <= 0.0) throw std::invalid_argument("damping must be > 0");
    if (cg_iterations < 1) throw std::invalid_argument("cg_iterations must be >= 1");
    if (baseline_decay < 0.0 || baseline_decay >= 1.0)
      throw std::invalid_argument("baseline_decay must be in [0,1)");
  }
};

struct CgResult {
  Eigen::VectorXd x;
  double relative_residual = 0.0;
  int iterations = 0;
};

/** Plain conjugate gradient for SPD systems given as a mat-vec closure. */
inline CgResult conjugate_gradient(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply,
    const Eigen::VectorXd& b, int max_iters, double tol_rel) {
  CgResult res;
  res.x = Eigen::VectorXd::Zero(b.size());
  const double bnorm = b.norm();
  if (bnorm == 0.0) return res;  // solution of Ax=0 under SPD A

  Eigen::VectorXd r = b, p = b;
  double rs = r.squaredNorm();
  for (int it = 0; it < max_iters; ++it) {
    const Eigen::VectorXd ap = apply(p);
    const double denom = p.dot(ap);
    if (denom <= 0.0) break;  // matrix not PD along p; bail out
    const double alpha = rs / denom;
    res.x += alpha * p;
    r -= alpha * ap;
    const double rs_new = r.squaredNorm();
    res.iterations = it + 1;
    if (std::sqrt(rs_new) / bnorm < tol_rel) {
      rs = rs_new;
      break;
    }
    p = r + (rs_new / rs) * p;
    rs = rs_new;
  }
  res.relative_residual = r.norm() / bnorm;
  return res;
}

/** One on-policy episode: observation before each action, action, reward. */
struct NpgTrajectory {
  std::vector<NetworkObservation> observations;
  std::vector<Assignment> actions;
  std::vector<double> rewards;
};

struct NpgUpdateStats {
  double mean_advantage = 0.0;
  double gradient_norm = 0.0;
  double natural_norm = 0.0;
  int cg_fallbacks = 0;
  double min_lr = 0.0;
  double max_lr = 0.0;
};

class NpgPolicy {
 public:
  static constexpr int kClassEmbedDim = 4;

  NpgPolicy(const NpgConfig& cfg, const Codebook& cb, std::span<const DeviceClass> classes,
            RngStream& init_rng)
      : cfg_(cfg),
        num_codes_(cb.num_codes),
        rho_avg_(cb.rho_avg),
        classes_(classes.begin(), classes.end()) {
    cfg_.validate();
    if (classes.empty()) throw std::invalid_argument("need at least one device");
    if (num_codes_ < 1) throw std::invalid_argument("empty codebook");
    // Fixed per-class embedding vectors; see header note on why their
    // parameter slots stay at zero gradient.
    class_embed_.resize(3, Eigen::VectorXd(kClassEmbedDim));
    for (auto& v : class_embed_)
      for (int k = 0; k < kClassEmbedDim; ++k) v(k) = init_rng.gaussian(0.0, 0.1);
    theta_.assign(classes_.size(), Eigen::VectorXd::Zero(feature_dim()));
    for (DeviceClass c : classes_) weights_.push_back(class_weight(c));
  }

  int num_devices() const { return static_cast<int>(classes_.size()); }
  int num_codes() const { return num_codes_; }
  int feature_dim() const { return num_codes_ + 4 + kClassEmbedDim; }
  const NpgConfig& config() const { return cfg_; }
  const std::vector<Eigen::VectorXd>& parameters() const { return theta_; }
  std::vector<Eigen::VectorXd>& parameters() { return theta_; }
  double class_weight(DeviceClass c) const {
    switch (c) {
      case DeviceClass::Critical: return cfg_.w_critical;
      case DeviceClass::Periodic: return cfg_.w_periodic;
      case DeviceClass::BestEffort: return cfg_.w_best_effort;
    }
    throw std::logic_error("unknown device class");
  }

  /** φ(s, i, c); `code` is 1-based. */
  Eigen::VectorXd features(const NetworkObservation& obs, int device, int code) const {
    check_device_code(device, code);
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(feature_dim());
    phi(code - 1) = 1.0;
    const auto i = static_cast<std::size_t>(device);
    phi(num_codes_ + 0) = obs.channel_gains[i];
    phi(num_codes_ + 1) = obs.energies[i];
    phi(num_codes_ + 2) = obs.activity[i] ? 1.0 : 0.0;
    phi(num_codes_ + 3) = rho_avg_[static_cast<std::size_t>(code - 1)];
    phi.segment(num_codes_ + 4, kClassEmbedDim) =
        class_embed_[static_cast<std::size_t>(classes_[i])];
    return phi;
  }

  /** Categorical distribution over codes for one device. */
  Eigen::VectorXd probabilities(const NetworkObservation& obs, int device) const {
    check_device_code(device, 1);
    // θᵀφ(c) differs across c only via the one-hot block and the ρ_avg slot;
    // the state-dependent slots are shared by all codes and cancel in the
    // softmax, so the observation does not enter the distribution itself.
    static_cast<void>(obs);
    const Eigen::VectorXd& th = theta_[static_cast<std::size_t>(device)];
    Eigen::VectorXd logits(num_codes_);
    for (int c = 0; c < num_codes_; ++c)
      logits(c) = th(c) + th(num_codes_ + 3) * rho_avg_[static_cast<std::size_t>(c)];
    const double shift = logits.maxCoeff();
    Eigen::VectorXd p = (logits.array() - shift).exp();
    return p / p.sum();
  }

  /** ∇_θ log π(code | s, i) = φ(code) − E_π[φ]; `code` is 1-based. */
  Eigen::VectorXd score(const NetworkObservation& obs, int device, int code) const {
    const Eigen::VectorXd p = probabilities(obs, device);
    Eigen::VectorXd s = features(obs, device, code);
    for (int c = 1; c <= num_codes_; ++c) s -= p(c - 1) * features(obs, device, c);
    return s;
  }

  /** Independent categorical draw per device; optionally logs log π(a_i). */
  Assignment sample(const NetworkObservation& obs, RngStream& rng,
                    std::vector<double>* log_probs = nullptr) const {
    Assignment a;
    a.codes.resize(classes_.size());
    if (log_probs) log_probs->assign(classes_.size(), 0.0);
    for (int i = 0; i < num_devices(); ++i) {
      const Eigen::VectorXd p = probabilities(obs, i);
      const double u = rng.uniform();
      double acc = 0.0;
      int pick = num_codes_;  // fall through to the last code on rounding
      for (int c = 0; c < num_codes_; ++c) {
        acc += p(c);
        if (u < acc) {
          pick = c + 1;
          break;
        }
      }
      a.codes[static_cast<std::size_t>(i)] = pick;
      if (log_probs) (*log_probs)[static_cast<std::size_t>(i)] = std::log(p(pick - 1));
    }
    return a;
  }

  /**
   * Exact-model damped Fisher-vector product for one device over a set of
   * visited observations: (1/T)·Σ_s Σ_c π(c|s)·score_c·(score_cᵀ x) + damping·x.
   */
  Eigen::VectorXd fisher_vector_product(std::span<const NetworkObservation> states, int device,
                                        const Eigen::VectorXd& x) const {
    if (x.size() != feature_dim()) throw std::invalid_argument("probe dimension mismatch");
    if (states.empty()) throw std::invalid_argument("need at least one state");
    Eigen::VectorXd out = cfg_.fisher_damping * x;
    const int C = num_codes_;
    const int rho_slot = C + 3;
    for (const auto& obs : states) {
      const Eigen::VectorXd p = probabilities(obs, device);
      // Scores live in span{e_c − π} ⊕ ρ_avg slot, so accumulate there only.
      double rho_bar = 0.0, x_pi = 0.0;
      for (int c = 0; c < C; ++c) {
        rho_bar += p(c) * rho_avg_[static_cast<std::size_t>(c)];
        x_pi += p(c) * x(c);
      }
      // dot_c = score_cᵀ x; then out += π_c · dot_c · score_c.
      double dot_pi = 0.0, rho_acc = 0.0;
      Eigen::VectorXd onehot_acc = Eigen::VectorXd::Zero(C);
      for (int c = 0; c < C; ++c) {
        const double rho_dev = rho_avg_[static_cast<std::size_t>(c)] - rho_bar;
        const double dot = (x(c) - x_pi) + rho_dev * x(rho_slot);
        const double w = p(c) * dot;
        onehot_acc(c) += w;
        dot_pi += w;
        rho_acc += w * rho_dev;
      }
      const double scale = 1.0 / static_cast<double>(states.size());
      out.segment(0, C) += scale * (onehot_acc - dot_pi * p);
      out(rho_slot) += scale * rho_acc;
    }
    return out;
  }

  /** Per-device energy-adaptive step size; energy is already normalized. */
  double learning_rate(double normalized_energy) const {
    return cfg_.alpha_base * (1.0 + cfg_.energy_lr_coeff * (1.0 - normalized_energy));
  }

  /**
   * One natural-gradient step from a batch of complete trajectories.
   * Advantages are discounted reward-to-go minus a per-step-index EMA
   * baseline that persists across updates (the first episode ever seen
   * initializes it), then standardized across the whole batch.  The
   * standardization removes the common mode that would otherwise reinforce
   * every sampled action of an above-average episode in lockstep — with a
   * shared network-wide reward that common mode herds all devices toward the
   * same codes — and it pins the update magnitude to the step size instead
   * of the reward scale.  Per-device step sizes use the latest observed
   * energy.
   */
  NpgUpdateStats update(std::span<const NpgTrajectory> trajectories) {
    if (trajectories.empty()) throw std::invalid_argument("need at least one trajectory");
    for (const auto& tr : trajectories) {
      if (tr.observations.size() != tr.actions.size() ||
          tr.actions.size() != tr.rewards.size() || tr.rewards.empty())
        throw std::invalid_argument("malformed trajectory");
    }
    const int N = num_devices();
    const int D = feature_dim();

    // Advantages against the running per-step baseline.
    std::vector<std::vector<double>> advantages;
    double adv_sum = 0.0;
    std::size_t adv_count = 0;
    for (const auto& tr : trajectories) {
      const std::size_t T = tr.rewards.size();
      std::vector<double> g(T);
      double acc = 0.0;
      for (std::size_t t = T; t-- > 0;) {
        acc = tr.rewards[t] + cfg_.discount * acc;
        g[t] = acc;
      }
      if (baseline_.size() < T) {
        // New step indices start the EMA at their first observed return.
        for (std::size_t t = baseline_.size(); t < T; ++t) baseline_.push_back(g[t]);
      }
      std::vector<double> adv(T);
      for (std::size_t t = 0; t < T; ++t) {
        adv[t] = g[t] - baseline_[t];
        baseline_[t] = cfg_.baseline_decay * baseline_[t] + (1.0 - cfg_.baseline_decay) * g[t];
        adv_sum += adv[t];
        ++adv_count;
      }
      advantages.push_back(std::move(adv));
    }

    // Standardize advantages over the batch; exact zeros (first-ever episode)
    // stay exactly zero because the spread guard leaves them uncentered.
    const double adv_mean = adv_sum / static_cast<double>(adv_count);
    double sq = 0.0;
    for (const auto& adv : advantages)
      for (double a : adv) sq += (a - adv_mean) * (a - adv_mean);
    const double adv_sd = std::sqrt(sq / static_cast<double>(adv_count));
    if (adv_sd > 1e-12) {
      for (auto& adv : advantages)
        for (double& a : adv) a = (a - adv_mean) / adv_sd;
    }

    // Class-weighted score-function gradient, averaged over trajectories.
    // Scores are accumulated in their sparse form (one-hot block plus the
    // ρ_avg slot); the remaining feature slots cancel exactly, see score().
    std::vector<Eigen::VectorXd> grad(static_cast<std::size_t>(N), Eigen::VectorXd::Zero(D));
    std::vector<NetworkObservation> visited;
    const int C = num_codes_;
    for (std::size_t e = 0; e < trajectories.size(); ++e) {
      const auto& tr = trajectories[e];
      for (std::size_t t = 0; t < tr.rewards.size(); ++t) {
        visited.push_back(tr.observations[t]);
        for (int i = 0; i < N; ++i) {
          const auto ui = static_cast<std::size_t>(i);
          const int a = tr.actions[t].codes[ui];
          if (a < 1 || a > C) throw std::invalid_argument("trajectory action out of range");
          const Eigen::VectorXd p = probabilities(tr.observations[t], i);
          double rho_bar = 0.0;
          for (int c = 0; c < C; ++c) rho_bar += p(c) * rho_avg_[static_cast<std::size_t>(c)];
          const double w = weights_[ui] * advantages[e][t];
          grad[ui].segment(0, C) -= w * p;
          grad[ui](a - 1) += w;
          grad[ui](C + 3) += w * (rho_avg_[static_cast<std::size_t>(a - 1)] - rho_bar);
        }
      }
    }
    const double inv_ep = 1.0 / static_cast<double>(trajectories.size());
    for (auto& g : grad) g *= inv_ep;

    NpgUpdateStats stats;
    stats.mean_advantage = adv_sum / static_cast<double>(adv_count);
    const auto& last_obs = trajectories.back().observations.back();
    stats.min_lr = stats.max_lr = learning_rate(last_obs.energies[0]);

    for (int i = 0; i < N; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      stats.gradient_norm += grad[ui].squaredNorm();
      Eigen::VectorXd direction;
      if (grad[ui].norm() == 0.0) {
        direction = grad[ui];
      } else {
        auto apply = [&](const Eigen::VectorXd& v) {
          return fisher_vector_product(visited, i, v);
        };
        CgResult cg = conjugate_gradient(apply, grad[ui], cfg_.cg_iterations, cfg_.cg_tolerance);
        if (cg.relative_residual > cfg_.cg_tolerance) {
          direction = grad[ui];  // damped-Fisher solve did not converge
          ++stats.cg_fallbacks;
        } else {
          direction = std::move(cg.x);
        }
      }
      const double lr = learning_rate(last_obs.energies[ui]);
      stats.min_lr = std::min(stats.min_lr, lr);
      stats.max_lr = std::max(stats.max_lr, lr);
      stats.natural_norm += direction.squaredNorm();
      theta_[ui] += lr * direction;
      if (!theta_[ui].allFinite()) throw std::runtime_error("policy parameters became non-finite");
    }
    stats.gradient_norm = std::sqrt(stats.gradient_norm);
    stats.natural_norm = std::sqrt(stats.natural_norm);
    return stats;
  }

 private:
  void check_device_code(int device, int code) const {
    if (device < 0 || device >= num_devices()) throw std::out_of_range("device id out of range");
    if (code < 1 || code > num_codes_) throw std::out_of_range("code id out of range");
  }

  NpgConfig cfg_;
  int num_codes_;
  std::vector<double> rho_avg_;
  std::vector<DeviceClass> classes_;
  std::vector<double> weights_;
  std::vector<Eigen::VectorXd> class_embed_;
  std::vector<Eigen::VectorXd> theta_;
  std::vector<double> baseline_;  // per-step-index EMA of discounted returns
};

}  // namespace nomarl
