#pragma once

/**
 * Prioritized experience replay backed by a sum tree.  Entries are sampled
 * with probability proportional to priority; priorities combine the TD error
 * with per-transition device-context weights captured at insert time.
 * Sampling is non-stratified (independent uniform draws over the total mass)
 * and eviction is oldest-first at fixed capacity.
 */

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "nomarl/rng.hpp"

namespace nomarl {

struct ReplayEntry {
  std::vector<double> obs;
  std::vector<double> action;   // flattened continuous action (N×d)
  std::vector<int> assignment;  // discrete codes, 1-based
  double reward = 0.0;
  std::vector<double> next_obs;
  bool done = false;
  // Context weights frozen at insert: crowding of critical devices and
  // depletion of batteries make a transition more valuable to replay.
  double w_device = 1.0;
  double w_energy = 1.0;
};

class PrioritizedReplay {
 public:
  PrioritizedReplay(std::size_t capacity, double alpha = 0.6, double epsilon = 1e-3)
      : capacity_(capacity), alpha_(alpha), epsilon_(epsilon) {
    if (capacity < 1) throw std::invalid_argument("replay capacity must be >= 1");
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha must be in [0, 1]");
    if (epsilon <= 0.0) throw std::invalid_argument("epsilon must be > 0");
    leaf_base_ = 1;
    while (leaf_base_ < capacity) leaf_base_ <<= 1;
    tree_.assign(2 * leaf_base_, 0.0);
    entries_.reserve(capacity);
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }
  double alpha() const { return alpha_; }
  double epsilon() const { return epsilon_; }

  /** Insert with the maximum priority seen so far (1 while empty-ish). */
  void push(ReplayEntry entry) {
    std::size_t slot;
    if (entries_.size() < capacity_) {
      slot = entries_.size();
      entries_.push_back(std::move(entry));
    } else {
      slot = write_pos_;  // overwrite the oldest entry
      entries_[slot] = std::move(entry);
    }
    write_pos_ = (slot + 1) % capacity_;
    set_leaf(slot, max_priority_);
  }

  /** Re-prioritize from a TD error: (|δ|+ε)^α · w_device · w_energy. */
  void update_priority(std::size_t index, double td_error) {
    if (index >= entries_.size()) throw std::out_of_range("replay index out of range");
    const double p = std::pow(std::abs(td_error) + epsilon_, alpha_) *
                     entries_[index].w_device * entries_[index].w_energy;
    if (!(p > 0.0) || !std::isfinite(p))
      throw std::invalid_argument("priority must be positive and finite");
    if (p > max_priority_) max_priority_ = p;
    set_leaf(index, p);
  }

  const ReplayEntry& entry(std::size_t index) const {
    if (index >= entries_.size()) throw std::out_of_range("replay index out of range");
    return entries_[index];
  }

  double priority(std::size_t index) const {
    if (index >= entries_.size()) throw std::out_of_range("replay index out of range");
    return tree_[leaf_base_ + index];
  }

  double total_priority() const { return tree_[1]; }

  struct Sample {
    std::vector<std::size_t> indices;
    std::vector<double> weights;  // importance weights, normalized by batch max
  };

  /**
   * Draw `batch` entries with replacement, P(i) ∝ priority_i, and return
   * importance weights (size·P(i))^(−β) normalized by the largest weight in
   * the batch.  β interpolates from none (0) to full (1) bias correction.
   */
  Sample sample(std::size_t batch, double beta, RngStream& rng) {
    if (entries_.empty()) throw std::logic_error("cannot sample from an empty replay buffer");
    if (batch < 1) throw std::invalid_argument("batch must be >= 1");
    if (beta < 0.0) throw std::invalid_argument("beta must be >= 0");
    const double total = tree_[1];

    Sample out;
    out.indices.resize(batch);
    out.weights.resize(batch);
    const double n = static_cast<double>(entries_.size());
    double max_w = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t idx = descend(rng.uniform() * total);
      out.indices[b] = idx;
      const double prob = tree_[leaf_base_ + idx] / total;
      const double w = std::pow(n * prob, -beta);
      out.weights[b] = w;
      if (w > max_w) max_w = w;
    }
    for (double& w : out.weights) w /= max_w;
    return out;
  }

 private:
  void set_leaf(std::size_t slot, double priority) {
    std::size_t node = leaf_base_ + slot;
    tree_[node] = priority;
    for (node >>= 1; node >= 1; node >>= 1)
      tree_[node] = tree_[2 * node] + tree_[2 * node + 1];
  }

  /** Walk the tree to the leaf covering cumulative mass `u`. */
  std::size_t descend(double u) const {
    std::size_t node = 1;
    while (node < leaf_base_) {
      const double left = tree_[2 * node];
      if (u < left) {
        node = 2 * node;
      } else {
        u -= left;
        node = 2 * node + 1;
      }
    }
    std::size_t idx = node - leaf_base_;
    // Rounding at the boundary can land one past the populated range.
    if (idx >= entries_.size()) idx = entries_.size() - 1;
    return idx;
  }

  std::size_t capacity_;
  double alpha_;
  double epsilon_;
  std::size_t leaf_base_ = 1;
  std::size_t write_pos_ = 0;
  double max_priority_ = 1.0;
  std::vector<double> tree_;
  std::vector<ReplayEntry> entries_;
};

}  // namespace nomarl
