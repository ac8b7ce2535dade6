#pragma once

/**
 * Non-learning assignment policies: fixed round-robin, per-step uniform
 * random, and a greedy heuristic that serves the strongest links first while
 * dodging already-claimed high-correlation codes.
 */

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "nomarl/env.hpp"
#include "nomarl/gold.hpp"
#include "nomarl/rng.hpp"

namespace nomarl {

/** Device i keeps code (i mod C) + 1 for the whole run. */
inline Assignment static_assign(int num_devices, int num_codes) {
  if (num_devices < 1 || num_codes < 1)
    throw std::invalid_argument("need at least one device and one code");
  Assignment a;
  a.codes.resize(static_cast<std::size_t>(num_devices));
  for (int i = 0; i < num_devices; ++i) a.codes[static_cast<std::size_t>(i)] = i % num_codes + 1;
  return a;
}

/** Fresh i.i.d. uniform draw over [1, C] for every device, every step. */
inline Assignment random_assign(int num_devices, int num_codes, RngStream& rng) {
  if (num_devices < 1 || num_codes < 1)
    throw std::invalid_argument("need at least one device and one code");
  Assignment a;
  a.codes.resize(static_cast<std::size_t>(num_devices));
  for (auto& c : a.codes) c = rng.uniform_int(1, num_codes);
  return a;
}

/**
 * Interference-aware greedy pass: active devices in order of descending
 * received strength P·|h|² (ties to the lower id) each take the code with the
 * least incremental interference against the codes already claimed, ties to
 * the lowest code id.  Inactive devices cycle through the leftover codes in
 * ascending order (or all codes, when the active set claimed every one).
 */
inline Assignment greedy_sinr_assign(std::span<const std::uint8_t> active,
                                     std::span<const double> powers_mw,
                                     std::span<const double> gains, const Codebook& cb) {
  const std::size_t n = active.size();
  if (powers_mw.size() != n || gains.size() != n)
    throw std::invalid_argument("active/powers/gains must agree in size");
  const int C = cb.num_codes;
  if (C < 1) throw std::invalid_argument("empty codebook");

  Assignment out;
  out.codes.assign(n, 0);

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < n; ++i)
    if (active[i]) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return powers_mw[a] * gains[a] > powers_mw[b] * gains[b];
  });

  std::vector<std::size_t> claimed;  // devices already assigned, in pick order
  std::vector<char> used(static_cast<std::size_t>(C) + 1, 0);
  for (std::size_t i : order) {
    int best_c = 1;
    double best_inc = 0.0;
    for (int c = 1; c <= C; ++c) {
      double inc = 0.0;
      for (std::size_t j : claimed) inc += cb.rho(c - 1, out.codes[j] - 1) * powers_mw[j] * gains[j];
      if (c == 1 || inc < best_inc) {  // strict: ties keep the lowest code
        best_c = c;
        best_inc = inc;
      }
    }
    out.codes[i] = best_c;
    used[static_cast<std::size_t>(best_c)] = 1;
    claimed.push_back(i);
  }

  std::vector<int> leftovers;
  for (int c = 1; c <= C; ++c)
    if (!used[static_cast<std::size_t>(c)]) leftovers.push_back(c);
  if (leftovers.empty())
    for (int c = 1; c <= C; ++c) leftovers.push_back(c);
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (active[i]) continue;
    out.codes[i] = leftovers[next % leftovers.size()];
    ++next;
  }
  return out;
}

}  // namespace nomarl
