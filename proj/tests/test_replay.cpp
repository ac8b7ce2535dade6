#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "nomarl/replay.hpp"

using namespace nomarl;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ReplayEntry marked(double reward) {
  ReplayEntry e;
  e.obs = {reward};
  e.reward = reward;
  e.next_obs = {reward + 1.0};
  return e;
}

}  // namespace

TEST_CASE("capacity is enforced with oldest-first eviction", "[replay]") {
  PrioritizedReplay buf(4);
  for (int i = 0; i < 6; ++i) buf.push(marked(i));
  REQUIRE(buf.size() == 4);
  REQUIRE(buf.capacity() == 4);

  // Slots now hold 4, 5 (overwrote 0, 1) and the surviving 2, 3.
  std::map<double, int> rewards;
  for (std::size_t i = 0; i < buf.size(); ++i) rewards[buf.entry(i).reward]++;
  REQUIRE(rewards == std::map<double, int>{{2.0, 1}, {3.0, 1}, {4.0, 1}, {5.0, 1}});
}

TEST_CASE("fresh entries carry the running maximum priority", "[replay]") {
  PrioritizedReplay buf(8, 1.0, 1e-3);
  buf.push(marked(0));
  REQUIRE_THAT(buf.priority(0), WithinAbs(1.0, 1e-15));  // default before any update

  buf.update_priority(0, 9.0);  // (9 + 1e-3)^1 = 9.001
  REQUIRE_THAT(buf.priority(0), WithinRel(9.001, 1e-12));

  buf.push(marked(1));  // inherits the max
  REQUIRE_THAT(buf.priority(1), WithinRel(9.001, 1e-12));

  // Lowering one entry does not drag the running max down.
  buf.update_priority(0, 0.0);
  buf.push(marked(2));
  REQUIRE_THAT(buf.priority(2), WithinRel(9.001, 1e-12));
}

TEST_CASE("priority formula combines TD error with stored context weights", "[replay]") {
  PrioritizedReplay buf(4, 0.6, 1e-3);
  ReplayEntry e = marked(0);
  e.w_device = 1.5;
  e.w_energy = 1.2;
  buf.push(e);
  buf.update_priority(0, 2.0);
  REQUIRE_THAT(buf.priority(0), WithinRel(std::pow(2.001, 0.6) * 1.5 * 1.2, 1e-12));
}

TEST_CASE("a 10x-priority entry is drawn ten nineteenths of the time", "[replay]") {
  // Ten entries, nine at priority 1 and one at 10: P(special) = 10/19.
  PrioritizedReplay buf(16, 0.6, 1e-3);
  for (int i = 0; i < 10; ++i) buf.push(marked(i));
  for (std::size_t i = 0; i < 10; ++i) buf.update_priority(i, std::pow(1.0, 1.0 / 0.6) - 1e-3);
  // (δ+ε)^0.6 = 10 → δ = 10^(1/0.6) − ε.
  buf.update_priority(7, std::pow(10.0, 1.0 / 0.6) - 1e-3);
  REQUIRE_THAT(buf.priority(7) / buf.priority(0), WithinRel(10.0, 1e-9));

  RngStream rng(2024, "replay");
  long hits = 0, draws = 0;
  for (int round = 0; round < 1000; ++round) {
    const auto s = buf.sample(100, 0.4, rng);
    for (std::size_t idx : s.indices) {
      ++draws;
      if (idx == 7) ++hits;
    }
  }
  REQUIRE(draws == 100000);
  const double freq = static_cast<double>(hits) / static_cast<double>(draws);
  REQUIRE_THAT(freq, WithinAbs(10.0 / 19.0, 0.02));
}

TEST_CASE("uniform priorities give uniform sampling and unit weights", "[replay]") {
  PrioritizedReplay buf(8, 0.6, 1e-3);
  for (int i = 0; i < 8; ++i) buf.push(marked(i));
  RngStream rng(7, "replay");
  const auto s = buf.sample(64, 1.0, rng);
  for (double w : s.weights) REQUIRE_THAT(w, WithinAbs(1.0, 1e-12));

  std::vector<long> counts(8, 0);
  RngStream rng2(8, "replay");
  for (int round = 0; round < 100; ++round)
    for (std::size_t idx : buf.sample(100, 0.0, rng2).indices) counts[idx]++;
  for (long c : counts) REQUIRE_THAT(static_cast<double>(c) / 10000.0, WithinAbs(0.125, 0.02));
}

TEST_CASE("importance weights follow the power formula before normalization", "[replay]") {
  // Two entries with priorities 1 and 3 at β = 0.5:
  // P = {1/4, 3/4}; raw w = (2P)^(−1/2) = {√2, √(2/3)}; normalized by max.
  PrioritizedReplay buf(2, 1.0, 1e-3);
  buf.push(marked(0));
  buf.push(marked(1));
  buf.update_priority(0, 1.0 - 1e-3);
  buf.update_priority(1, 3.0 - 1e-3);

  RngStream rng(5, "replay");
  bool seen_pair = false;
  for (int t = 0; t < 200 && !seen_pair; ++t) {
    const auto s = buf.sample(2, 0.5, rng);
    if (s.indices[0] != s.indices[1]) {
      seen_pair = true;
      const double w0 = std::pow(2.0 * 0.25, -0.5), w1 = std::pow(2.0 * 0.75, -0.5);
      const double expect_small = (w1 / w0);
      for (std::size_t b = 0; b < 2; ++b) {
        if (s.indices[b] == 0)
          REQUIRE_THAT(s.weights[b], WithinAbs(1.0, 1e-12));
        else
          REQUIRE_THAT(s.weights[b], WithinRel(expect_small, 1e-12));
      }
    }
  }
  REQUIRE(seen_pair);
}

TEST_CASE("a single stored transition is always the sample", "[replay]") {
  PrioritizedReplay buf(4);
  buf.push(marked(42));
  RngStream rng(1, "replay");
  const auto s = buf.sample(5, 0.7, rng);
  for (std::size_t idx : s.indices) REQUIRE(idx == 0);
  for (double w : s.weights) REQUIRE_THAT(w, WithinAbs(1.0, 1e-12));
}

TEST_CASE("sampling is reproducible from the stream seed", "[replay]") {
  PrioritizedReplay buf(8, 0.6, 1e-3);
  for (int i = 0; i < 8; ++i) buf.push(marked(i));
  buf.update_priority(3, 5.0);
  RngStream r1(99, "replay"), r2(99, "replay");
  const auto a = buf.sample(32, 0.6, r1);
  const auto b = buf.sample(32, 0.6, r2);
  REQUIRE(a.indices == b.indices);
  REQUIRE(a.weights == b.weights);
}

TEST_CASE("replay buffer argument validation", "[replay]") {
  REQUIRE_THROWS_AS(PrioritizedReplay(0), std::invalid_argument);
  REQUIRE_THROWS_AS(PrioritizedReplay(4, 1.5), std::invalid_argument);
  REQUIRE_THROWS_AS(PrioritizedReplay(4, 0.6, 0.0), std::invalid_argument);

  PrioritizedReplay buf(4);
  RngStream rng(1, "replay");
  REQUIRE_THROWS_AS(buf.sample(4, 0.5, rng), std::logic_error);
  buf.push(marked(0));
  REQUIRE_THROWS_AS(buf.sample(0, 0.5, rng), std::invalid_argument);
  REQUIRE_THROWS_AS(buf.sample(4, -0.1, rng), std::invalid_argument);
  REQUIRE_THROWS_AS(buf.update_priority(1, 1.0), std::out_of_range);
  REQUIRE_THROWS_AS(buf.entry(1), std::out_of_range);
  REQUIRE_THROWS_AS(buf.priority(1), std::out_of_range);
}
