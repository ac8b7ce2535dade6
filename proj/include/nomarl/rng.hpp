#pragma once
/**
 * Deterministic random number streams.
 *
 * Every stochastic subsystem (topology, shadowing, fading, traffic, policy,
 * exploration, replay, embedding) draws from its own named stream derived
 * from a single master seed.  Streams never share state, so adding draws in
 * one subsystem cannot shift the sequence seen by another — a requirement
 * for bit-reproducible runs and for paired within-seed agent comparisons.
 *
 * All distributions are hand-rolled on top of std::mt19937_64 raw output
 * because libstdc++'s std::normal_distribution et al. are not guaranteed to
 * produce identical sequences across library versions.
 */

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>

namespace nomarl {

/// SplitMix64 finalizer; used to decorrelate derived seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a over a stream name, so seeds depend on the name text only.
inline std::uint64_t hash_name(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view stream_name) {
  return splitmix64(master ^ hash_name(stream_name));
}

/// One independent random stream with the distributions the simulator needs.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  RngStream(std::uint64_t master, std::string_view stream_name)
      : gen_(derive_seed(master, stream_name)) {}

  std::uint64_t raw() { return gen_(); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi) {
    if (hi < lo) throw std::invalid_argument("uniform_int: hi < lo");
    const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    return static_cast<int>(lo + static_cast<std::int64_t>(gen_() % span));
  }

  /// Standard normal via Box-Muller (one value per call; two uniforms drawn).
  double gaussian() {
    double u1 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;  // log(0) guard
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Poisson by Knuth's product-of-uniforms method; fine for small means.
  int poisson(double mean) {
    if (mean < 0.0) throw std::invalid_argument("poisson: negative mean");
    if (mean == 0.0) return 0;
    const double limit = std::exp(-mean);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace nomarl
