#pragma once
/**
 * Gold spreading-code generation and correlation analysis.
 *
 * m-sequences come from Fibonacci LFSRs.  Tap masks use bit i for the
 * coefficient of x^i (constant term = bit 0); the x^degree term is implied.
 * The register emits its low bit, shifts right, and feeds the parity of the
 * masked state into the high bit.  A Gold family of size 2^n + 1 is formed
 * from a preferred pair (u, v) as {u, v, u xor T^k v} in the binary domain,
 * then mapped to bipolar chips with bit 1 -> +1.
 *
 * For a preferred pair the periodic cross-correlation sums take only the
 * values {-1, -t(n), t(n) - 2} where t(n) = 2^((n+1)/2) + 1 for odd n and
 * 2^((n+2)/2) + 1 for n = 2 (mod 4); n divisible by 4 admits no preferred
 * pairs.  Construction validates this property exhaustively and rejects
 * non-preferred inputs.
 */

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nomarl {

struct MSequence {
  int degree = 0;
  std::uint32_t taps = 0;
  std::vector<std::int8_t> chips;  // bipolar, length 2^degree - 1
};

namespace detail {
inline int parity32(std::uint32_t x) {
#if defined(__GNUC__)
  return __builtin_parity(x);
#else
  x ^= x >> 16; x ^= x >> 8; x ^= x >> 4; x ^= x >> 2; x ^= x >> 1;
  return static_cast<int>(x & 1u);
#endif
}
}  // namespace detail

/// Advance one LFSR step; returns the emitted bit and updates state in place.
inline int lfsr_step(std::uint32_t& state, std::uint32_t taps, int degree) {
  const int out = static_cast<int>(state & 1u);
  const std::uint32_t fb = static_cast<std::uint32_t>(detail::parity32(state & taps));
  state = (state >> 1) | (fb << (degree - 1));
  return out;
}

/**
 * Generate a maximal-length sequence.  Primitivity of the tap polynomial is
 * enforced by checking the achieved period: a non-primitive polynomial
 * returns to the seed state early and is rejected with the observed period.
 */
inline MSequence generate_m_sequence(int degree, std::uint32_t taps, std::uint32_t seed_state = 1) {
  if (degree < 2 || degree > 20)
    throw std::invalid_argument("m-sequence degree must be in [2, 20], got " + std::to_string(degree));
  const std::uint32_t state_count = 1u << degree;
  if (taps == 0 || taps >= state_count)
    throw std::invalid_argument("tap mask must be a nonzero value below 2^degree");
  if ((taps & 1u) == 0)
    throw std::invalid_argument("tap polynomial needs a nonzero constant term (bit 0)");
  if (seed_state == 0 || seed_state >= state_count)
    throw std::invalid_argument("seed state must be a nonzero value below 2^degree");

  const std::uint32_t period_full = state_count - 1;
  MSequence seq;
  seq.degree = degree;
  seq.taps = taps;
  seq.chips.reserve(period_full);

  std::uint32_t state = seed_state;
  for (std::uint32_t i = 0; i < period_full; ++i) {
    const int bit = lfsr_step(state, taps, degree);
    seq.chips.push_back(static_cast<std::int8_t>(bit ? 1 : -1));
    if (state == seed_state && i + 1 < period_full)
      throw std::invalid_argument("tap mask 0x" + std::to_string(taps) +
                                  " is not primitive: period " + std::to_string(i + 1) +
                                  " < " + std::to_string(period_full));
  }
  if (state != seed_state)
    throw std::invalid_argument("LFSR did not return to seed state after full period");
  return seq;
}

/// Cross-correlation sum  sum_l a[l] * b[(l + shift) mod L]  (integer exact).
inline long cross_correlation_sum(std::span<const std::int8_t> a,
                                  std::span<const std::int8_t> b, int shift) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("cross_correlation_sum: sequences must have equal nonzero length");
  const int L = static_cast<int>(a.size());
  int s = ((shift % L) + L) % L;
  long acc = 0;
  for (int l = 0; l < L; ++l) {
    acc += static_cast<long>(a[l]) * static_cast<long>(b[(l + s) % L]);
  }
  return acc;
}

inline double normalized_cross_correlation(std::span<const std::int8_t> a,
                                           std::span<const std::int8_t> b, int shift) {
  return static_cast<double>(cross_correlation_sum(a, b, shift)) / static_cast<double>(a.size());
}

/**
 * Worst-case normalized correlation magnitude over chip misalignments in
 * [-max_misalignment, +max_misalignment].  This is the coupling coefficient
 * used for interference between imperfectly synchronized devices.
 */
inline double effective_correlation(std::span<const std::int8_t> a,
                                    std::span<const std::int8_t> b, int max_misalignment) {
  if (max_misalignment < 0)
    throw std::invalid_argument("max_misalignment must be >= 0");
  long worst = 0;
  for (int s = -max_misalignment; s <= max_misalignment; ++s) {
    worst = std::max(worst, std::labs(cross_correlation_sum(a, b, s)));
  }
  return static_cast<double>(worst) / static_cast<double>(a.size());
}

/// Three-valued cross-correlation bound t(n) for preferred pairs.
inline int preferred_t(int degree) {
  if (degree % 4 == 0)
    throw std::invalid_argument("no preferred pairs exist for degree divisible by 4");
  if (degree % 2 == 1) return (1 << ((degree + 1) / 2)) + 1;
  return (1 << ((degree + 2) / 2)) + 1;
}

struct GoldFamily {
  int degree = 0;
  int length = 0;   // 2^degree - 1
  int t_value = 0;  // t(n)
  std::uint32_t taps_u = 0, taps_v = 0;
  std::vector<std::vector<std::int8_t>> codes;  // size 2^degree + 1
};

/**
 * Build the full Gold family from a preferred pair.  Family order is
 * [u, v, u^v, u^Tv, ..., u^T^(L-1)v].  The pair is validated by checking
 * that every relative shift yields a correlation sum in {-1, -t, t-2}.
 */
inline GoldFamily generate_gold_family(const MSequence& u, const MSequence& v) {
  if (u.degree != v.degree)
    throw std::invalid_argument("preferred pair must share a degree");
  if (u.taps == v.taps)
    throw std::invalid_argument("preferred pair must use distinct polynomials");
  const int L = static_cast<int>(u.chips.size());
  const int t = preferred_t(u.degree);

  for (int s = 0; s < L; ++s) {
    const long c = cross_correlation_sum(u.chips, v.chips, s);
    if (c != -1 && c != -t && c != t - 2)
      throw std::invalid_argument(
          "not a preferred pair: cross-correlation sum " + std::to_string(c) +
          " at shift " + std::to_string(s) + " outside {-1, -" + std::to_string(t) +
          ", " + std::to_string(t - 2) + "}");
  }

  GoldFamily fam;
  fam.degree = u.degree;
  fam.length = L;
  fam.t_value = t;
  fam.taps_u = u.taps;
  fam.taps_v = v.taps;
  fam.codes.reserve(static_cast<std::size_t>(L) + 2);
  fam.codes.push_back(u.chips);
  fam.codes.push_back(v.chips);

  // XOR in the binary domain (bit = chip > 0), then re-map bit 1 -> +1.
  for (int k = 0; k < L; ++k) {
    std::vector<std::int8_t> w(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) {
      const bool bu = u.chips[static_cast<std::size_t>(l)] > 0;
      const bool bv = v.chips[static_cast<std::size_t>((l + k) % L)] > 0;
      w[static_cast<std::size_t>(l)] = static_cast<std::int8_t>((bu ^ bv) ? 1 : -1);
    }
    fam.codes.push_back(std::move(w));
  }
  return fam;
}

/// Known preferred-pair tap masks for the degrees the simulator supports.
inline GoldFamily default_gold_family(int degree) {
  switch (degree) {
    case 5:  // x^5+x^2+1, x^5+x^4+x^3+x^2+1
      return generate_gold_family(generate_m_sequence(5, 0b00101),
                                  generate_m_sequence(5, 0b11101));
    case 7:  // x^7+x^3+1, x^7+x^3+x^2+x+1
      return generate_gold_family(generate_m_sequence(7, 0b0001001),
                                  generate_m_sequence(7, 0b0001111));
    default:
      throw std::invalid_argument("no built-in preferred pair for degree " +
                                  std::to_string(degree) + " (supported: 5, 7)");
  }
}

enum class CodebookStrategy { FirstC, GreedyMinAvgRho };

/**
 * The working set of C codes handed to the environment, with the effective
 * correlation matrix precomputed.  Code ids are 1-based at the interface
 * (assignments use [1, C]); storage is 0-based.
 */
struct Codebook {
  int degree = 0;
  int length = 0;
  int t_value = 0;
  int num_codes = 0;
  int max_misalignment = 0;
  CodebookStrategy strategy = CodebookStrategy::FirstC;
  std::vector<int> family_indices;             // selected member per code slot
  std::vector<std::vector<std::int8_t>> codes;
  std::vector<double> rho_matrix;              // C*C row-major
  std::vector<double> rho_avg;                 // mean off-diagonal per code

  double rho(int i, int j) const {
    return rho_matrix[static_cast<std::size_t>(i) * static_cast<std::size_t>(num_codes) +
                      static_cast<std::size_t>(j)];
  }
};

inline Codebook select_codebook(const GoldFamily& family, int num_codes,
                                CodebookStrategy strategy, int max_misalignment) {
  const int F = static_cast<int>(family.codes.size());
  if (num_codes < 1 || num_codes > F)
    throw std::invalid_argument("num_codes must be in [1, " + std::to_string(F) + "], got " +
                                std::to_string(num_codes));

  std::vector<int> picked;
  picked.reserve(static_cast<std::size_t>(num_codes));

  if (strategy == CodebookStrategy::FirstC) {
    for (int i = 0; i < num_codes; ++i) picked.push_back(i);
  } else {
    // Family-wide effective correlations, then greedy min-average selection.
    std::vector<double> fam_rho(static_cast<std::size_t>(F) * F, 1.0);
    for (int i = 0; i < F; ++i) {
      for (int j = i + 1; j < F; ++j) {
        const double r = effective_correlation(family.codes[static_cast<std::size_t>(i)],
                                               family.codes[static_cast<std::size_t>(j)],
                                               max_misalignment);
        fam_rho[static_cast<std::size_t>(i) * F + j] = r;
        fam_rho[static_cast<std::size_t>(j) * F + i] = r;
      }
    }
    std::vector<char> used(static_cast<std::size_t>(F), 0);
    picked.push_back(0);  // all singletons tie; lowest index wins
    used[0] = 1;
    while (static_cast<int>(picked.size()) < num_codes) {
      int best = -1;
      double best_avg = 0.0;
      for (int j = 0; j < F; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        double s = 0.0;
        for (int p : picked) s += fam_rho[static_cast<std::size_t>(j) * F + p];
        const double avg = s / static_cast<double>(picked.size());
        if (best < 0 || avg < best_avg) {  // strict: ties keep lowest index
          best = j;
          best_avg = avg;
        }
      }
      picked.push_back(best);
      used[static_cast<std::size_t>(best)] = 1;
    }
  }

  Codebook cb;
  cb.degree = family.degree;
  cb.length = family.length;
  cb.t_value = family.t_value;
  cb.num_codes = num_codes;
  cb.max_misalignment = max_misalignment;
  cb.strategy = strategy;
  cb.family_indices = picked;
  cb.codes.reserve(static_cast<std::size_t>(num_codes));
  for (int p : picked) cb.codes.push_back(family.codes[static_cast<std::size_t>(p)]);

  cb.rho_matrix.assign(static_cast<std::size_t>(num_codes) * num_codes, 0.0);
  for (int i = 0; i < num_codes; ++i) {
    for (int j = i; j < num_codes; ++j) {
      const double r = effective_correlation(cb.codes[static_cast<std::size_t>(i)],
                                             cb.codes[static_cast<std::size_t>(j)],
                                             max_misalignment);
      cb.rho_matrix[static_cast<std::size_t>(i) * num_codes + j] = r;
      cb.rho_matrix[static_cast<std::size_t>(j) * num_codes + i] = r;
    }
  }
  cb.rho_avg.assign(static_cast<std::size_t>(num_codes), 0.0);
  if (num_codes > 1) {
    for (int i = 0; i < num_codes; ++i) {
      double s = 0.0;
      for (int j = 0; j < num_codes; ++j)
        if (j != i) s += cb.rho(i, j);
      cb.rho_avg[static_cast<std::size_t>(i)] = s / static_cast<double>(num_codes - 1);
    }
  }
  return cb;
}

}  // namespace nomarl
