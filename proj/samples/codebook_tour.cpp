/**
 * Tour of the spreading-code layer: generate a Gold family, inspect its
 * three-valued cross-correlations, select a working codebook, and fit the
 * low-dimensional embedding used by the continuous-action agent.
 *
 * Build target: sample_codebook_tour
 */

#include <cstdio>
#include <set>

#include "nomarl/embedding.hpp"
#include "nomarl/gold.hpp"
#include "nomarl/rng.hpp"

int main() {
  using namespace nomarl;

  // A degree-7 family: 129 codes of length 127, preferred-pair construction.
  const GoldFamily family = default_gold_family(7);
  std::printf("degree %d family: %zu codes of length %d, t = %ld\n", family.degree,
              family.codes.size(), family.length, family.t_value);

  // Every pairwise periodic cross-correlation takes one of three values.
  std::set<long> seen;
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = i + 1; j < 8; ++j)
      for (int s = 0; s < family.length; ++s)
        seen.insert(cross_correlation_sum(family.codes[i], family.codes[j], s));
  std::printf("correlation sums observed across the first 8 codes:");
  for (long v : seen) std::printf(" %ld", v);
  std::printf("  (expected {-%ld, -1, %ld})\n", family.t_value, family.t_value - 2);

  // A 16-code working set.  rho(i, j) is the worst-case squared normalized
  // correlation within a +-2 chip misalignment window — the coupling factor
  // the interference model uses.
  const Codebook cb = select_codebook(family, 16, CodebookStrategy::FirstC, 2);
  double worst = 0.0, sum = 0.0;
  int pairs = 0;
  for (int i = 0; i < cb.num_codes; ++i)
    for (int j = i + 1; j < cb.num_codes; ++j) {
      worst = std::max(worst, cb.rho(i, j));
      sum += cb.rho(i, j);
      ++pairs;
    }
  std::printf("16-code set: mean pairwise rho %.4f, worst %.4f\n", sum / pairs, worst);

  // Embed codes into R^8 so Euclidean distance tracks kappa * rho.  The
  // continuous-action agent emits vectors in this space and quantizes them
  // back to concrete codes.
  RngStream rng(7, "embedding");
  const EmbeddingCodebook emb =
      init_embedding_codebook(cb, 8, default_embedding_scale(cb), rng, 2000, 0.01);
  std::printf("embedding: dim %ld, kappa %.3f, final stress %.6f\n", emb.vectors.rows(),
              emb.kappa, emb.final_stress);

  // Round-trip: the embedding vector of code c quantizes back to c.
  int round_trip_ok = 0;
  for (int c = 0; c < cb.num_codes; ++c)
    if (hard_quantize(emb.vectors.col(c), emb) == c + 1) ++round_trip_ok;
  std::printf("round-trip quantization: %d/%d codes recover themselves\n", round_trip_ok,
              cb.num_codes);
  return 0;
}
