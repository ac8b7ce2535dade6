#pragma once

/**
 * Continuous embedding of a spreading-code set: each code gets a point in
 * R^d placed so that pairwise Euclidean distances approximate the scaled
 * effective cross-correlations.  A continuous-control policy can then emit a
 * vector per device and have it snapped to the nearest code (hard assignment)
 * or relaxed through a distance softmax (for gradient flow).
 */

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "nomarl/gold.hpp"
#include "nomarl/rng.hpp"

namespace nomarl {

struct EmbeddingCodebook {
  Eigen::MatrixXd vectors;  // d × C, one column per code
  double kappa = 1.0;       // distance target scale: target_ij = kappa * rho_ij
  double temperature = 1.0; // softmax temperature for soft_quantize
  bool adaptive = false;    // whether training may move the vectors
  double final_stress = 0.0;

  int dimension() const { return static_cast<int>(vectors.rows()); }
  int num_codes() const { return static_cast<int>(vectors.cols()); }
};

/** Scale that maps the largest off-diagonal correlation to distance 1. */
inline double default_embedding_scale(const Codebook& cb) {
  double max_off = 0.0;
  for (int i = 0; i < cb.num_codes; ++i)
    for (int j = 0; j < cb.num_codes; ++j)
      if (i != j) max_off = std::max(max_off, cb.rho(i, j));
  if (max_off <= 0.0) return 1.0;
  return 1.0 / max_off;
}

/** Raw stress Σ_{i<j} (‖c_i − c_j‖ − kappa·rho_ij)². */
inline double embedding_stress(const Eigen::MatrixXd& vectors, const Codebook& cb, double kappa) {
  double s = 0.0;
  for (int i = 0; i < cb.num_codes; ++i)
    for (int j = i + 1; j < cb.num_codes; ++j) {
      const double d = (vectors.col(i) - vectors.col(j)).norm();
      const double gap = d - kappa * cb.rho(i, j);
      s += gap * gap;
    }
  return s;
}

namespace detail {

inline Eigen::MatrixXd stress_gradient(const Eigen::MatrixXd& x, const Codebook& cb,
                                       double kappa) {
  const int C = cb.num_codes;
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(x.rows(), C);
  for (int i = 0; i < C; ++i)
    for (int j = i + 1; j < C; ++j) {
      Eigen::VectorXd diff = x.col(i) - x.col(j);
      const double dist = diff.norm();
      const double target = kappa * cb.rho(i, j);
      // d/dx of (dist − target)²; at dist → 0 the norm is not differentiable,
      // so nudge along a fixed axis instead of dividing by zero.
      Eigen::VectorXd dir;
      if (dist > 1e-12) {
        dir = diff / dist;
      } else {
        dir = Eigen::VectorXd::Zero(x.rows());
        dir(0) = 1.0;
      }
      const Eigen::VectorXd g = 2.0 * (dist - target) * dir;
      grad.col(i) += g;
      grad.col(j) -= g;
    }
  return grad;
}

}  // namespace detail

/**
 * Fit the embedding by stress minimization from a random start.  Two phases:
 * Adam first (robust to the arbitrary init), then plain gradient descent with
 * a backtracking step size, which is monotone and squeezes the stress down to
 * the local-minimum floor instead of hovering at Adam's fixed-step noise
 * level.  The fit is centered at the origin afterwards (stress is translation
 * invariant, and a centered codebook keeps the bounded actor head honest).
 */
inline EmbeddingCodebook init_embedding_codebook(const Codebook& cb, int d, double kappa,
                                                 RngStream& rng, int max_iters = 4000,
                                                 double learning_rate = 0.01) {
  if (d < 2 || d > 64) throw std::invalid_argument("embedding dimension must be in [2, 64]");
  if (kappa <= 0.0) throw std::invalid_argument("embedding scale must be > 0");
  if (cb.num_codes < 1) throw std::invalid_argument("codebook is empty");
  const int C = cb.num_codes;

  Eigen::MatrixXd x(d, C);
  for (int c = 0; c < C; ++c)
    for (int r = 0; r < d; ++r) x(r, c) = rng.gaussian(0.0, 0.5 * kappa);

  // Phase 1: Adam over the coordinate matrix.
  const int adam_iters = max_iters / 2;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, C), v = Eigen::MatrixXd::Zero(d, C);
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  for (int t = 1; t <= adam_iters; ++t) {
    const Eigen::MatrixXd grad = detail::stress_gradient(x, cb, kappa);
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(beta1, t), bc2 = 1.0 - std::pow(beta2, t);
    x.array() -= learning_rate * (m / bc1).array() / ((v / bc2).array().sqrt() + eps);
  }

  // Phase 2: monotone descent with backtracking line search.
  double stress = embedding_stress(x, cb, kappa);
  double step = 1.0 / static_cast<double>(C);
  for (int t = adam_iters; t < max_iters; ++t) {
    const Eigen::MatrixXd grad = detail::stress_gradient(x, cb, kappa);
    bool accepted = false;
    for (int tries = 0; tries < 30; ++tries) {
      const Eigen::MatrixXd cand = x - step * grad;
      const double cand_stress = embedding_stress(cand, cb, kappa);
      if (cand_stress <= stress) {
        x = cand;
        stress = cand_stress;
        step *= 1.25;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || stress < 1e-28) break;  // at the local-minimum floor
  }

  EmbeddingCodebook out;
  out.kappa = kappa;
  const Eigen::VectorXd centroid = x.rowwise().mean();
  out.vectors = x.colwise() - centroid;
  out.final_stress = embedding_stress(out.vectors, cb, kappa);
  return out;
}

/** Nearest code to v, 1-based; exact ties go to the lowest code id. */
inline int hard_quantize(const Eigen::VectorXd& v, const EmbeddingCodebook& emb) {
  if (v.size() != emb.vectors.rows()) throw std::invalid_argument("vector dimension mismatch");
  if (emb.num_codes() == 0) throw std::invalid_argument("empty embedding codebook");
  int best = 0;
  double best_d2 = (v - emb.vectors.col(0)).squaredNorm();
  for (int c = 1; c < emb.num_codes(); ++c) {
    const double d2 = (v - emb.vectors.col(c)).squaredNorm();
    if (d2 < best_d2) {  // strict: ties keep the lower index
      best = c;
      best_d2 = d2;
    }
  }
  return best + 1;
}

/** softmax_j(−‖v − c_j‖²/τ), max-shifted for numerical stability. */
inline Eigen::VectorXd soft_quantize(const Eigen::VectorXd& v, const EmbeddingCodebook& emb,
                                     double tau) {
  if (tau <= 0.0) throw std::invalid_argument("temperature must be > 0");
  if (v.size() != emb.vectors.rows()) throw std::invalid_argument("vector dimension mismatch");
  const int C = emb.num_codes();
  Eigen::VectorXd logits(C);
  for (int c = 0; c < C; ++c) logits(c) = -(v - emb.vectors.col(c)).squaredNorm() / tau;
  const double shift = logits.maxCoeff();
  Eigen::VectorXd p = (logits.array() - shift).exp();
  return p / p.sum();
}

}  // namespace nomarl
