#pragma once
/**
 * Link-level channel model: urban path loss, spatially correlated lognormal
 * shadowing, small-scale fading, code-coupled multi-user interference, and
 * SINR with despreading gain.
 *
 * Unit conventions: all linear powers are in mW; gains are dimensionless
 * linear power ratios; dB/dBm only at the boundaries.  SINR is invariant to
 * the mW choice since every term in the ratio uses it.
 */

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "nomarl/gold.hpp"
#include "nomarl/rng.hpp"

namespace nomarl {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }
inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

struct Vec2 {
  double x = 0.0, y = 0.0;
};

inline double distance(const Vec2& a, const Vec2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

struct ChannelParams {
  double carrier_freq_ghz = 3.5;
  double bandwidth_hz = 20e6;
  double noise_psd_dbm_hz = -174.0;
  double noise_figure_db = 7.0;
  double external_interference_dbm = -100.0;
  double cell_radius_m = 500.0;
  double rician_k_db = 10.0;
  double shadow_sigma_los_db = 4.0;
  double shadow_sigma_nlos_db = 7.8;
  double shadow_corr_dist_m = 10.0;
  double processing_gain = 127.0;  // linear, = spreading length L

  void validate() const {
    if (bandwidth_hz <= 0.0) throw std::invalid_argument("bandwidth must be > 0");
    if (processing_gain < 1.0) throw std::invalid_argument("processing_gain must be >= 1");
    if (shadow_sigma_los_db < 0.0 || shadow_sigma_nlos_db < 0.0)
      throw std::invalid_argument("shadowing sigmas must be >= 0");
    if (shadow_corr_dist_m <= 0.0) throw std::invalid_argument("shadow_corr_dist must be > 0");
    if (carrier_freq_ghz <= 0.0) throw std::invalid_argument("carrier frequency must be > 0");
    if (cell_radius_m <= 0.0) throw std::invalid_argument("cell radius must be > 0");
  }

  double noise_floor_dbm() const {
    return noise_psd_dbm_hz + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
  }
  double noise_floor_mw() const { return dbm_to_mw(noise_floor_dbm()); }
  double external_interference_mw() const { return dbm_to_mw(external_interference_dbm); }
};

/// Urban path loss; distances below 1 m are clamped to 1 m.
inline double path_loss_db(double distance_m, double freq_ghz, bool los) {
  const double d = std::max(distance_m, 1.0);
  if (los) return 32.4 + 20.0 * std::log10(freq_ghz) + 20.0 * std::log10(d);
  return 35.3 + 22.0 * std::log10(freq_ghz) + 21.3 * std::log10(d);
}

/// Urban-micro line-of-sight probability as a function of 2D distance.
inline double los_probability(double distance_m) {
  if (distance_m <= 0.0) return 1.0;
  const double e = std::exp(-distance_m / 36.0);
  return std::min(18.0 / distance_m, 1.0) * (1.0 - e) + e;
}

/**
 * Small-scale fading coefficient with E[|g|^2] = 1.
 * LoS: Rician with linear factor K; NLoS: Rayleigh.
 * Always draws exactly two gaussians, so stream consumption is branch-free.
 */
inline std::complex<double> sample_fading(RngStream& rng, bool los, double rician_k_db) {
  const double re = rng.gaussian();
  const double im = rng.gaussian();
  if (los) {
    const double k = db_to_linear(rician_k_db);
    const double mean = std::sqrt(k / (k + 1.0));
    const double scatter = std::sqrt(1.0 / (2.0 * (k + 1.0)));
    return {mean + scatter * re, scatter * im};
  }
  return {re / std::sqrt(2.0), im / std::sqrt(2.0)};
}

/**
 * Correlated lognormal shadowing.  The exponential spatial correlation
 * matrix is factored once (symmetric eigendecomposition) for a fixed set of
 * positions; each draw is the matrix square root applied to iid gaussians,
 * scaled by per-device sigma.  This keeps co-located devices perfectly
 * correlated and handles the rank-deficient case safely.
 */
class ShadowingModel {
 public:
  ShadowingModel(const std::vector<Vec2>& positions, double corr_dist_m) {
    if (corr_dist_m <= 0.0) throw std::invalid_argument("shadow correlation distance must be > 0");
    const int n = static_cast<int>(positions.size());
    if (n == 0) throw std::invalid_argument("shadowing needs at least one position");
    Eigen::MatrixXd corr(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        corr(i, j) = std::exp(-distance(positions[static_cast<std::size_t>(i)],
                                        positions[static_cast<std::size_t>(j)]) /
                              corr_dist_m);
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(corr);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("shadowing correlation eigendecomposition failed");
    Eigen::VectorXd ev = es.eigenvalues();
    const double tol = -1e-8 * std::max(1.0, ev.cwiseAbs().maxCoeff());
    for (int i = 0; i < n; ++i) {
      if (ev(i) < tol)
        throw std::runtime_error("shadowing covariance is not positive semidefinite (eigenvalue " +
                                 std::to_string(ev(i)) + ")");
      ev(i) = std::sqrt(std::max(ev(i), 0.0));
    }
    sqrt_corr_ = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  }

  int size() const { return static_cast<int>(sqrt_corr_.rows()); }

  /// One correlated draw; sigmas_db[i] scales device i (vector or scalar form).
  std::vector<double> sample(std::span<const double> sigmas_db, RngStream& rng) const {
    const int n = size();
    if (static_cast<int>(sigmas_db.size()) != n)
      throw std::invalid_argument("sigma vector size mismatch");
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z(i) = rng.gaussian();
    const Eigen::VectorXd x = sqrt_corr_ * z;
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = sigmas_db[static_cast<std::size_t>(i)] * x(i);
    return out;
  }

  std::vector<double> sample(double sigma_db, RngStream& rng) const {
    const std::vector<double> sigmas(static_cast<std::size_t>(size()), sigma_db);
    return sample(std::span<const double>(sigmas), rng);
  }

 private:
  Eigen::MatrixXd sqrt_corr_;
};

/// Convenience one-shot form for a uniform sigma.
inline std::vector<double> sample_shadowing(const std::vector<Vec2>& positions, double sigma_db,
                                            double corr_dist_m, RngStream& rng) {
  return ShadowingModel(positions, corr_dist_m).sample(sigma_db, rng);
}

/// Per-device link condition for one episode/step.
struct LinkState {
  int device_id = 0;
  double distance_m = 0.0;
  bool is_los = false;
  double shadowing_db = 0.0;
  std::complex<double> fading{1.0, 0.0};
  double channel_gain = 0.0;  // linear power gain |h|^2
};

/// |h|^2 = 10^(-(PL + X_shadow)/10) * |g|^2.
inline double compute_channel_gain(double path_loss_db_v, double shadowing_db,
                                   std::complex<double> fading) {
  return db_to_linear(-(path_loss_db_v + shadowing_db)) * std::norm(fading);
}

/**
 * Per-device multi-user interference in mW:
 *   I_i = sum_{j != i, j active} rho[a_i][a_j] * P_j * |h_j|^2 * beta_ij.
 * `codes` are 1-based codebook indices.  `beta` is an optional N*N row-major
 * sensitivity matrix (nullptr means all ones).
 */
inline std::vector<double> compute_interference(std::span<const int> codes,
                                                std::span<const std::uint8_t> active,
                                                std::span<const double> powers_mw,
                                                std::span<const double> gains,
                                                const Codebook& cb,
                                                const double* beta = nullptr) {
  const std::size_t n = codes.size();
  if (active.size() != n || powers_mw.size() != n || gains.size() != n)
    throw std::invalid_argument("compute_interference: input size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (codes[i] < 1 || codes[i] > cb.num_codes)
      throw std::invalid_argument("code index " + std::to_string(codes[i]) +
                                  " outside [1, " + std::to_string(cb.num_codes) + "]");
  }
  std::vector<double> received(n);  // P_j * |h_j|^2 for active j, else 0
  for (std::size_t j = 0; j < n; ++j)
    received[j] = active[j] ? powers_mw[j] * gains[j] : 0.0;

  std::vector<double> interference(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const int ci = codes[i] - 1;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || received[j] == 0.0) continue;
      const double b = beta ? beta[i * n + j] : 1.0;
      acc += cb.rho(ci, codes[j] - 1) * received[j] * b;
    }
    interference[i] = acc;
  }
  return interference;
}

/**
 * Linear SINR with despreading gain on the desired signal:
 *   SINR_i = G_p * P_i * |h_i|^2 / (N + I_i + I_ext), inactive devices -> 0.
 */
inline std::vector<double> compute_sinr(std::span<const std::uint8_t> active,
                                        std::span<const double> powers_mw,
                                        std::span<const double> gains,
                                        std::span<const double> interference_mw,
                                        double processing_gain, double noise_mw,
                                        double external_interference_mw) {
  const std::size_t n = active.size();
  if (powers_mw.size() != n || gains.size() != n || interference_mw.size() != n)
    throw std::invalid_argument("compute_sinr: input size mismatch");
  std::vector<double> sinr(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!active[i]) continue;
    sinr[i] = processing_gain * powers_mw[i] * gains[i] /
              (noise_mw + interference_mw[i] + external_interference_mw);
  }
  return sinr;
}

}  // namespace nomarl
