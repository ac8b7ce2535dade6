#pragma once
/**
 * Metrics and statistics: Jain fairness, Student-t machinery (incomplete
 * beta evaluated by continued fraction), paired t-tests, Cohen's d,
 * convergence detection, and per-episode/per-run aggregation.
 *
 * The t distribution is evaluated numerically so p-values and quantiles
 * carry no table lookups: cdf via the regularized incomplete beta, quantile
 * via bisection on the cdf.
 */

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nomarl {

/// 17 significant digits: enough to round-trip any double exactly.
inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double mean_of(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean of empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

/// Sample standard deviation (n-1 denominator); 0 for n < 2.
inline double sample_stddev(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  const double m = mean_of(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(n - 1));
}

/// Streaming mean/variance accumulator.
struct Welford {
  long long n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double variance_sample() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double stddev_sample() const { return std::sqrt(variance_sample()); }
};

/**
 * Jain fairness index (sum x)^2 / (n * sum x^2).  An empty or all-zero
 * sample carries no fairness signal and is defined as 1.
 */
inline double jain_index(std::span<const double> xs) {
  if (xs.empty()) return 1.0;
  double s = 0.0, s2 = 0.0;
  for (double x : xs) {
    s += x;
    s2 += x * x;
  }
  if (s2 == 0.0) return 1.0;
  return s * s / (static_cast<double>(xs.size()) * s2);
}

namespace detail {

inline double log_gamma(double x) { return std::lgamma(x); }

/// Continued-fraction helper for the regularized incomplete beta (Lentz).
inline double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("incomplete beta continued fraction did not converge");
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b).
inline double regularized_incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) throw std::invalid_argument("incomplete beta needs a, b > 0");
  if (x < 0.0 || x > 1.0) throw std::invalid_argument("incomplete beta needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_front = detail::log_gamma(a + b) - detail::log_gamma(a) -
                          detail::log_gamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_cf(a, b, x) / a;
  return 1.0 - std::exp(detail::log_gamma(a + b) - detail::log_gamma(b) - detail::log_gamma(a) +
                        b * std::log1p(-x) + a * std::log(x)) *
                   detail::beta_cf(b, a, 1.0 - x) / b;
}

inline double student_t_cdf(double t, double dof) {
  if (dof <= 0.0) throw std::invalid_argument("t distribution needs dof > 0");
  if (t == 0.0) return 0.5;
  const double x = dof / (dof + t * t);
  const double half_tail = 0.5 * regularized_incomplete_beta(dof / 2.0, 0.5, x);
  return t > 0.0 ? 1.0 - half_tail : half_tail;
}

/// Two-sided tail probability P(|T| >= |t|).
inline double student_t_two_sided_p(double t, double dof) {
  if (t == 0.0) return 1.0;
  return regularized_incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t));
}

/// Quantile by bisection on the cdf (monotone, so this is robust).
inline double student_t_quantile(double p, double dof) {
  if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("quantile needs p in (0, 1)");
  double lo = -1e8, hi = 1e8;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (student_t_cdf(mid, dof) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct ConfidenceInterval {
  double mean = 0.0;
  double half_width = 0.0;
};

/// Student-t 95% interval; a single sample has no width estimate (0).
inline ConfidenceInterval confidence_interval_95(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("confidence interval of empty sample");
  ConfidenceInterval ci;
  ci.mean = mean_of(xs);
  const std::size_t n = xs.size();
  if (n < 2) return ci;
  const double s = sample_stddev(xs);
  if (s == 0.0) return ci;
  ci.half_width = student_t_quantile(0.975, static_cast<double>(n - 1)) * s /
                  std::sqrt(static_cast<double>(n));
  return ci;
}

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  int dof = 0;
  bool degenerate = false;  // zero-variance nonzero-mean differences
};

/**
 * Two-sided paired t-test on matched samples, with the usual sample
 * standard deviation (n-1) of the differences.  All-zero differences give
 * t=0, p=1 by convention; zero variance with nonzero mean is flagged
 * degenerate with infinite t and p=0.
 */
inline TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired t-test needs equal lengths");
  if (a.size() < 2) throw std::invalid_argument("paired t-test needs n >= 2");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];

  TTestResult r;
  r.dof = static_cast<int>(a.size()) - 1;
  const double md = mean_of(d);
  const double sd = sample_stddev(d);
  if (sd == 0.0) {
    if (md == 0.0) return r;  // t=0, p=1
    r.t = md > 0.0 ? std::numeric_limits<double>::infinity()
                   : -std::numeric_limits<double>::infinity();
    r.p = 0.0;
    r.degenerate = true;
    return r;
  }
  r.t = md / (sd / std::sqrt(static_cast<double>(d.size())));
  r.p = student_t_two_sided_p(r.t, static_cast<double>(r.dof));
  return r;
}

/// Cohen's d with pooled sample standard deviation.
inline double cohens_d(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("cohens_d needs n >= 2 per group");
  const double ma = mean_of(a), mb = mean_of(b);
  const double sa = sample_stddev(a), sb = sample_stddev(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double pooled =
      std::sqrt(((na - 1.0) * sa * sa + (nb - 1.0) * sb * sb) / (na + nb - 2.0));
  if (pooled == 0.0) {
    if (ma == mb) return 0.0;
    return ma > mb ? std::numeric_limits<double>::infinity()
                   : -std::numeric_limits<double>::infinity();
  }
  return (ma - mb) / pooled;
}

/**
 * First episode (1-based) whose trailing `window` values all sit within
 * `tol` relative of the window mean; nullopt if the series never settles.
 * A window mean of zero converges only if the whole window is zero.
 */
inline std::optional<int> convergence_episode(std::span<const double> series, int window = 50,
                                              double tol = 0.01) {
  if (window < 1) throw std::invalid_argument("convergence window must be >= 1");
  const int n = static_cast<int>(series.size());
  for (int e = window; e <= n; ++e) {
    double s = 0.0;
    for (int j = e - window; j < e; ++j) s += series[static_cast<std::size_t>(j)];
    const double m = s / static_cast<double>(window);
    bool ok = true;
    for (int j = e - window; j < e && ok; ++j) {
      const double x = series[static_cast<std::size_t>(j)];
      if (m == 0.0)
        ok = x == 0.0;
      else
        ok = std::fabs(x - m) / std::fabs(m) < tol;
    }
    if (ok) return e;
  }
  return std::nullopt;
}

/// First episode (1-based) whose value reaches `level`; -1 if never.
inline int first_reaching(std::span<const double> series, double level) {
  for (std::size_t i = 0; i < series.size(); ++i)
    if (series[i] >= level) return static_cast<int>(i) + 1;
  return -1;
}

struct EpisodeMetrics {
  double throughput_mbps = 0.0;        // mean over devices and steps of B*log2(1+SINR)*A_i
  double energy_bits_per_j = 0.0;      // served bits / consumed energy (0 when no energy used)
  double energy_component = 0.0;       // mean per-step energy reward component (<= 0)
  double critical_reliability = 0.0;   // fraction of critical device-steps meeting threshold
  double fairness = 0.0;               // mean per-step Jain over active devices
  double interference = 0.0;           // mean per-step code-coupled interference sum
  double combined_reward = 0.0;        // mean per-step combined reward
};

struct MetricSummary {
  double mean = 0.0;
  double stdev = 0.0;
  double ci_half = 0.0;
};

struct RunSummary {
  int episodes = 0;
  int window = 0;  // trailing episodes the summary covers
  std::map<std::string, MetricSummary> metrics;
  std::optional<int> convergence_ep;
  int reach90_ep = -1;  // first episode reaching 90% of final combined reward
};

inline MetricSummary summarize_metric(std::span<const double> xs) {
  MetricSummary s;
  const auto ci = confidence_interval_95(xs);
  s.mean = ci.mean;
  s.ci_half = ci.half_width;
  s.stdev = sample_stddev(xs);
  return s;
}

/// Aggregate a run's episode series over its trailing evaluation window.
inline RunSummary summarize_run(std::span<const EpisodeMetrics> eps, int eval_window = 100) {
  if (eps.empty()) throw std::invalid_argument("summarize_run needs at least one episode");
  RunSummary rs;
  rs.episodes = static_cast<int>(eps.size());
  rs.window = std::min<int>(eval_window, rs.episodes);
  const std::size_t start = eps.size() - static_cast<std::size_t>(rs.window);

  auto collect = [&](auto getter) {
    std::vector<double> xs;
    xs.reserve(static_cast<std::size_t>(rs.window));
    for (std::size_t i = start; i < eps.size(); ++i) xs.push_back(getter(eps[i]));
    return xs;
  };
  const auto put = [&](const std::string& name, std::vector<double> xs) {
    rs.metrics[name] = summarize_metric(xs);
  };
  put("throughput_mbps", collect([](const EpisodeMetrics& e) { return e.throughput_mbps; }));
  put("energy_bits_per_j", collect([](const EpisodeMetrics& e) { return e.energy_bits_per_j; }));
  put("energy_component", collect([](const EpisodeMetrics& e) { return e.energy_component; }));
  put("critical_reliability",
      collect([](const EpisodeMetrics& e) { return e.critical_reliability; }));
  put("fairness", collect([](const EpisodeMetrics& e) { return e.fairness; }));
  put("interference", collect([](const EpisodeMetrics& e) { return e.interference; }));
  put("combined_reward", collect([](const EpisodeMetrics& e) { return e.combined_reward; }));

  std::vector<double> rewards;
  rewards.reserve(eps.size());
  for (const auto& e : eps) rewards.push_back(e.combined_reward);
  rs.convergence_ep = convergence_episode(rewards);
  rs.reach90_ep = first_reaching(rewards, 0.9 * rs.metrics["combined_reward"].mean);
  return rs;
}

}  // namespace nomarl
