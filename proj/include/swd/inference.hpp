#pragma once

// Bootstrap limit-distribution estimation, two-sample testing, and
// concentration-inequality evaluation for the smoothed distance.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "swd/common.hpp"
#include "swd/distance.hpp"
#include "swd/measures.hpp"
#include "swd/parallel.hpp"

namespace swd {

struct BootstrapResult {
  std::vector<double> stats;  // sqrt(n) * SWD(P_n^B, P_n), one per resample
  std::size_t B = 0;
  std::size_t n = 0;
  double sigma = 0.0;
};

// B bootstrap resamples of `data`; each statistic is sqrt(n) times the
// smoothed distance between the resample and the original sample.
inline BootstrapResult bootstrap_swd(const DiscreteMeasure& data, double sigma,
                                     std::size_t B, const EstimatorConfig& estimator,
                                     RngStream rng, unsigned threads = 1) {
  require(B >= 10, "bootstrap_swd: B must be >= 10");
  bool degenerate = true;
  for (std::size_t i = 1; i < data.size() && degenerate; ++i)
    for (std::size_t k = 0; k < data.dim(); ++k)
      if (data.coord(i, k) != data.coord(0, k)) {
        degenerate = false;
        break;
      }
  require(!degenerate, "bootstrap_swd: data must have at least 2 distinct points");

  BootstrapResult out;
  out.B = B;
  out.n = data.size();
  out.sigma = sigma;
  out.stats.resize(B);
  const double root_n = std::sqrt(static_cast<double>(data.size()));
  const Source base(data);
  parallel_for(B, threads, [&](std::size_t b) {
    RngStream sub = rng.child("boot", b);
    DiscreteMeasure resample = resample_bootstrap(data, sub.child("resample"));
    out.stats[b] =
        root_n *
        swd_estimate(Source(resample), base, sigma, estimator, sub.child("estimate")).value;
  });
  return out;
}

// Order-statistic quantile: the ceil((1-alpha)*B)-th smallest statistic.
inline double bootstrap_quantile(const BootstrapResult& result, double alpha) {
  require(!result.stats.empty(), "bootstrap_quantile: empty bootstrap result");
  require_param(alpha > 0.0 && alpha < 1.0, "bootstrap_quantile: alpha must be in (0,1)");
  const std::size_t B = result.stats.size();
  std::size_t k = static_cast<std::size_t>(
      std::ceil((1.0 - alpha) * static_cast<double>(B)));
  k = std::clamp<std::size_t>(k, 1, B);
  std::vector<double> copy = result.stats;
  std::nth_element(copy.begin(), copy.begin() + (k - 1), copy.end());
  return copy[k - 1];
}

// sqrt(mn/(m+n)) * SWD(P_n, Q_m).
inline double two_sample_stat(const DiscreteMeasure& X, const DiscreteMeasure& Y,
                              double sigma, const EstimatorConfig& estimator,
                              RngStream rng) {
  require_dims(X.dim() == Y.dim(), "two_sample_stat: dimension mismatch");
  const double n = static_cast<double>(X.size());
  const double m = static_cast<double>(Y.size());
  const double scale = std::sqrt(n * m / (n + m));
  return scale *
         swd_estimate(Source(X), Source(Y), sigma, estimator, std::move(rng)).value;
}

struct TwoSampleTest {
  double statistic = 0.0;
  double q_hat = 0.0;
  bool reject = false;
  std::vector<double> null_stats;
};

// Pooled-sample bootstrap test: both groups are resampled from the pooled
// empirical measure (exchangeable under the null) and the statistic is
// recomputed B times.
inline TwoSampleTest two_sample_test(const DiscreteMeasure& X, const DiscreteMeasure& Y,
                                     double sigma, std::size_t B, double alpha,
                                     const EstimatorConfig& estimator, RngStream rng,
                                     unsigned threads = 1) {
  require_dims(X.dim() == Y.dim(), "two_sample_test: dimension mismatch");
  require(B >= 50, "two_sample_test: B must be >= 50");
  require_param(alpha > 0.0 && alpha < 1.0, "two_sample_test: alpha must be in (0,1)");

  TwoSampleTest out;
  out.statistic = two_sample_stat(X, Y, sigma, estimator, rng.child("stat"));

  const std::size_t n = X.size(), m = Y.size(), d = X.dim();
  std::vector<double> pooled;
  pooled.reserve((n + m) * d);
  pooled.insert(pooled.end(), X.raw_points().begin(), X.raw_points().end());
  pooled.insert(pooled.end(), Y.raw_points().begin(), Y.raw_points().end());
  const DiscreteMeasure pool = DiscreteMeasure::uniform(std::move(pooled), n + m, d);

  out.null_stats.resize(B);
  parallel_for(B, threads, [&](std::size_t b) {
    RngStream sub = rng.child("null", b);
    DiscreteMeasure xs = sample_source(Source(pool), n, sub.child("x"));
    DiscreteMeasure ys = sample_source(Source(pool), m, sub.child("y"));
    out.null_stats[b] = two_sample_stat(xs, ys, sigma, estimator, sub.child("estimate"));
  });

  BootstrapResult as_boot;
  as_boot.stats = out.null_stats;
  as_boot.B = B;
  out.q_hat = bootstrap_quantile(as_boot, alpha);
  out.reject = out.statistic > out.q_hat;
  return out;
}

// -----------------------------------------------------------------------------
// Concentration inequalities. The compact-support bound is fully explicit;
// the psi_alpha and polynomial-moment bounds hold up to an unspecified
// constant C, which is a required user input here, with proxies for the
// moment quantities they reference.

struct ConcentrationBound {
  enum class Kind { compact, psi_alpha, poly };
  Kind kind = Kind::compact;
  double diameter = 0.0;        // compact: diam(support)
  double alpha = 0.0;           // psi_alpha: Orlicz exponent in (0, 1]
  double variance_proxy = 0.0;  // P||x||^2 + sigma^2 d
  double tail_scale = 0.0;      // || max_i ||X_i|| ||_{psi_alpha} + sigma sqrt(d)
  double q = 0.0;               // poly: moment order
  double moment_proxy = 0.0;    // E[max_i ||X_i||^q] + sigma^q d^{q/2}
  double eta = 0.0;             // slack in the (1+eta) E[...] centering
  double C = 0.0;               // user constant

  static ConcentrationBound compact(double diam) {
    require_param(diam > 0.0, "ConcentrationBound: diameter must be > 0");
    ConcentrationBound b;
    b.kind = Kind::compact;
    b.diameter = diam;
    return b;
  }

  static ConcentrationBound psi_alpha(double alpha, double variance_proxy,
                                      double tail_scale, double eta, double C) {
    require_param(alpha > 0.0 && alpha <= 1.0,
                  "ConcentrationBound: alpha must be in (0,1]");
    require_param(variance_proxy > 0.0 && tail_scale > 0.0,
                  "ConcentrationBound: scale parameters must be > 0");
    require_param(eta > 0.0, "ConcentrationBound: eta must be > 0");
    ConcentrationBound b;
    b.kind = Kind::psi_alpha;
    b.alpha = alpha;
    b.variance_proxy = variance_proxy;
    b.tail_scale = tail_scale;
    b.eta = eta;
    b.C = C;
    return b;
  }

  static ConcentrationBound poly(double q, double variance_proxy, double moment_proxy,
                                 double eta, double C) {
    require_param(q >= 1.0, "ConcentrationBound: q must be >= 1");
    require_param(variance_proxy > 0.0 && moment_proxy > 0.0,
                  "ConcentrationBound: scale parameters must be > 0");
    require_param(eta > 0.0, "ConcentrationBound: eta must be > 0");
    ConcentrationBound b;
    b.kind = Kind::poly;
    b.q = q;
    b.variance_proxy = variance_proxy;
    b.moment_proxy = moment_proxy;
    b.eta = eta;
    b.C = C;
    return b;
  }
};

inline double concentration_eval(const ConcentrationBound& bound, std::size_t n,
                                 double t) {
  require(t > 0.0, "concentration_eval: t must be > 0");
  require(n >= 1, "concentration_eval: n must be >= 1");
  const double nd = static_cast<double>(n);
  double value = 0.0;
  switch (bound.kind) {
    case ConcentrationBound::Kind::compact:
      value = std::exp(-nd * t * t / (bound.diameter * bound.diameter));
      break;
    case ConcentrationBound::Kind::psi_alpha:
      require_param(bound.C > 0.0,
                    "concentration_eval: user constant C required for psi_alpha kind");
      value = std::exp(-nd * t * t / (bound.C * bound.variance_proxy)) +
              3.0 * std::exp(-std::pow(nd * t / (bound.C * bound.tail_scale), bound.alpha));
      break;
    case ConcentrationBound::Kind::poly:
      require_param(bound.C > 0.0,
                    "concentration_eval: user constant C required for poly kind");
      value = std::exp(-nd * t * t / (bound.C * bound.variance_proxy)) +
              bound.C * bound.moment_proxy / std::pow(nd * t, bound.q);
      break;
  }
  return std::min(value, 1.0);
}

struct ConcentrationEmpirical {
  double mean = 0.0;
  std::vector<double> values;       // SWD(P_n, P), one per trial
  std::vector<double> ts;
  std::vector<double> frequencies;  // exceedance of mean + t
  std::vector<double> half_widths;  // Wilson 95% half-widths
};

// Monte-Carlo exceedance frequencies of SWD(P_n, P) over mean + t; the mean
// is estimated from the same trials.
inline ConcentrationEmpirical concentration_empirical(const Source& P, double sigma,
                                                      std::size_t n, std::size_t trials,
                                                      std::vector<double> t_grid,
                                                      const EstimatorConfig& estimator,
                                                      RngStream rng,
                                                      unsigned threads = 1) {
  require(trials >= 100, "concentration_empirical: trials must be >= 100");
  require(n >= 1, "concentration_empirical: n must be >= 1");
  ConcentrationEmpirical out;
  out.ts = std::move(t_grid);
  out.values.resize(trials);
  parallel_for(trials, threads, [&](std::size_t t) {
    RngStream sub = rng.child("trial", t);
    DiscreteMeasure data = sample_source(P, n, sub.child("sample"));
    out.values[t] =
        swd_estimate(Source(data), P, sigma, estimator, sub.child("estimate")).value;
  });
  out.mean = mean_of(out.values);
  for (double t : out.ts) {
    std::size_t exceed = 0;
    for (double v : out.values)
      if (v >= out.mean + t) ++exceed;
    out.frequencies.push_back(static_cast<double>(exceed) /
                              static_cast<double>(trials));
    out.half_widths.push_back(wilson_half_width(exceed, trials));
  }
  return out;
}

}  // namespace swd
