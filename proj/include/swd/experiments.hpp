#pragma once

// Desk-scale empirical studies: convergence-rate fits of mean SWD(P_n, P)
// against n, limit-distribution scatter clouds of sqrt(n)-scaled estimation
// errors, and kernel density summaries.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "swd/common.hpp"
#include "swd/distance.hpp"
#include "swd/inference.hpp"
#include "swd/measures.hpp"
#include "swd/mswe.hpp"
#include "swd/parallel.hpp"

namespace swd {

struct RateFit {
  double sigma = 0.0;
  std::vector<double> ns;
  std::vector<double> means;
  std::vector<double> stderrs;
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double max_abs_log_residual = 0.0;
};

struct RateCell {
  double sigma = 0.0;
  std::size_t n = 0;
  std::size_t trial = 0;
  double value = 0.0;
};

struct RateExperiment {
  std::vector<RateFit> fits;    // one per sigma
  std::vector<RateCell> cells;  // raw per-trial values
  std::size_t reference_size = 0;  // 0 when the exact 1-D estimator was used
};

// Per (sigma, n): mean and standard error of SWD(P_n, P) over independent
// trials, then a log-log least-squares fit of the mean against n. In d >= 2
// the population is replaced by a frozen reference sample whose size is
// reported in the output.
inline RateExperiment rate_experiment(const Source& P, const std::vector<double>& sigmas,
                                      const std::vector<std::size_t>& ns,
                                      std::size_t trials, const EstimatorConfig& estimator,
                                      RngStream rng, unsigned threads = 1,
                                      std::size_t reference_multiplier = 16) {
  require(!sigmas.empty(), "rate_experiment: need at least one sigma");
  require(ns.size() >= 2, "rate_experiment: n grid must have at least 2 points");
  for (std::size_t i = 1; i < ns.size(); ++i)
    require(ns[i] > ns[i - 1], "rate_experiment: n grid must be strictly increasing");
  require(ns.back() >= 16 * ns.front(),
          "rate_experiment: n grid must span at least a factor of 16");
  require(trials >= 20, "rate_experiment: trials must be >= 20");
  for (double s : sigmas)
    require_param(s > 0.0, "rate_experiment: sigma must be > 0");

  const std::size_t d = source_dim(P);
  const bool exact = d == 1 && estimator.kind != EstimatorConfig::Kind::mc;

  RateExperiment out;
  std::optional<DiscreteMeasure> reference;
  if (!exact) {
    out.reference_size = reference_multiplier * ns.back();
    reference = sample_source(P, out.reference_size, rng.child("reference"));
  }
  const Source target = exact ? P : Source(*reference);

  out.cells.resize(sigmas.size() * ns.size() * trials);
  parallel_for(out.cells.size(), threads, [&](std::size_t idx) {
    const std::size_t t = idx % trials;
    const std::size_t ni = (idx / trials) % ns.size();
    const std::size_t si = idx / (trials * ns.size());
    RateCell& cell = out.cells[idx];
    cell.sigma = sigmas[si];
    cell.n = ns[ni];
    cell.trial = t;
    // Common random numbers across sigma: the (n, trial) cell reuses one
    // sample for every sigma, so sigma comparisons are pathwise.
    RngStream sub = rng.child("cell", ni * trials + t);
    try {
      DiscreteMeasure data = sample_source(P, cell.n, sub.child("sample"));
      cell.value = swd_estimate(Source(data), target, cell.sigma, estimator,
                                sub.child("estimate"))
                       .value;
    } catch (const std::exception& e) {
      throw std::runtime_error("rate_experiment cell (sigma=" + format_double(cell.sigma) +
                               ", n=" + std::to_string(cell.n) +
                               ", trial=" + std::to_string(t) + "): " + e.what());
    }
  });

  for (std::size_t si = 0; si < sigmas.size(); ++si) {
    RateFit fit;
    fit.sigma = sigmas[si];
    std::vector<double> log_n, log_mean;
    for (std::size_t ni = 0; ni < ns.size(); ++ni) {
      std::vector<double> vals(trials);
      for (std::size_t t = 0; t < trials; ++t)
        vals[t] = out.cells[(si * ns.size() + ni) * trials + t].value;
      const double mu = mean_of(vals);
      require(mu > 0.0, "rate_experiment: nonpositive mean distance");
      fit.ns.push_back(static_cast<double>(ns[ni]));
      fit.means.push_back(mu);
      fit.stderrs.push_back(sample_sd(vals) / std::sqrt(static_cast<double>(trials)));
      log_n.push_back(std::log(static_cast<double>(ns[ni])));
      log_mean.push_back(std::log(mu));
    }
    const LineFit line = fit_line(log_n, log_mean);
    fit.slope = line.slope;
    fit.intercept = line.intercept;
    fit.slope_se = line.slope_se;
    fit.max_abs_log_residual = line.max_abs_residual;
    out.fits.push_back(std::move(fit));
  }
  return out;
}

struct ScatterRow {
  double sigma = 0.0;
  std::size_t n = 0;
  std::size_t trial = 0;
  std::size_t component = 0;
  double scaled_error = 0.0;
  double theta_hat = 0.0;
};

struct ScatterSet {
  std::vector<ScatterRow> rows;
  std::vector<double> theta_star;

  std::vector<double> cell_component(double sigma, std::size_t n,
                                     std::size_t component) const {
    std::vector<double> out;
    for (const auto& r : rows)
      if (r.sigma == sigma && r.n == n && r.component == component)
        out.push_back(r.scaled_error);
    return out;
  }
};

// Limit-distribution scatter data: per (sigma, n) cell, `trials` independent
// MSWE fits with sqrt(n)-scaled errors.
inline ScatterSet limit_scatter(const ParametricModel& true_model,
                                const ParametricModel& family, const ThetaSpace& space,
                                const std::vector<double>& sigmas,
                                const std::vector<std::size_t>& ns, std::size_t trials,
                                const ObjectiveConfig& objective_cfg,
                                const OptimizerConfig& optimizer_cfg, RngStream rng,
                                unsigned threads = 1) {
  require(!sigmas.empty() && !ns.empty(), "limit_scatter: empty sigma or n grid");
  ScatterSet set;
  for (std::size_t si = 0; si < sigmas.size(); ++si) {
    for (std::size_t ni = 0; ni < ns.size(); ++ni) {
      const std::size_t cell = si * ns.size() + ni;
      ReplicateSet reps =
          mswe_replicates(true_model, family, space, sigmas[si], ns[ni], trials,
                          objective_cfg, optimizer_cfg, rng.child("cell", cell), threads);
      set.theta_star = reps.theta_star;
      for (const auto& row : reps.rows) {
        if (!row.ok) continue;
        for (std::size_t c = 0; c < row.scaled_error.size(); ++c)
          set.rows.push_back({sigmas[si], ns[ni], row.trial, c, row.scaled_error[c],
                              row.theta_hat[c]});
      }
    }
  }
  return set;
}

struct KdeCurve {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;

  double trapezoid_integral() const {
    double acc = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i)
      acc += 0.5 * (density[i] + density[i - 1]) * (grid[i] - grid[i - 1]);
    return acc;
  }
};

// Gaussian-kernel density estimate on a 256-point grid spanning the samples
// plus 3 bandwidths; Silverman's rule by default.
inline KdeCurve kde(const std::vector<double>& samples,
                    std::optional<double> bandwidth = std::nullopt) {
  require(samples.size() >= 5, "kde: need at least 5 samples");
  const double sd = sample_sd(samples);
  require_param(sd > 0.0, "kde: samples have zero variance");
  KdeCurve curve;
  curve.bandwidth =
      bandwidth.value_or(1.06 * sd * std::pow(static_cast<double>(samples.size()), -0.2));
  require_param(curve.bandwidth > 0.0, "kde: bandwidth must be > 0");
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *mn - 3.0 * curve.bandwidth;
  const double hi = *mx + 3.0 * curve.bandwidth;
  constexpr std::size_t kGrid = 256;
  curve.grid.resize(kGrid);
  curve.density.resize(kGrid);
  const double inv = 1.0 / (static_cast<double>(samples.size()) * curve.bandwidth);
  for (std::size_t g = 0; g < kGrid; ++g) {
    const double x = lo + (hi - lo) * static_cast<double>(g) / (kGrid - 1);
    double acc = 0.0;
    for (double s : samples) acc += norm_pdf((x - s) / curve.bandwidth);
    curve.grid[g] = x;
    curve.density[g] = acc * inv;
  }
  return curve;
}

}  // namespace swd
