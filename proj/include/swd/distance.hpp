#pragma once

// Smoothed 1-Wasserstein distance estimators.
//
// swd_1d_exact computes W1(P*N_sigma, Q*N_sigma) in one dimension as the L1
// distance between the smoothed CDFs. Both sides reduce to signed mixtures
// of Gaussian CDFs (plus smoothed-uniform terms), so the integrand has a
// closed-form antiderivative; the integral is assembled exactly between sign
// changes, which are located by a scan at the smoothing scale followed by
// safeguarded Newton refinement. swd_mc is the sample-and-smooth plug-in for
// arbitrary dimension. donsker_bound evaluates the lattice-partition moment
// sum sigma^{-floor(d/2)} * sum_j M_j * P(I_j)^{1/2}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "swd/common.hpp"
#include "swd/measures.hpp"
#include "swd/parallel.hpp"
#include "swd/smoothing.hpp"
#include "swd/transport.hpp"

namespace swd {

enum class SwdMethod { exact1d, mc_exact_ot, mc_sinkhorn };

struct SwdEstimate {
  double value = 0.0;
  double std_error = 0.0;
  SwdMethod method = SwdMethod::exact1d;
  std::size_t m = 0;            // plug-in sample size; 0 for exact
  std::size_t replications = 1;
};

namespace detail {

// Signed mixture of smoothed CDFs: h(x) = sum coef * Phi((x-center)/scale)
//                                        + sum box terms.
struct CdfDelta {
  struct GaussTerm {
    double coef, center, scale;
  };
  struct BoxTerm {
    double coef, lo, hi, sigma;
  };
  std::vector<GaussTerm> gauss;
  std::vector<BoxTerm> boxes;

  void add_source(const Source& src, double sigma, double sign) {
    if (const auto* mu = std::get_if<DiscreteMeasure>(&src)) {
      for (std::size_t i = 0; i < mu->size(); ++i)
        gauss.push_back({sign * mu->weight(i), mu->coord(i, 0), sigma});
      return;
    }
    if (const auto* model = std::get_if<ParametricModel>(&src)) {
      if (model->family() == Family::gaussian_mixture) {
        for (const auto& c : model->components())
          gauss.push_back({sign * c.weight, c.mean[0],
                           std::sqrt(c.scale * c.scale + sigma * sigma)});
      } else {
        const double s = model->scales()[0];
        gauss.push_back({sign, model->mean()[0], std::sqrt(s * s + sigma * sigma)});
      }
      return;
    }
    const auto& box = std::get<UniformBox>(src);
    boxes.push_back({sign, box.lo[0], box.hi[0], sigma});
  }

  // Merge exactly-coincident atoms (bootstrap resamples share support with
  // the original sample) and drop cancelled terms.
  void finalize() {
    std::sort(gauss.begin(), gauss.end(), [](const GaussTerm& a, const GaussTerm& b) {
      return a.center != b.center ? a.center < b.center : a.scale < b.scale;
    });
    std::vector<GaussTerm> merged;
    merged.reserve(gauss.size());
    for (const GaussTerm& t : gauss) {
      if (!merged.empty() && merged.back().center == t.center &&
          merged.back().scale == t.scale)
        merged.back().coef += t.coef;
      else
        merged.push_back(t);
    }
    std::erase_if(merged, [](const GaussTerm& t) { return t.coef == 0.0; });
    gauss = std::move(merged);
  }

  double value(double x) const {
    double acc = 0.0;
    for (const auto& t : gauss) acc += t.coef * norm_cdf_fast((x - t.center) / t.scale);
    for (const auto& b : boxes) {
      const double ta = (x - b.lo) / b.sigma;
      const double tb = (x - b.hi) / b.sigma;
      acc += b.coef * b.sigma / (b.hi - b.lo) *
             (cdf_integral_fast(ta) - cdf_integral_fast(tb));
    }
    return acc;
  }

  double density(double x) const {
    double acc = 0.0;
    for (const auto& t : gauss)
      acc += t.coef * norm_pdf_fast((x - t.center) / t.scale) / t.scale;
    for (const auto& b : boxes)
      acc += b.coef / (b.hi - b.lo) *
             (norm_cdf_fast((x - b.lo) / b.sigma) - norm_cdf_fast((x - b.hi) / b.sigma));
    return acc;
  }

  // Exact antiderivative of value(); used only at segment endpoints.
  double antiderivative(double x) const {
    double acc = 0.0;
    for (const auto& t : gauss)
      acc += t.coef * t.scale * norm_cdf_integral((x - t.center) / t.scale);
    for (const auto& b : boxes)
      acc += b.coef * b.sigma * b.sigma / (b.hi - b.lo) *
             (norm_cdf_integral2((x - b.lo) / b.sigma) -
              norm_cdf_integral2((x - b.hi) / b.sigma));
    return acc;
  }

  double min_scale() const {
    double s = std::numeric_limits<double>::infinity();
    for (const auto& t : gauss) s = std::min(s, t.scale);
    for (const auto& b : boxes) s = std::min(s, b.sigma);
    return s;
  }

  // Bounds where every term's CDF is within ~3e-14 of {0, 1}.
  void support_bounds(double& lo, double& hi) const {
    lo = std::numeric_limits<double>::infinity();
    hi = -std::numeric_limits<double>::infinity();
    for (const auto& t : gauss) {
      lo = std::min(lo, t.center - 7.5 * t.scale);
      hi = std::max(hi, t.center + 7.5 * t.scale);
    }
    for (const auto& b : boxes) {
      lo = std::min(lo, b.lo - 7.5 * b.sigma);
      hi = std::max(hi, b.hi + 7.5 * b.sigma);
    }
  }

 private:
  static double cdf_integral_fast(double t) {
    if (t <= NormTable::kLo) return 0.0;
    if (t >= NormTable::kHi) return t;
    return t * norm_cdf_fast(t) + norm_pdf_fast(t);
  }
};

// One-sided smoothed CDF, used to tighten the integration domain.
struct CdfSide {
  CdfDelta mix;
  explicit CdfSide(const Source& src, double sigma) {
    mix.add_source(src, sigma, 1.0);
    mix.finalize();
  }
  double cdf(double x) const { return mix.value(x); }
};

inline double refine_domain_edge(const CdfSide& p, const CdfSide& q, double outer,
                                 double inner, bool lower_tail) {
  // Innermost point where both tails still stay below 1e-10; `outer` is the
  // conservative per-term support bound, `inner` the domain midpoint.
  constexpr double kTail = 1e-10;
  auto tail_mass = [&](double x) {
    const double fp = p.cdf(x), fq = q.cdf(x);
    return lower_tail ? std::max(fp, fq) : std::max(1.0 - fp, 1.0 - fq);
  };
  if (tail_mass(inner) <= kTail) return inner;
  double good = outer, bad = inner;
  for (int it = 0; it < 60 && std::abs(good - bad) >
                                  1e-6 * (1.0 + std::abs(good) + std::abs(bad));
       ++it) {
    const double mid = 0.5 * (good + bad);
    if (tail_mass(mid) <= kTail)
      good = mid;
    else
      bad = mid;
  }
  return good;
}

// Locate a sign change of h in [lo, hi] with h(lo), h(hi) of opposite sign.
inline double refine_root(const CdfDelta& h, double lo, double hi, double flo) {
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 60; ++it) {
    const double fx = h.value(x);
    if (fx == 0.0) return x;
    if ((fx > 0.0) == (flo > 0.0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
    if (hi - lo < 1e-11 * (1.0 + std::abs(lo))) break;
    const double d = h.density(x);
    double next = x - fx / d;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// Exact 1-D SWD as the L1 distance between smoothed CDFs.
inline SwdEstimate swd_1d_exact(const Source& P, const Source& Q, double sigma,
                                double quad_tol = 1e-8) {
  require_dims(source_dim(P) == 1 && source_dim(Q) == 1,
               "swd_1d_exact: sources must be one-dimensional");
  require_param(sigma > 0.0, "swd_1d_exact: sigma must be > 0");
  require_param(quad_tol > 0.0, "swd_1d_exact: quad_tol must be > 0");

  detail::CdfSide side_p(P, sigma), side_q(Q, sigma);
  detail::CdfDelta h;
  h.add_source(P, sigma, 1.0);
  h.add_source(Q, sigma, -1.0);
  h.finalize();
  if (h.gauss.empty() && h.boxes.empty())
    return {0.0, 0.0, SwdMethod::exact1d, 0, 1};

  double lo, hi;
  h.support_bounds(lo, hi);
  const double mid = 0.5 * (lo + hi);
  const double a = detail::refine_domain_edge(side_p, side_q, lo, mid, true);
  const double b = detail::refine_domain_edge(side_p, side_q, hi, mid, false);

  // Scan at a fraction of the smallest smoothing scale; h cannot oscillate
  // much faster than that.
  const double scale = h.min_scale();
  const std::size_t points = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil((b - a) / (scale / 3.0))), 64, 4096);
  std::vector<double> xs(points + 1), hs(points + 1);
  for (std::size_t k = 0; k <= points; ++k) {
    xs[k] = a + (b - a) * static_cast<double>(k) / static_cast<double>(points);
    hs[k] = h.value(xs[k]);
  }

  std::vector<double> cuts;
  cuts.push_back(a);
  double prev_x = xs[0], prev_h = hs[0];
  for (std::size_t k = 1; k <= points; ++k) {
    if (prev_h != 0.0 && hs[k] != 0.0 && (prev_h > 0.0) != (hs[k] > 0.0))
      cuts.push_back(detail::refine_root(h, prev_x, xs[k], prev_h));
    if (hs[k] != 0.0) {
      prev_x = xs[k];
      prev_h = hs[k];
    }
  }
  cuts.push_back(b);

  // Validation sweep: catch double crossings the scan may have missed.
  for (int round = 0; round < 2; ++round) {
    std::vector<double> extra;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
      const double l = cuts[s], r = cuts[s + 1];
      const double href = h.value(0.5 * (l + r));
      if (href == 0.0) continue;
      for (int q = 1; q <= 4; q += 2) {  // probes at 1/4 and 3/4
        const double x = l + (r - l) * q / 4.0;
        const double hx = h.value(x);
        if (hx != 0.0 && (hx > 0.0) != (href > 0.0)) {
          const double m2 = 0.5 * (l + r);
          if (x < m2)
            extra.push_back(detail::refine_root(h, x, m2, hx));
          else
            extra.push_back(detail::refine_root(h, m2, x, href));
        }
      }
    }
    if (extra.empty()) break;
    cuts.insert(cuts.end(), extra.begin(), extra.end());
    std::sort(cuts.begin(), cuts.end());
  }

  long double total = 0.0L;
  double prev_anti = h.antiderivative(cuts.front());
  for (std::size_t s = 1; s < cuts.size(); ++s) {
    const double anti = h.antiderivative(cuts[s]);
    total += std::abs(anti - prev_anti);
    prev_anti = anti;
  }

  // Error budget: truncated tails, root placement, table interpolation.
  const double err = 2e-10 * (b - a) + 1e-10 + cuts.size() * 1e-12;
  if (err > quad_tol)
    throw convergence_error("swd_1d_exact: requested tolerance " +
                            format_double(quad_tol) + " unattainable; achieved about " +
                            format_double(err));
  return {static_cast<double>(total), 0.0, SwdMethod::exact1d, 0, 1};
}

enum class SolverChoice { exact, sinkhorn };

struct McConfig {
  std::size_t m = 1000;
  std::size_t reps = 1;
  SolverChoice solver = SolverChoice::exact;
  double sinkhorn_epsilon = 0.01;
  std::size_t sinkhorn_max_iter = 5000;
  std::size_t max_entries = 4'000'000;
  unsigned threads = 1;
};

// Monte-Carlo plug-in: draw m smoothed samples from each side and solve the
// discrete transport problem; replications use derived sub-streams.
inline SwdEstimate swd_mc(const Source& P, const Source& Q, double sigma,
                          const McConfig& cfg, RngStream rng) {
  require(cfg.m >= 2, "swd_mc: plug-in size m must be >= 2");
  require(cfg.reps >= 1, "swd_mc: reps must be >= 1");
  require_dims(source_dim(P) == source_dim(Q), "swd_mc: dimension mismatch");
  require_param(sigma > 0.0, "swd_mc: sigma must be > 0");

  const std::size_t d = source_dim(P);
  std::vector<double> values(cfg.reps);
  parallel_for(cfg.reps, cfg.threads, [&](std::size_t r) {
    RngStream sub = rng.child("rep", r);
    DiscreteMeasure xs = sample_smoothed(P, sigma, cfg.m, sub.child("p"));
    DiscreteMeasure ys = sample_smoothed(Q, sigma, cfg.m, sub.child("q"));
    if (cfg.solver == SolverChoice::sinkhorn) {
      values[r] = sinkhorn_w1(xs, ys, cfg.sinkhorn_epsilon, cfg.sinkhorn_max_iter).cost;
    } else if (d == 1) {
      values[r] = solve_w1_1d_sorted(xs, ys);
    } else {
      ExactSolverOptions opt;
      opt.max_entries = cfg.max_entries;
      try {
        values[r] = solve_w1_exact(xs, ys, opt).cost;
      } catch (const resource_error& e) {
        throw resource_error(std::string("swd_mc: exact solver refused the instance (") +
                             e.what() + ")");
      }
    }
  });

  SwdEstimate est;
  est.value = mean_of(values);
  est.std_error =
      cfg.reps >= 2 ? sample_sd(values) / std::sqrt(static_cast<double>(cfg.reps)) : 0.0;
  est.method = cfg.solver == SolverChoice::sinkhorn ? SwdMethod::mc_sinkhorn
                                                    : SwdMethod::mc_exact_ot;
  est.m = cfg.m;
  est.replications = cfg.reps;
  return est;
}

// Estimator dispatch shared by inference and experiments.
struct EstimatorConfig {
  enum class Kind { auto_pick, exact1d, mc };
  Kind kind = Kind::auto_pick;
  double quad_tol = 1e-8;
  McConfig mc;
};

inline SwdEstimate swd_estimate(const Source& P, const Source& Q, double sigma,
                                const EstimatorConfig& cfg, RngStream rng) {
  const bool one_d = source_dim(P) == 1 && source_dim(Q) == 1;
  bool exact = cfg.kind == EstimatorConfig::Kind::exact1d ||
               (cfg.kind == EstimatorConfig::Kind::auto_pick && one_d);
  if (exact) {
    require_dims(one_d, "swd_estimate: exact estimator needs 1-D sources");
    return swd_1d_exact(P, Q, sigma, cfg.quad_tol);
  }
  return swd_mc(P, Q, sigma, cfg.mc, std::move(rng));
}

struct DonskerBound {
  double value = 0.0;
  bool converged = false;
  std::size_t shells = 0;
  std::size_t cubes = 0;
};

namespace detail {

inline double cube_probability(const Source& src, std::span<const double> lo,
                               std::span<const double> hi) {
  if (const auto* model = std::get_if<ParametricModel>(&src))
    return model->box_probability(lo, hi);
  if (const auto* box = std::get_if<UniformBox>(&src)) {
    double p = 1.0;
    for (std::size_t k = 0; k < lo.size() && p > 0.0; ++k) {
      const double overlap =
          std::min(hi[k], box->hi[k]) - std::max(lo[k], box->lo[k]);
      p *= std::max(overlap, 0.0) / (box->hi[k] - box->lo[k]);
    }
    return p;
  }
  const auto& mu = std::get<DiscreteMeasure>(src);
  double p = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    bool inside = true;
    for (std::size_t k = 0; k < lo.size() && inside; ++k) {
      const double c = mu.coord(i, k);
      inside = c >= lo[k] && c < hi[k];
    }
    if (inside) p += mu.weight(i);
  }
  return p;
}

}  // namespace detail

// Partial sum of sigma^{-floor(d/2)} * sum_j M_j * P(I_j)^{1/2} over the
// integer-lattice cube partition, accumulated over L-infinity shells until
// the shell contribution drops below tail_cutoff.
inline DonskerBound donsker_bound(const Source& src, double sigma, double cube_side = 1.0,
                                  double tail_cutoff = 1e-6) {
  require_param(sigma > 0.0, "donsker_bound: sigma must be > 0");
  require_param(cube_side > 0.0, "donsker_bound: cube_side must be > 0");
  require_param(tail_cutoff > 0.0, "donsker_bound: tail_cutoff must be > 0");
  const std::size_t d = source_dim(src);

  std::vector<long long> k(d);
  std::vector<double> lo(d), hi(d);
  long double covered = 0.0L;  // cube mass accumulated so far
  auto cube_term = [&]() {
    for (std::size_t t = 0; t < d; ++t) {
      lo[t] = cube_side * static_cast<double>(k[t]);
      hi[t] = lo[t] + cube_side;
    }
    const double p = detail::cube_probability(src, lo, hi);
    if (p <= 0.0) return 0.0;
    covered += p;
    double m2 = 0.0;
    for (std::size_t t = 0; t < d; ++t) {
      const double far = std::max(std::abs(lo[t]), std::abs(hi[t]));
      m2 += far * far;
    }
    return std::sqrt(m2) * std::sqrt(p);
  };

  DonskerBound out;
  long double sum = 0.0L;
  std::size_t non_decreasing = 0;
  double prev_shell = -1.0;
  constexpr std::size_t kMaxCubes = 20'000'000;

  for (long long shell = 1;; ++shell) {
    // Cubes whose corner lies in [-shell, shell-1]^d but not in the previous box.
    double shell_sum = 0.0;
    std::size_t shell_cubes = 0;
    for (std::size_t t = 0; t < d; ++t) k[t] = -shell;
    for (;;) {
      bool boundary = false;
      for (std::size_t t = 0; t < d; ++t)
        if (k[t] == -shell || k[t] == shell - 1) {
          boundary = true;
          break;
        }
      if (boundary) {
        shell_sum += cube_term();
        ++shell_cubes;
      }
      std::size_t t = 0;
      for (; t < d; ++t) {
        if (++k[t] <= shell - 1) break;
        k[t] = -shell;
      }
      if (t == d) break;
    }
    sum += shell_sum;
    out.shells = static_cast<std::size_t>(shell);
    out.cubes += shell_cubes;
    if (out.cubes > kMaxCubes)
      throw resource_error("donsker_bound: cube budget exhausted");
    // A quiet shell only ends the sum once the cube mass has essentially
    // covered the distribution; sources concentrated away from the origin
    // produce empty leading shells.
    if (shell_sum < tail_cutoff && covered > 1.0L - 1e-9L) {
      out.converged = true;
      break;
    }
    if (prev_shell >= 0.0 && shell_sum >= prev_shell) {
      if (++non_decreasing >= 100) break;  // flagged divergent
    } else {
      non_decreasing = 0;
    }
    prev_shell = shell_sum;
  }

  const double prefactor = std::pow(sigma, -static_cast<double>(d / 2));
  out.value = prefactor * static_cast<double>(sum);
  return out;
}

}  // namespace swd
