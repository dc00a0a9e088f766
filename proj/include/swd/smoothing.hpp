#pragma once

// Gaussian smoothing: noisy resampling of measures (the sample-and-smooth
// route to P * N_sigma) and convolution of 1-Lipschitz test functions with
// the Gaussian density, evaluated by adaptive quadrature.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "swd/common.hpp"
#include "swd/measures.hpp"
#include "swd/rng.hpp"

namespace swd {

struct SmoothingConfig {
  double sigma = 1.0;
  std::size_t dim = 1;

  SmoothingConfig(double s, std::size_t d) : sigma(s), dim(d) {
    require_param(sigma > 0.0, "SmoothingConfig: sigma must be > 0");
    require_param(dim >= 1, "SmoothingConfig: dim must be >= 1");
  }
};

// m draws from (source * N(0, sigma^2 I)): draw from the source, add noise.
inline DiscreteMeasure sample_smoothed(const Source& src, double sigma, std::size_t m,
                                       RngStream rng) {
  require_param(sigma > 0.0, "sample_smoothed: sigma must be > 0");
  RngStream pick = rng.child("pick");
  RngStream noise = rng.child("noise");
  DiscreteMeasure base = sample_source(src, m, std::move(pick));
  const std::size_t d = base.dim();
  std::vector<double> pts = base.raw_points();
  for (double& c : pts) c += sigma * noise.normal();
  return DiscreteMeasure::uniform(std::move(pts), m, d);
}

// Weighted resample of mu plus independent N(0, sigma^2 I) noise.
// out_size = 0 keeps the input size.
inline DiscreteMeasure smooth_sample(const DiscreteMeasure& mu, const SmoothingConfig& cfg,
                                     RngStream rng, std::size_t out_size = 0) {
  require_dims(mu.dim() == cfg.dim, "smooth_sample: dimension mismatch");
  const std::size_t m = out_size == 0 ? mu.size() : out_size;
  return sample_smoothed(Source(mu), cfg.sigma, m, std::move(rng));
}

namespace detail {

// Adaptive Simpson on [a, b] with absolute tolerance.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth, double& achieved) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double err = (left + right - whole) / 15.0;
  if (depth <= 0 || std::abs(err) <= tol) {
    achieved += std::abs(err);
    if (depth <= 0 && std::abs(err) > tol)
      throw convergence_error("adaptive quadrature did not converge; local error " +
                              format_double(std::abs(err)));
    return left + right + err;
  }
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, achieved) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, achieved);
}

template <class F>
double integrate(const F& f, double a, double b, double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  double achieved = 0.0;
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48, achieved);
}

}  // namespace detail

// (f * phi_sigma)(x) for a 1-Lipschitz f, integrated over x +- 10 sigma.
// The truncated Gaussian tail beyond 10 sigma carries < 1e-22 relative mass.
inline double convolve_lipschitz_1d(const std::function<double(double)>& f, double sigma,
                                    double x, double tol = 1e-9) {
  require_param(sigma > 0.0, "convolve_lipschitz_1d: sigma must be > 0");
  require_param(tol > 0.0, "convolve_lipschitz_1d: tol must be > 0");
  const auto integrand = [&](double y) {
    return f(y) * norm_pdf((x - y) / sigma) / sigma;
  };
  const double lo = x - 10.0 * sigma;
  const double hi = x + 10.0 * sigma;
  // Split at x: kinks of f typically sit near the evaluation point.
  return detail::integrate(integrand, lo, x, 0.5 * tol) +
         detail::integrate(integrand, x, hi, 0.5 * tol);
}

// Max |D^k (f * phi_sigma)| over a grid via central finite differences with
// step sigma/100; k in {1, 2}.
inline double smoothed_derivative_max(const std::function<double(double)>& f, double sigma,
                                      int order, std::span<const double> grid,
                                      double quad_tol = 1e-9) {
  require_param(order == 1 || order == 2, "smoothed_derivative_max: order must be 1 or 2");
  require(!grid.empty(), "smoothed_derivative_max: grid must be nonempty");
  const double h = sigma / 100.0;
  double best = 0.0;
  for (double x : grid) {
    double est;
    if (order == 1) {
      const double fp = convolve_lipschitz_1d(f, sigma, x + h, quad_tol);
      const double fm = convolve_lipschitz_1d(f, sigma, x - h, quad_tol);
      est = (fp - fm) / (2.0 * h);
    } else {
      const double fp = convolve_lipschitz_1d(f, sigma, x + h, quad_tol);
      const double f0 = convolve_lipschitz_1d(f, sigma, x, quad_tol);
      const double fm = convolve_lipschitz_1d(f, sigma, x - h, quad_tol);
      est = (fp - 2.0 * f0 + fm) / (h * h);
    }
    best = std::max(best, std::abs(est));
  }
  return best;
}

}  // namespace swd
