#pragma once

// Shared numeric primitives: error taxonomy, normal-distribution kernels,
// a tabulated CDF/PDF for hot loops, small statistics helpers, and the
// 64-bit hash/mix functions used by stream derivation and run manifests.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace swd {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// -----------------------------------------------------------------------------
// Error taxonomy. Everything derived from validation_error is a caller mistake
// (bad parameters, dimension mismatch, violated precondition) and maps to CLI
// exit code 2; resource/convergence failures are runtime errors (exit code 1).

class validation_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class dimension_error : public validation_error {
 public:
  using validation_error::validation_error;
};

class parameter_error : public validation_error {
 public:
  using validation_error::validation_error;
};

class precondition_error : public validation_error {
 public:
  using validation_error::validation_error;
};

class resource_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class convergence_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw precondition_error(msg);
}

inline void require_dims(bool cond, const std::string& msg) {
  if (!cond) throw dimension_error(msg);
}

inline void require_param(bool cond, const std::string& msg) {
  if (!cond) throw parameter_error(msg);
}

// -----------------------------------------------------------------------------
// Standard normal kernels. norm_cdf goes through erfc, which is accurate to a
// few ulp over the whole real line.

inline double norm_pdf(double t) { return kInvSqrt2Pi * std::exp(-0.5 * t * t); }

inline double norm_cdf(double t) { return 0.5 * std::erfc(-t / kSqrt2); }

// Antiderivative of the normal CDF: int_{-inf}^{t} Phi = t*Phi(t) + phi(t).
inline double norm_cdf_integral(double t) {
  return t * norm_cdf(t) + norm_pdf(t);
}

// Second antiderivative of Phi: ((t^2+1)*Phi(t) + t*phi(t)) / 2.
inline double norm_cdf_integral2(double t) {
  return 0.5 * ((t * t + 1.0) * norm_cdf(t) + t * norm_pdf(t));
}

namespace detail {

// Tabulated Phi/phi with 4-point local Lagrange interpolation. Interpolation
// error is below 2e-13 on the covered range; outside [-8.6, 8.6] the exact
// tails round to 0/1 at double precision anyway.
class NormTable {
 public:
  static const NormTable& instance() {
    static const NormTable table;
    return table;
  }

  double cdf(double t) const { return interp(cdf_, t, t <= 0.0 ? 0.0 : 1.0); }
  double pdf(double t) const { return interp(pdf_, t, 0.0); }

  static constexpr double kLo = -8.6;
  static constexpr double kHi = 8.6;
  static constexpr int kCount = 17409;  // spacing ~9.88e-4

 private:
  NormTable() : cdf_(kCount), pdf_(kCount) {
    const double h = (kHi - kLo) / (kCount - 1);
    for (int i = 0; i < kCount; ++i) {
      const double t = kLo + h * i;
      cdf_[i] = norm_cdf(t);
      pdf_[i] = norm_pdf(t);
    }
    inv_h_ = 1.0 / h;
  }

  double interp(const std::vector<double>& y, double t, double clamp) const {
    if (t <= kLo || t >= kHi) return clamp;
    const double u = (t - kLo) * inv_h_;
    int i = static_cast<int>(u);
    i = std::clamp(i, 1, kCount - 3);
    const double s = u - i;
    const double w0 = -s * (s - 1.0) * (s - 2.0) * (1.0 / 6.0);
    const double w1 = (s + 1.0) * (s - 1.0) * (s - 2.0) * 0.5;
    const double w2 = -(s + 1.0) * s * (s - 2.0) * 0.5;
    const double w3 = (s + 1.0) * s * (s - 1.0) * (1.0 / 6.0);
    return w0 * y[i - 1] + w1 * y[i] + w2 * y[i + 1] + w3 * y[i + 2];
  }

  std::vector<double> cdf_, pdf_;
  double inv_h_ = 0.0;
};

}  // namespace detail

inline double norm_cdf_fast(double t) { return detail::NormTable::instance().cdf(t); }
inline double norm_pdf_fast(double t) { return detail::NormTable::instance().pdf(t); }

// -----------------------------------------------------------------------------
// Hashing / mixing. mix64 is the splitmix64 finalizer (full avalanche).

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

// -----------------------------------------------------------------------------
// Small statistics helpers shared by modules and tests.

inline double mean_of(const std::vector<double>& v) {
  require(!v.empty(), "mean_of: empty input");
  long double acc = 0.0L;
  for (double x : v) acc += x;
  return static_cast<double>(acc / static_cast<long double>(v.size()));
}

inline double sample_sd(const std::vector<double>& v) {
  require(v.size() >= 2, "sample_sd: need at least 2 values");
  const double mu = mean_of(v);
  long double acc = 0.0L;
  for (double x : v) acc += (x - mu) * (x - mu);
  return std::sqrt(static_cast<double>(acc / static_cast<long double>(v.size() - 1)));
}

inline double median_of(std::vector<double> v) {
  require(!v.empty(), "median_of: empty input");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  double lo = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lo + hi);
}

// Two-sample Kolmogorov-Smirnov sup-distance between empirical CDFs.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), "ks_distance: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

// Wilson score half-width for a binomial proportion (z defaults to 95%).
inline double wilson_half_width(std::size_t successes, std::size_t trials,
                                double z = 1.959963984540054) {
  require(trials >= 1, "wilson_half_width: trials must be >= 1");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  return z / (1.0 + z2 / n) *
         std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double max_abs_residual = 0.0;
};

// Ordinary least squares y = intercept + slope*x.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), "fit_line: size mismatch");
  require(x.size() >= 2, "fit_line: need at least 2 points");
  const std::size_t k = x.size();
  const double xbar = mean_of(x);
  const double ybar = mean_of(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (x[i] - xbar) * (x[i] - xbar);
    sxy += (x[i] - xbar) * (y[i] - ybar);
  }
  require(sxx > 0.0, "fit_line: degenerate x grid");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  double rss = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    rss += r * r;
    fit.max_abs_residual = std::max(fit.max_abs_residual, std::abs(r));
  }
  if (k > 2) fit.slope_se = std::sqrt(rss / static_cast<double>(k - 2) / sxx);
  return fit;
}

// Shortest round-trip decimal representation; locale-independent.
inline std::string format_double(double v) {
  std::array<char, 40> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

}  // namespace swd
