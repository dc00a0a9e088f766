#pragma once

// Measure representations and parametric model families.
//
// DiscreteMeasure is a weighted point cloud in R^d and carries empirical
// measures, bootstrap resamples and Monte-Carlo plug-ins. ParametricModel
// covers the sampleable families (isotropic Gaussian, diagonal Gaussian,
// Gaussian mixture) with closed-form one-dimensional smoothed CDFs.
// UniformBox is a compactly supported auxiliary law used by the
// concentration experiments.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "swd/common.hpp"
#include "swd/rng.hpp"

namespace swd {

class DiscreteMeasure {
 public:
  // Row-major points (n x d) with explicit weights.
  DiscreteMeasure(std::vector<double> points, std::size_t n, std::size_t d,
                  std::vector<double> weights)
      : points_(std::move(points)), weights_(std::move(weights)), n_(n), d_(d) {
    validate();
  }

  // Equal-weight point cloud.
  static DiscreteMeasure uniform(std::vector<double> points, std::size_t n,
                                 std::size_t d) {
    std::vector<double> w(n, n > 0 ? 1.0 / static_cast<double>(n) : 0.0);
    return DiscreteMeasure(std::move(points), n, d, std::move(w));
  }

  static DiscreteMeasure point_mass(std::vector<double> point) {
    const std::size_t d = point.size();
    return uniform(std::move(point), 1, d);
  }

  std::size_t size() const { return n_; }
  std::size_t dim() const { return d_; }

  std::span<const double> point(std::size_t i) const {
    return {points_.data() + i * d_, d_};
  }
  double coord(std::size_t i, std::size_t k) const { return points_[i * d_ + k]; }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& raw_points() const { return points_; }

  bool has_uniform_weights(double tol = 1e-12) const {
    const double w = 1.0 / static_cast<double>(n_);
    for (double wi : weights_)
      if (std::abs(wi - w) > tol) return false;
    return true;
  }

  DiscreteMeasure shifted(double a) const {
    std::vector<double> pts = points_;
    for (double& c : pts) c += a;
    return DiscreteMeasure(pts, n_, d_, weights_);
  }

 private:
  void validate() const {
    require(n_ >= 1, "DiscreteMeasure: need at least one point");
    require(d_ >= 1, "DiscreteMeasure: dimension must be >= 1");
    require(points_.size() == n_ * d_, "DiscreteMeasure: point buffer size mismatch");
    require(weights_.size() == n_, "DiscreteMeasure: weight count mismatch");
    long double total = 0.0L;
    for (double w : weights_) {
      require(w >= 0.0, "DiscreteMeasure: weights must be nonnegative");
      total += w;
    }
    require(std::abs(static_cast<double>(total) - 1.0) <= 1e-12,
            "DiscreteMeasure: weights must sum to 1");
    for (double c : points_)
      require(std::isfinite(c), "DiscreteMeasure: coordinates must be finite");
  }

  std::vector<double> points_;
  std::vector<double> weights_;
  std::size_t n_;
  std::size_t d_;
};

// Compact parameter box Theta.
struct ThetaSpace {
  std::vector<double> lower;
  std::vector<double> upper;

  ThetaSpace(std::vector<double> lo, std::vector<double> hi)
      : lower(std::move(lo)), upper(std::move(hi)) {
    require(lower.size() == upper.size(), "ThetaSpace: bound size mismatch");
    require(!lower.empty(), "ThetaSpace: dimension must be >= 1");
    for (std::size_t i = 0; i < lower.size(); ++i)
      require(lower[i] < upper[i], "ThetaSpace: lower bound must be < upper bound");
  }

  std::size_t dim() const { return lower.size(); }
  double width(std::size_t i) const { return upper[i] - lower[i]; }

  bool contains(std::span<const double> theta) const {
    if (theta.size() != dim()) return false;
    for (std::size_t i = 0; i < dim(); ++i)
      if (theta[i] < lower[i] || theta[i] > upper[i]) return false;
    return true;
  }

  bool strictly_contains(std::span<const double> theta) const {
    if (theta.size() != dim()) return false;
    for (std::size_t i = 0; i < dim(); ++i)
      if (theta[i] <= lower[i] || theta[i] >= upper[i]) return false;
    return true;
  }

  std::vector<double> project(std::vector<double> theta) const {
    require_dims(theta.size() == dim(), "ThetaSpace: theta dimension mismatch");
    for (std::size_t i = 0; i < dim(); ++i)
      theta[i] = std::clamp(theta[i], lower[i], upper[i]);
    return theta;
  }

  std::vector<double> center() const {
    std::vector<double> c(dim());
    for (std::size_t i = 0; i < dim(); ++i) c[i] = 0.5 * (lower[i] + upper[i]);
    return c;
  }
};

enum class Family { gaussian, diag_gaussian, gaussian_mixture };

// Which coordinates of the family the fit parameter vector theta addresses.
// Mixtures expose their component means (weights and scales are structural);
// scale_only freezes the Gaussian mean, matching variance-parameter studies.
enum class ThetaLayout { mean_and_scale, scale_only, mean_and_scales, means_only };

struct MixtureComponent {
  double weight;
  std::vector<double> mean;
  double scale;
};

class ParametricModel {
 public:
  static ParametricModel gaussian(std::vector<double> mean, double scale,
                                  ThetaLayout layout = ThetaLayout::mean_and_scale) {
    ParametricModel m;
    m.family_ = Family::gaussian;
    m.mean_ = std::move(mean);
    m.scales_ = {scale};
    m.layout_ = layout;
    m.validate();
    return m;
  }

  static ParametricModel diag_gaussian(std::vector<double> mean,
                                       std::vector<double> scales) {
    ParametricModel m;
    m.family_ = Family::diag_gaussian;
    m.mean_ = std::move(mean);
    m.scales_ = std::move(scales);
    m.layout_ = ThetaLayout::mean_and_scales;
    m.validate();
    return m;
  }

  static ParametricModel mixture(std::vector<MixtureComponent> components) {
    ParametricModel m;
    m.family_ = Family::gaussian_mixture;
    m.components_ = std::move(components);
    m.layout_ = ThetaLayout::means_only;
    m.validate();
    return m;
  }

  Family family() const { return family_; }
  ThetaLayout layout() const { return layout_; }

  std::size_t dim() const {
    if (family_ == Family::gaussian_mixture) return components_.front().mean.size();
    return mean_.size();
  }

  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& scales() const { return scales_; }
  const std::vector<MixtureComponent>& components() const { return components_; }

  // Flattened fit parameter vector under the model's layout.
  std::vector<double> theta() const {
    switch (layout_) {
      case ThetaLayout::mean_and_scale: {
        std::vector<double> t = mean_;
        t.push_back(scales_[0]);
        return t;
      }
      case ThetaLayout::scale_only:
        return {scales_[0]};
      case ThetaLayout::mean_and_scales: {
        std::vector<double> t = mean_;
        t.insert(t.end(), scales_.begin(), scales_.end());
        return t;
      }
      case ThetaLayout::means_only: {
        std::vector<double> t;
        for (const auto& c : components_) t.insert(t.end(), c.mean.begin(), c.mean.end());
        return t;
      }
    }
    throw parameter_error("ParametricModel: unknown layout");
  }

  std::size_t theta_dim() const {
    switch (layout_) {
      case ThetaLayout::mean_and_scale:
        return dim() + 1;
      case ThetaLayout::scale_only:
        return 1;
      case ThetaLayout::mean_and_scales:
        return 2 * dim();
      case ThetaLayout::means_only:
        return components_.size() * dim();
    }
    throw parameter_error("ParametricModel: unknown layout");
  }

  // Same family/layout with a new fit parameter vector.
  ParametricModel with_theta(std::span<const double> theta) const {
    require_dims(theta.size() == theta_dim(),
                 "ParametricModel: theta dimension mismatch");
    ParametricModel m = *this;
    switch (layout_) {
      case ThetaLayout::mean_and_scale:
        m.mean_.assign(theta.begin(), theta.end() - 1);
        m.scales_ = {theta.back()};
        break;
      case ThetaLayout::scale_only:
        m.scales_ = {theta[0]};
        break;
      case ThetaLayout::mean_and_scales: {
        const std::size_t d = dim();
        m.mean_.assign(theta.begin(), theta.begin() + d);
        m.scales_.assign(theta.begin() + d, theta.end());
        break;
      }
      case ThetaLayout::means_only: {
        const std::size_t d = dim();
        for (std::size_t c = 0; c < m.components_.size(); ++c)
          m.components_[c].mean.assign(theta.begin() + c * d,
                                       theta.begin() + (c + 1) * d);
        break;
      }
    }
    m.validate();
    return m;
  }

  // CDF of (model * N(0, sigma^2)) at x; d = 1 only.
  double smoothed_cdf(double sigma, double x) const {
    require_dims(dim() == 1, "smoothed_cdf: model must be one-dimensional");
    require_param(sigma > 0.0, "smoothed_cdf: sigma must be > 0");
    if (family_ == Family::gaussian_mixture) {
      double acc = 0.0;
      for (const auto& c : components_) {
        const double s = std::sqrt(c.scale * c.scale + sigma * sigma);
        acc += c.weight * norm_cdf((x - c.mean[0]) / s);
      }
      return acc;
    }
    const double s = std::sqrt(scales_[0] * scales_[0] + sigma * sigma);
    return norm_cdf((x - mean_[0]) / s);
  }

  // Probability of the axis-aligned box [lo, hi); diagonal structure only.
  double box_probability(std::span<const double> lo, std::span<const double> hi) const {
    const std::size_t d = dim();
    require_dims(lo.size() == d && hi.size() == d,
                 "box_probability: bound dimension mismatch");
    if (family_ == Family::gaussian_mixture) {
      double acc = 0.0;
      for (const auto& c : components_) {
        double p = c.weight;
        for (std::size_t k = 0; k < d && p > 0.0; ++k)
          p *= norm_cdf((hi[k] - c.mean[k]) / c.scale) -
               norm_cdf((lo[k] - c.mean[k]) / c.scale);
        acc += std::max(p, 0.0);
      }
      return acc;
    }
    double p = 1.0;
    for (std::size_t k = 0; k < d && p > 0.0; ++k) {
      const double s = family_ == Family::diag_gaussian ? scales_[k] : scales_[0];
      p *= norm_cdf((hi[k] - mean_[k]) / s) - norm_cdf((lo[k] - mean_[k]) / s);
    }
    return std::max(p, 0.0);
  }

  // One i.i.d. draw appended to `out`.
  void sample_point(RngStream& rng, std::vector<double>& out) const {
    const std::size_t d = dim();
    switch (family_) {
      case Family::gaussian:
        for (std::size_t k = 0; k < d; ++k)
          out.push_back(mean_[k] + scales_[0] * rng.normal());
        break;
      case Family::diag_gaussian:
        for (std::size_t k = 0; k < d; ++k)
          out.push_back(mean_[k] + scales_[k] * rng.normal());
        break;
      case Family::gaussian_mixture: {
        const std::size_t c = pick_component(rng.uniform());
        for (std::size_t k = 0; k < d; ++k)
          out.push_back(components_[c].mean[k] + components_[c].scale * rng.normal());
        break;
      }
    }
  }

  std::size_t pick_component(double u) const {
    double acc = 0.0;
    for (std::size_t c = 0; c + 1 < components_.size(); ++c) {
      acc += components_[c].weight;
      if (u < acc) return c;
    }
    return components_.size() - 1;
  }

 private:
  ParametricModel() = default;

  void validate() const {
    if (family_ == Family::gaussian_mixture) {
      require_param(!components_.empty(), "mixture: need at least one component");
      const std::size_t d = components_.front().mean.size();
      require_param(d >= 1, "mixture: component dimension must be >= 1");
      long double total = 0.0L;
      for (const auto& c : components_) {
        require_param(c.weight >= 0.0, "mixture: weights must be nonnegative");
        require_param(c.scale > 0.0, "mixture: scales must be > 0");
        require_param(c.mean.size() == d, "mixture: inconsistent component dimension");
        total += c.weight;
      }
      require_param(std::abs(static_cast<double>(total) - 1.0) <= 1e-12,
                    "mixture: weights must sum to 1");
      require_param(layout_ == ThetaLayout::means_only,
                    "mixture: only the means are fit parameters");
      return;
    }
    require_param(!mean_.empty(), "model: dimension must be >= 1");
    if (family_ == Family::gaussian) {
      require_param(scales_.size() == 1, "gaussian: single scale expected");
      require_param(layout_ == ThetaLayout::mean_and_scale ||
                        layout_ == ThetaLayout::scale_only,
                    "gaussian: unsupported theta layout");
    } else {
      require_param(scales_.size() == mean_.size(),
                    "diag_gaussian: one scale per dimension expected");
      require_param(layout_ == ThetaLayout::mean_and_scales,
                    "diag_gaussian: unsupported theta layout");
    }
    for (double s : scales_) require_param(s > 0.0, "model: scales must be > 0");
  }

  Family family_ = Family::gaussian;
  std::vector<double> mean_;
  std::vector<double> scales_;
  std::vector<MixtureComponent> components_;
  ThetaLayout layout_ = ThetaLayout::mean_and_scale;
};

// Axis-aligned uniform law; compact support for concentration experiments.
struct UniformBox {
  std::vector<double> lo;
  std::vector<double> hi;

  UniformBox(std::vector<double> l, std::vector<double> h)
      : lo(std::move(l)), hi(std::move(h)) {
    require_param(lo.size() == hi.size() && !lo.empty(), "UniformBox: bad bounds");
    for (std::size_t i = 0; i < lo.size(); ++i)
      require_param(lo[i] < hi[i], "UniformBox: lo must be < hi");
  }

  std::size_t dim() const { return lo.size(); }

  double diameter() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) acc += (hi[i] - lo[i]) * (hi[i] - lo[i]);
    return std::sqrt(acc);
  }
};

using Source = std::variant<DiscreteMeasure, ParametricModel, UniformBox>;

inline std::size_t source_dim(const Source& s) {
  return std::visit([](const auto& v) { return v.dim(); }, s);
}

// -----------------------------------------------------------------------------
// Operations.

// n equal-weight i.i.d. draws from the model; deterministic given rng.
inline DiscreteMeasure sample_model(const ParametricModel& model, std::size_t n,
                                    RngStream rng) {
  require(n >= 1, "sample_model: n must be >= 1");
  std::vector<double> pts;
  pts.reserve(n * model.dim());
  for (std::size_t i = 0; i < n; ++i) model.sample_point(rng, pts);
  return DiscreteMeasure::uniform(std::move(pts), n, model.dim());
}

inline DiscreteMeasure sample_uniform_box(const UniformBox& box, std::size_t n,
                                          RngStream rng) {
  require(n >= 1, "sample_uniform_box: n must be >= 1");
  const std::size_t d = box.dim();
  std::vector<double> pts;
  pts.reserve(n * d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k)
      pts.push_back(box.lo[k] + (box.hi[k] - box.lo[k]) * rng.uniform());
  return DiscreteMeasure::uniform(std::move(pts), n, d);
}

// n i.i.d. draws from a source (weighted resample for discrete sources).
inline DiscreteMeasure sample_source(const Source& src, std::size_t n, RngStream rng) {
  if (const auto* model = std::get_if<ParametricModel>(&src))
    return sample_model(*model, n, rng);
  if (const auto* box = std::get_if<UniformBox>(&src))
    return sample_uniform_box(*box, n, rng);
  const auto& mu = std::get<DiscreteMeasure>(src);
  require(n >= 1, "sample_source: n must be >= 1");
  const std::size_t d = mu.dim();
  std::vector<double> pts;
  pts.reserve(n * d);
  const bool uniform_w = mu.has_uniform_weights();
  // Cumulative weights for the non-uniform case.
  std::vector<double> cum;
  if (!uniform_w) {
    cum.resize(mu.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      acc += mu.weight(i);
      cum[i] = acc;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t idx;
    if (uniform_w) {
      idx = rng.uniform_index(mu.size());
    } else {
      const double u = rng.uniform();
      idx = static_cast<std::size_t>(
          std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
      if (idx >= mu.size()) idx = mu.size() - 1;
    }
    const auto p = mu.point(idx);
    pts.insert(pts.end(), p.begin(), p.end());
  }
  return DiscreteMeasure::uniform(std::move(pts), n, d);
}

// n equal-weight draws with replacement from mu's points.
inline DiscreteMeasure resample_bootstrap(const DiscreteMeasure& mu, RngStream rng) {
  require(mu.has_uniform_weights(),
          "resample_bootstrap: input must have uniform weights");
  const std::size_t n = mu.size();
  const std::size_t d = mu.dim();
  std::vector<double> pts;
  pts.reserve(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = mu.point(rng.uniform_index(n));
    pts.insert(pts.end(), p.begin(), p.end());
  }
  return DiscreteMeasure::uniform(std::move(pts), n, d);
}

// CDF of (source * N(0, sigma^2)) at x for one-dimensional sources.
inline double smoothed_cdf_1d(const Source& src, double sigma, double x) {
  require_dims(source_dim(src) == 1, "smoothed_cdf_1d: source must be one-dimensional");
  require_param(sigma > 0.0, "smoothed_cdf_1d: sigma must be > 0");
  if (const auto* model = std::get_if<ParametricModel>(&src))
    return model->smoothed_cdf(sigma, x);
  if (const auto* box = std::get_if<UniformBox>(&src)) {
    const double a = box->lo[0], b = box->hi[0];
    return sigma / (b - a) *
           (norm_cdf_integral((x - a) / sigma) - norm_cdf_integral((x - b) / sigma));
  }
  const auto& mu = std::get<DiscreteMeasure>(src);
  double acc = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    acc += mu.weight(i) * norm_cdf((x - mu.coord(i, 0)) / sigma);
  return acc;
}

}  // namespace swd
