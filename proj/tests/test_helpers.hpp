#pragma once

// Shared helpers for the test suites.

#include <algorithm>
#include <cmath>
#include <vector>

#include "swd/rng.hpp"

namespace swd_test {

// Random piecewise-linear function with slopes in [-1, 1] and f(0) = 0;
// 1-Lipschitz by construction.
class PiecewiseLinearLip1 {
 public:
  explicit PiecewiseLinearLip1(swd::RngStream rng, int knots = 9, double span = 12.0) {
    xs_.resize(knots);
    for (int k = 0; k < knots; ++k)
      xs_[k] = -span + 2.0 * span * static_cast<double>(k) / (knots - 1);
    slopes_.resize(knots + 1);
    for (double& s : slopes_) s = 2.0 * rng.uniform() - 1.0;
    ys_.assign(knots, 0.0);
    for (int k = 1; k < knots; ++k)
      ys_[k] = ys_[k - 1] + slopes_[k] * (xs_[k] - xs_[k - 1]);
    shift_ = (*this)(0.0);
  }

  double operator()(double x) const {
    double value;
    if (x <= xs_.front()) {
      value = ys_.front() + slopes_.front() * (x - xs_.front());
    } else if (x >= xs_.back()) {
      value = ys_.back() + slopes_.back() * (x - xs_.back());
    } else {
      const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
      const std::size_t k = static_cast<std::size_t>(it - xs_.begin());
      value = ys_[k - 1] + slopes_[k] * (x - xs_[k - 1]);
    }
    return value - shift_;
  }

 private:
  std::vector<double> xs_, ys_, slopes_;
  double shift_ = 0.0;
};

}  // namespace swd_test
