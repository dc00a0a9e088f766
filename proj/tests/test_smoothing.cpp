#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <vector>

#include "swd/smoothing.hpp"
#include "test_helpers.hpp"

using namespace swd;
using swd_test::PiecewiseLinearLip1;

namespace {

// Independent trapezoid oracle for E|Z|, Z ~ N(0,1).
double abs_moment_oracle() {
  const int n = 200000;
  const double lo = -10.0, hi = 10.0;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double y = lo + (hi - lo) * i / n;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    acc += w * std::abs(y) * norm_pdf(y);
  }
  return acc * (hi - lo) / n;
}

}  // namespace

TEST_CASE("convolution fixes linear functions", "[smoothing]") {
  const auto linear = [](double y) { return y; };
  for (double sigma : {0.25, 1.0, 3.0})
    REQUIRE(convolve_lipschitz_1d(linear, sigma, 2.0, 1e-9) ==
            Catch::Approx(2.0).margin(1e-8));
}

TEST_CASE("convolution of |y| at the kink equals E|Z|", "[smoothing]") {
  const auto absf = [](double y) { return std::abs(y); };
  const double expected = abs_moment_oracle();
  REQUIRE(expected == Catch::Approx(std::sqrt(2.0 / kPi)).margin(1e-9));
  REQUIRE(convolve_lipschitz_1d(absf, 1.0, 0.0, 1e-9) ==
          Catch::Approx(expected).margin(1e-8));
  // Far field: |y| behaves linearly 10 sigmas from the kink.
  REQUIRE(convolve_lipschitz_1d(absf, 1.0, 10.0, 1e-9) ==
          Catch::Approx(10.0).margin(1e-6));
}

TEST_CASE("quadrature failure reports the achieved error", "[smoothing]") {
  const auto absf = [](double y) { return std::abs(y); };
  REQUIRE_THROWS_AS(convolve_lipschitz_1d(absf, 1.0, 0.0, 1e-300), convergence_error);
  REQUIRE_THROWS_AS(convolve_lipschitz_1d(absf, 1.0, 0.0, 0.0), parameter_error);
  REQUIRE_THROWS_AS(convolve_lipschitz_1d(absf, 0.0, 0.0, 1e-9), parameter_error);
}

TEST_CASE("derivative bounds for smoothed Lipschitz functions", "[smoothing]") {
  const auto absf = [](double y) { return std::abs(y); };
  const auto linear = [](double y) { return y; };
  std::vector<double> grid;
  for (int k = -10; k <= 10; ++k) grid.push_back(0.3 * k);

  // First derivative of any smoothed 1-Lipschitz function is bounded by 1.
  REQUIRE(smoothed_derivative_max(absf, 1.0, 1, grid) <= 1.0 + 1e-3);
  // Second derivative is bounded by 1/sigma.
  REQUIRE(smoothed_derivative_max(absf, 0.5, 2, grid) <= 2.0 + 0.02);
  // Linear functions have vanishing curvature.
  REQUIRE(smoothed_derivative_max(linear, 1.0, 2, grid) <= 1e-6);

  REQUIRE_THROWS_AS(smoothed_derivative_max(absf, 1.0, 3, grid), parameter_error);
}

TEST_CASE("derivative bounds across sigma values and random Lip1 functions",
          "[smoothing]") {
  std::vector<double> grid;
  for (int k = -8; k <= 8; ++k) grid.push_back(0.5 * k);
  RngStream rng(2718);
  for (int i = 0; i < 3; ++i) {
    const PiecewiseLinearLip1 f(rng.child("lip", i));
    for (double sigma : {0.25, 0.5, 1.0}) {
      REQUIRE(smoothed_derivative_max(f, sigma, 1, grid) <= 1.0 + 1e-3);
      REQUIRE(smoothed_derivative_max(f, sigma, 2, grid) <= 1.0 / sigma + 0.02 / sigma);
    }
  }
}

TEST_CASE("envelope bound |f * phi_sigma| <= |x| + sigma", "[smoothing]") {
  RngStream rng(99);
  std::vector<std::function<double(double)>> fs;
  fs.emplace_back([](double y) { return std::abs(y); });
  fs.emplace_back([](double y) { return y; });
  for (int i = 0; i < 3; ++i) fs.emplace_back(PiecewiseLinearLip1(rng.child("f", i)));
  for (const auto& f : fs) {
    for (double sigma : {0.5, 1.0}) {
      for (int k = -10; k <= 10; ++k) {
        const double x = static_cast<double>(k);
        const double v = convolve_lipschitz_1d(f, sigma, x, 1e-9);
        REQUIRE(std::abs(v) <= std::abs(x) + sigma + 1e-8);
      }
    }
  }
}

TEST_CASE("smooth_sample adds the right amount of noise", "[smoothing]") {
  // Vanishing noise returns resampled input points.
  const auto mu = DiscreteMeasure::uniform({-1.0, 0.0, 2.0, 5.0}, 4, 1);
  const auto tiny = smooth_sample(mu, SmoothingConfig(1e-8, 1), RngStream(21));
  REQUIRE(tiny.size() == mu.size());
  for (std::size_t i = 0; i < tiny.size(); ++i) {
    double nearest = 1e300;
    for (std::size_t j = 0; j < mu.size(); ++j)
      nearest = std::min(nearest, std::abs(tiny.coord(i, 0) - mu.coord(j, 0)));
    REQUIRE(nearest < 1e-6);
  }

  // Point mass at the origin: output covariance is sigma^2 * I.
  const auto origin = DiscreteMeasure::point_mass({0.0, 0.0});
  const auto cloud = smooth_sample(origin, SmoothingConfig(1.0, 2), RngStream(22), 100000);
  double cov[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < cloud.size(); ++i)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) cov[a][b] += cloud.coord(i, a) * cloud.coord(i, b);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      cov[a][b] /= static_cast<double>(cloud.size());
      REQUIRE(std::abs(cov[a][b] - (a == b ? 1.0 : 0.0)) < 0.05);
    }

  REQUIRE_THROWS_AS(smooth_sample(cloud, SmoothingConfig(1.0, 3), RngStream(1)),
                    dimension_error);
}

TEST_CASE("smoothing trials are order-independent", "[smoothing]") {
  const auto mu = sample_model(ParametricModel::gaussian({0.0}, 1.0), 50, RngStream(5));
  RngStream root(400);
  std::vector<std::vector<double>> forward, backward(8);
  for (int t = 0; t < 8; ++t)
    forward.push_back(
        smooth_sample(mu, SmoothingConfig(0.5, 1), root.child("trial", t)).raw_points());
  for (int t = 7; t >= 0; --t)
    backward[t] =
        smooth_sample(mu, SmoothingConfig(0.5, 1), root.child("trial", t)).raw_points();
  REQUIRE(forward == backward);
}
