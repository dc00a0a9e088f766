#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "swd/measures.hpp"

using namespace swd;

namespace {

// Independent series oracle for the standard normal CDF (Maclaurin series of
// the error integral), good to ~1e-15 for |x| <= 2.
double phi_series(double x) {
  double term = x;
  double sum = x;
  for (int k = 1; k < 60; ++k) {
    term *= -x * x / (2.0 * k) * (2.0 * k - 1.0) / (2.0 * k + 1.0);
    sum += term;
  }
  return 0.5 + kInvSqrt2Pi * sum;
}

}  // namespace

TEST_CASE("DiscreteMeasure validates its invariants", "[measures]") {
  REQUIRE_THROWS_AS(DiscreteMeasure({0.0}, 1, 1, {0.5}), precondition_error);
  REQUIRE_THROWS_AS(DiscreteMeasure({0.0, 1.0}, 2, 1, {1.5, -0.5}), precondition_error);
  REQUIRE_THROWS_AS(
      DiscreteMeasure({std::numeric_limits<double>::infinity()}, 1, 1, {1.0}),
      precondition_error);
  REQUIRE_THROWS_AS(DiscreteMeasure::uniform({}, 0, 1), precondition_error);

  const auto mu = DiscreteMeasure::uniform({0.0, 1.0, 2.0}, 3, 1);
  REQUIRE(mu.size() == 3);
  REQUIRE(mu.dim() == 1);
  REQUIRE(mu.has_uniform_weights());
}

TEST_CASE("sample_model matches law-of-large-numbers bands", "[measures]") {
  const auto model = ParametricModel::gaussian({0.0}, 1.0);
  const auto sample = sample_model(model, 1000, RngStream(11));
  double mean = 0.0, var = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) mean += sample.coord(i, 0);
  mean /= 1000.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double c = sample.coord(i, 0) - mean;
    var += c * c;
  }
  var /= 999.0;
  REQUIRE(std::abs(mean) < 0.1);
  REQUIRE(std::abs(var - 1.0) < 0.15);

  // Mixture mean: 0.5*0 + 0.5*1 = 0.5.
  const auto mix = ParametricModel::mixture({{0.5, {0.0}, 1.0}, {0.5, {1.0}, 1.0}});
  const auto big = sample_model(mix, 100000, RngStream(12));
  double mix_mean = 0.0;
  for (std::size_t i = 0; i < big.size(); ++i) mix_mean += big.coord(i, 0);
  mix_mean /= 100000.0;
  REQUIRE(std::abs(mix_mean - 0.5) < 0.02);

  REQUIRE_THROWS_AS(sample_model(model, 0, RngStream(1)), precondition_error);
}

TEST_CASE("model parameter validation", "[measures]") {
  REQUIRE_THROWS_AS(ParametricModel::gaussian({0.0}, 0.0), parameter_error);
  REQUIRE_THROWS_AS(ParametricModel::gaussian({0.0}, -1.0), parameter_error);
  REQUIRE_THROWS_AS(ParametricModel::diag_gaussian({0.0, 0.0}, {1.0, 0.0}),
                    parameter_error);
  REQUIRE_THROWS_AS(ParametricModel::mixture({{0.7, {0.0}, 1.0}, {0.7, {1.0}, 1.0}}),
                    parameter_error);
  REQUIRE_THROWS_AS(ParametricModel::mixture({{1.2, {0.0}, 1.0}, {-0.2, {1.0}, 1.0}}),
                    parameter_error);
}

TEST_CASE("theta round-trips losslessly through flatten/unflatten", "[measures]") {
  RngStream rng(555);
  const auto gauss = ParametricModel::gaussian({0.3, -1.2}, 0.8);
  const auto diag = ParametricModel::diag_gaussian({0.1, 0.2, 0.3}, {1.0, 2.0, 0.5});
  const auto mix = ParametricModel::mixture({{0.3, {-1.0}, 1.0}, {0.7, {2.0}, 0.5}});
  const auto scale_only = ParametricModel::gaussian({0.0, 0.0}, 1.5,
                                                    ThetaLayout::scale_only);
  for (const auto& model : {gauss, diag, mix, scale_only}) {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> theta(model.theta_dim());
      for (double& t : theta) t = 0.2 + rng.uniform();
      const auto rebuilt = model.with_theta(theta);
      REQUIRE(rebuilt.theta() == theta);
    }
    REQUIRE(model.with_theta(model.theta()).theta() == model.theta());
  }
}

TEST_CASE("resample_bootstrap degenerate and structural cases", "[measures]") {
  const auto single = DiscreteMeasure::point_mass({3.5});
  const auto boot = resample_bootstrap(single, RngStream(5));
  REQUIRE(boot.size() == 1);
  REQUIRE(boot.coord(0, 0) == 3.5);

  const auto mu = sample_model(ParametricModel::gaussian({0.0}, 1.0), 1000, RngStream(6));
  const auto re = resample_bootstrap(mu, RngStream(7));
  REQUIRE(re.weights() == mu.weights());

  const auto skew = DiscreteMeasure({0.0, 1.0}, 2, 1, {0.3, 0.7});
  REQUIRE_THROWS_AS(resample_bootstrap(skew, RngStream(8)), precondition_error);
}

TEST_CASE("resample_bootstrap hits exact multinomial frequencies", "[measures]") {
  const auto mu = DiscreteMeasure::uniform({0.0, 1.0}, 2, 1);
  int counts[4] = {0, 0, 0, 0};
  const int runs = 10000;
  for (int s = 0; s < runs; ++s) {
    const auto b = resample_bootstrap(mu, RngStream(1000 + s));
    const int code = (b.coord(0, 0) > 0.5 ? 2 : 0) + (b.coord(1, 0) > 0.5 ? 1 : 0);
    ++counts[code];
  }
  for (int c = 0; c < 4; ++c)
    REQUIRE(std::abs(counts[c] / static_cast<double>(runs) - 0.25) < 0.02);
}

TEST_CASE("smoothed_cdf_1d closed forms", "[measures]") {
  const Source delta0{DiscreteMeasure::point_mass({0.0})};
  REQUIRE(smoothed_cdf_1d(delta0, 1.0, 0.0) == Catch::Approx(0.5).margin(1e-15));

  const Source gauss{ParametricModel::gaussian({0.0}, 1.0)};
  REQUIRE(smoothed_cdf_1d(gauss, 1.0, 0.0) == Catch::Approx(0.5).margin(1e-15));

  // Phi(1) against the independent series oracle.
  const double expected = phi_series(1.0);
  REQUIRE(smoothed_cdf_1d(delta0, 1.0, 1.0) == Catch::Approx(expected).margin(1e-12));
  REQUIRE(expected == Catch::Approx(0.841344746068543).margin(1e-12));

  const Source multi{DiscreteMeasure::uniform({0.0, 0.0, 1.0, 1.0}, 2, 2)};
  REQUIRE_THROWS_AS(smoothed_cdf_1d(multi, 1.0, 0.0), dimension_error);
  REQUIRE_THROWS_AS(smoothed_cdf_1d(delta0, 0.0, 0.0), parameter_error);
}

TEST_CASE("smoothed CDF is monotone with proper limits", "[measures]") {
  const auto mix = ParametricModel::mixture({{0.4, {-1.0}, 0.5}, {0.6, {2.0}, 1.5}});
  const Source src{mix};
  double prev = -1.0;
  for (int k = 0; k <= 200; ++k) {
    const double x = -12.0 + 24.0 * k / 200.0;
    const double f = smoothed_cdf_1d(src, 0.7, x);
    REQUIRE(f >= prev - 1e-12);
    REQUIRE(f >= 0.0);
    REQUIRE(f <= 1.0);
    prev = f;
  }
  REQUIRE(smoothed_cdf_1d(src, 0.7, -60.0) == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(smoothed_cdf_1d(src, 0.7, 60.0) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("empirical smoothed CDF converges to the model CDF", "[measures]") {
  const auto model = ParametricModel::gaussian({0.0}, 1.0);
  const std::size_t n = 10000;
  const auto data = sample_model(model, n, RngStream(77));
  const Source empirical{data};
  const Source truth{model};
  const double band = 3.0 / std::sqrt(static_cast<double>(n));
  for (double x : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
    const double gap =
        std::abs(smoothed_cdf_1d(empirical, 1.0, x) - smoothed_cdf_1d(truth, 1.0, x));
    REQUIRE(gap < band);
  }
}

TEST_CASE("sampling is bit-identical across reruns", "[measures]") {
  const auto model = ParametricModel::diag_gaussian({0.0, 1.0}, {1.0, 2.0});
  const auto a = sample_model(model, 500, RngStream(42).child("data", 3));
  const auto b = sample_model(model, 500, RngStream(42).child("data", 3));
  REQUIRE(a.raw_points() == b.raw_points());
}

TEST_CASE("uniform box sampling and smoothing support", "[measures]") {
  const UniformBox box({0.0}, {1.0});
  const auto sample = sample_uniform_box(box, 2000, RngStream(9));
  for (std::size_t i = 0; i < sample.size(); ++i) {
    REQUIRE(sample.coord(i, 0) >= 0.0);
    REQUIRE(sample.coord(i, 0) < 1.0);
  }
  // Smoothed CDF at the midpoint is 1/2 by symmetry.
  REQUIRE(smoothed_cdf_1d(Source{box}, 0.3, 0.5) == Catch::Approx(0.5).margin(1e-12));
  REQUIRE_THROWS_AS(UniformBox({1.0}, {1.0}), parameter_error);
}

TEST_CASE("ThetaSpace validation and projection", "[measures]") {
  REQUIRE_THROWS_AS(ThetaSpace({0.0}, {0.0}), precondition_error);
  REQUIRE_THROWS_AS(ThetaSpace({0.0, 1.0}, {1.0}), precondition_error);
  const ThetaSpace box({-1.0, 0.5}, {1.0, 2.0});
  const auto p = box.project({5.0, -3.0});
  REQUIRE(p == std::vector<double>{1.0, 0.5});
  REQUIRE(box.contains(p));
  REQUIRE(!box.strictly_contains(p));
}
