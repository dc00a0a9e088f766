#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "swd/distance.hpp"

using namespace swd;

namespace {

DiscreteMeasure random_1d(std::size_t n, RngStream rng, double spread = 2.0) {
  std::vector<double> pts(n);
  for (double& p : pts) p = spread * rng.normal();
  return DiscreteMeasure::uniform(std::move(pts), n, 1);
}

// Bisection inverse of the standard normal CDF; test-only.
double norm_quantile(double u) {
  double lo = -10.0, hi = 10.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (norm_cdf(mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Quantile-coupling quadrature oracle for W1 between two 1-D Gaussians.
double gaussian_w1_oracle(double m1, double s1, double m2, double s2) {
  const int k = 20000;
  double acc = 0.0;
  for (int i = 0; i < k; ++i) {
    const double u = (i + 0.5) / k;
    const double z = norm_quantile(u);
    acc += std::abs((m1 + s1 * z) - (m2 + s2 * z));
  }
  return acc / k;
}

}  // namespace

TEST_CASE("swd_1d_exact analytic identities", "[distance]") {
  const Source gauss{ParametricModel::gaussian({0.0}, 1.0)};
  const Source shifted{ParametricModel::gaussian({1.0}, 1.0)};
  const Source delta{DiscreteMeasure::point_mass({0.0})};

  // Identity.
  REQUIRE(swd_1d_exact(gauss, gauss, 1.0).value == Catch::Approx(0.0).margin(1e-8));
  // Translation by 1.
  REQUIRE(swd_1d_exact(gauss, shifted, 1.0).value == Catch::Approx(1.0).margin(1e-6));
  // Point mass vs standard Gaussian at sigma = 1: W1(N(0,1), N(0,2)).
  const double expected = gaussian_w1_oracle(0.0, 1.0, 0.0, kSqrt2);
  REQUIRE(expected ==
          Catch::Approx((kSqrt2 - 1.0) * std::sqrt(2.0 / kPi)).margin(1e-6));
  REQUIRE(swd_1d_exact(delta, gauss, 1.0).value == Catch::Approx(expected).margin(1e-5));

  const auto est = swd_1d_exact(gauss, shifted, 1.0);
  REQUIRE(est.method == SwdMethod::exact1d);
  REQUIRE(est.std_error == 0.0);
  REQUIRE(est.m == 0);
}

TEST_CASE("swd_1d_exact input validation", "[distance]") {
  const Source gauss{ParametricModel::gaussian({0.0}, 1.0)};
  const Source flat{DiscreteMeasure::uniform({0.0, 0.0, 1.0, 1.0}, 2, 2)};
  REQUIRE_THROWS_AS(swd_1d_exact(flat, gauss, 1.0), dimension_error);
  REQUIRE_THROWS_AS(swd_1d_exact(gauss, gauss, 0.0), parameter_error);
  REQUIRE_THROWS_AS(swd_1d_exact(gauss, gauss, 1.0, 0.0), parameter_error);
}

TEST_CASE("translation equivariance of the exact 1-D distance", "[distance]") {
  RngStream rng(7070);
  const auto base = random_1d(40, rng.child("base"));
  for (double a : {0.5, 1.0, 2.0}) {
    const double v = swd_1d_exact(Source(base), Source(base.shifted(a)), 1.0).value;
    REQUIRE(v == Catch::Approx(a).margin(1e-6));
  }
}

TEST_CASE("contraction: SWD below W1 and within the 2 sigma gap", "[distance]") {
  RngStream root(1234);
  const double sigma = 0.5;
  for (int rep = 0; rep < 50; ++rep) {
    RngStream sub = root.child("pair", rep);
    const std::size_t n = 3 + sub.uniform_index(30);
    const auto mu = random_1d(n, sub.child("mu"));
    const auto nu = random_1d(n, sub.child("nu"));
    const double w1 = solve_w1_1d_sorted(mu, nu);
    const double swd = swd_1d_exact(Source(mu), Source(nu), sigma).value;
    REQUIRE(swd <= w1 + 1e-6);
    REQUIRE(std::abs(w1 - swd) <= 2.0 * sigma + 1e-6);
  }
}

TEST_CASE("exact 1-D distance is a metric on seeded triples", "[distance]") {
  RngStream root(5150);
  const double sigma = 0.8;
  for (int rep = 0; rep < 50; ++rep) {
    RngStream sub = root.child("triple", rep);
    const auto a = random_1d(12, sub.child("a"));
    const auto b = random_1d(15, sub.child("b"));
    const auto c = random_1d(9, sub.child("c"));
    const double ab = swd_1d_exact(Source(a), Source(b), sigma).value;
    const double ba = swd_1d_exact(Source(b), Source(a), sigma).value;
    const double ac = swd_1d_exact(Source(a), Source(c), sigma).value;
    const double cb = swd_1d_exact(Source(c), Source(b), sigma).value;
    REQUIRE(std::abs(ab - ba) < 1e-9);
    REQUIRE(ab <= ac + cb + 1e-8);
  }
}

TEST_CASE("exact 1-D distance matches a fine-grid quadrature oracle", "[distance]") {
  // Independent route: Simpson integration of |F_P - F_Q| on a dense grid
  // with direct erfc evaluation (no tables, no root finding).
  RngStream root(24601);
  for (int rep = 0; rep < 8; ++rep) {
    RngStream sub = root.child("inst", rep);
    const std::size_t n = 5 + sub.uniform_index(60);
    const std::size_t m = 5 + sub.uniform_index(60);
    const double sigma = 0.3 + sub.uniform();

    auto draw = [&](std::size_t count, RngStream r) {
      std::vector<double> pts(count), w(count);
      double total = 0.0;
      for (double& p : pts) p = 2.0 * r.normal();
      for (double& v : w) total += (v = 0.05 + r.uniform());
      for (double& v : w) v /= total;
      return DiscreteMeasure(std::move(pts), count, 1, std::move(w));
    };
    const DiscreteMeasure mu = draw(n, sub.child("mu"));
    const DiscreteMeasure nu = draw(m, sub.child("nu"));
    const Source P{mu}, Q{nu};

    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < n; ++i) {
      lo = std::min(lo, mu.coord(i, 0) - 9.0 * sigma);
      hi = std::max(hi, mu.coord(i, 0) + 9.0 * sigma);
    }
    for (std::size_t j = 0; j < m; ++j) {
      lo = std::min(lo, nu.coord(j, 0) - 9.0 * sigma);
      hi = std::max(hi, nu.coord(j, 0) + 9.0 * sigma);
    }
    const int grid = 40000;
    const double step = (hi - lo) / grid;
    long double oracle = 0.0L;
    for (int g = 0; g <= grid; ++g) {
      const double x = lo + step * g;
      const double gap =
          std::abs(smoothed_cdf_1d(P, sigma, x) - smoothed_cdf_1d(Q, sigma, x));
      const double weight = (g == 0 || g == grid) ? 1.0 : (g % 2 == 1 ? 4.0 : 2.0);
      oracle += weight * gap;
    }
    oracle *= step / 3.0;

    const double fast = swd_1d_exact(P, Q, sigma).value;
    REQUIRE(fast == Catch::Approx(static_cast<double>(oracle)).margin(1e-6));
  }
}

TEST_CASE("plug-in self-distance stays inside the bias band", "[distance]") {
  const Source p{ParametricModel::gaussian({0.0, 0.0}, 1.0)};
  McConfig cfg;
  cfg.m = 500;
  cfg.reps = 1;
  const auto est = swd_mc(p, p, 1.0, cfg, RngStream(31));
  REQUIRE(est.method == SwdMethod::mc_exact_ot);
  REQUIRE(est.m == 500);
  REQUIRE(est.value >= 0.0);
  // Pilot runs put the m=500 self-distance bias near 0.30 (seeds 1..5:
  // 0.29-0.33); the band leaves headroom above the pilot spread.
  REQUIRE(est.value < 0.4);
}

TEST_CASE("plug-in cross-checks the exact 1-D value", "[distance]") {
  const Source p{ParametricModel::gaussian({0.0}, 1.0)};
  const Source q{ParametricModel::gaussian({1.0}, 1.0)};
  McConfig cfg;
  cfg.m = 2000;
  cfg.reps = 20;
  const auto mc = swd_mc(p, q, 1.0, cfg, RngStream(808));
  const double exact = swd_1d_exact(p, q, 1.0).value;
  REQUIRE(std::abs(mc.value - exact) <= 3.0 * mc.std_error + 0.05);
  REQUIRE(mc.std_error > 0.0);
  REQUIRE(mc.replications == 20);
}

TEST_CASE("plug-in preconditions and determinism", "[distance]") {
  const Source p{ParametricModel::gaussian({0.0}, 1.0)};
  McConfig bad;
  bad.m = 1;
  REQUIRE_THROWS_AS(swd_mc(p, p, 1.0, bad, RngStream(1)), precondition_error);

  McConfig cfg;
  cfg.m = 200;
  cfg.reps = 4;
  const auto a = swd_mc(p, p, 1.0, cfg, RngStream(9).child("est"));
  const auto b = swd_mc(p, p, 1.0, cfg, RngStream(9).child("est"));
  REQUIRE(a.value == b.value);
  REQUIRE(a.std_error == b.std_error);

  // Scheduling independence: more worker threads, same estimate.
  McConfig threaded = cfg;
  threaded.threads = 8;
  const auto c = swd_mc(p, p, 1.0, threaded, RngStream(9).child("est"));
  REQUIRE(c.value == a.value);
}

TEST_CASE("sinkhorn-backed plug-in works in d=2", "[distance]") {
  const Source p{ParametricModel::gaussian({0.0, 0.0}, 1.0)};
  const Source q{ParametricModel::gaussian({2.0, 0.0}, 1.0)};
  McConfig cfg;
  cfg.m = 300;
  cfg.reps = 2;
  cfg.solver = SolverChoice::sinkhorn;
  cfg.sinkhorn_epsilon = 0.05;
  const auto est = swd_mc(p, q, 1.0, cfg, RngStream(77));
  REQUIRE(est.method == SwdMethod::mc_sinkhorn);
  REQUIRE(est.value == Catch::Approx(2.0).margin(0.5));
}

TEST_CASE("estimator dispatch picks exact in 1-D and MC otherwise", "[distance]") {
  EstimatorConfig cfg;
  cfg.mc.m = 100;
  const Source p1{ParametricModel::gaussian({0.0}, 1.0)};
  const Source p2{ParametricModel::gaussian({0.0, 0.0}, 1.0)};
  REQUIRE(swd_estimate(p1, p1, 1.0, cfg, RngStream(1)).method == SwdMethod::exact1d);
  REQUIRE(swd_estimate(p2, p2, 1.0, cfg, RngStream(1)).method == SwdMethod::mc_exact_ot);
  cfg.kind = EstimatorConfig::Kind::exact1d;
  REQUIRE_THROWS_AS(swd_estimate(p2, p2, 1.0, cfg, RngStream(1)), dimension_error);
}

TEST_CASE("donsker_bound converges for Gaussian sources", "[distance]") {
  const Source p{ParametricModel::gaussian({0.0}, 1.0)};
  const auto bound = donsker_bound(p, 1.0);
  REQUIRE(bound.converged);
  REQUIRE(bound.value > 0.0);
  REQUIRE(std::isfinite(bound.value));
  // Frozen regression constant from the summation itself.
  REQUIRE(bound.value == Catch::Approx(3.874188745647388).margin(1e-9));

  // d = 1: the sigma prefactor power is floor(1/2) = 0.
  const auto half = donsker_bound(p, 0.5);
  REQUIRE(half.value == Catch::Approx(bound.value).epsilon(1e-12));
}

TEST_CASE("donsker_bound sigma prefactor scales exactly in d=2", "[distance]") {
  const Source p{ParametricModel::gaussian({0.0, 0.0}, 1.0)};
  const auto full = donsker_bound(p, 1.0);
  const auto half = donsker_bound(p, 0.5);
  REQUIRE(full.converged);
  REQUIRE(half.converged);
  REQUIRE(half.value == Catch::Approx(2.0 * full.value).epsilon(1e-12));
}

TEST_CASE("donsker_bound point mass reduces to a single cube", "[distance]") {
  const Source delta{DiscreteMeasure::point_mass({0.0})};
  const auto bound = donsker_bound(delta, 1.0);
  REQUIRE(bound.converged);
  // Mass sits in [0,1): M = sup ||x|| over the cube = 1, P = 1.
  REQUIRE(bound.value == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("donsker_bound exact values for the unit box", "[distance]") {
  // Uniform on [0,1]^2 occupies exactly one lattice cube: M = sqrt(2), P = 1.
  const Source box{UniformBox({0.0, 0.0}, {1.0, 1.0})};
  REQUIRE(donsker_bound(box, 1.0).value == Catch::Approx(kSqrt2).epsilon(1e-12));
  REQUIRE(donsker_bound(box, 0.5).value ==
          Catch::Approx(2.0 * kSqrt2).epsilon(1e-12));

  const Source diag{ParametricModel::diag_gaussian({0.0, 0.0}, {1.0, 2.0})};
  const auto b = donsker_bound(diag, 1.0);
  REQUIRE(b.converged);
  REQUIRE(b.value > 0.0);
}

TEST_CASE("donsker_bound covers sources concentrated away from the origin",
          "[distance]") {
  // Leading shells are empty; the sum must keep going until the mass is found.
  const Source far_gauss{ParametricModel::gaussian({30.0}, 1.0)};
  const auto bound = donsker_bound(far_gauss, 1.0);
  REQUIRE(bound.converged);
  REQUIRE(bound.shells >= 30);
  REQUIRE(bound.value > 25.0);
  REQUIRE(bound.value < 100.0);
}

TEST_CASE("donsker_bound parameter validation", "[distance]") {
  const Source p{ParametricModel::gaussian({0.0}, 1.0)};
  REQUIRE_THROWS_AS(donsker_bound(p, 0.0), parameter_error);
  REQUIRE_THROWS_AS(donsker_bound(p, 1.0, 0.0), parameter_error);
  REQUIRE_THROWS_AS(donsker_bound(p, 1.0, 1.0, 0.0), parameter_error);
}
