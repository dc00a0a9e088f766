#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "swd/measures.hpp"
#include "swd/rng.hpp"
#include "swd/transport.hpp"

using namespace swd;

namespace {

DiscreteMeasure random_cloud(std::size_t n, std::size_t d, RngStream rng,
                             double spread = 2.0) {
  std::vector<double> pts(n * d);
  for (double& p : pts) p = spread * rng.normal();
  return DiscreteMeasure::uniform(std::move(pts), n, d);
}

void check_plan_feasibility(const TransportPlan& plan, const DiscreteMeasure& mu,
                            const DiscreteMeasure& nu) {
  REQUIRE(plan.n == mu.size());
  REQUIRE(plan.m == nu.size());
  double recomputed = 0.0;
  for (std::size_t i = 0; i < plan.n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < plan.m; ++j) {
      const double f = plan.at(i, j);
      REQUIRE(f >= 0.0);
      row += f;
      double dist = 0.0;
      for (std::size_t k = 0; k < mu.dim(); ++k) {
        const double t = mu.coord(i, k) - nu.coord(j, k);
        dist += t * t;
      }
      recomputed += f * std::sqrt(dist);
    }
    REQUIRE(row == Catch::Approx(mu.weight(i)).margin(1e-9));
  }
  for (std::size_t j = 0; j < plan.m; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < plan.n; ++i) col += plan.at(i, j);
    REQUIRE(col == Catch::Approx(nu.weight(j)).margin(1e-9));
  }
  REQUIRE(recomputed == Catch::Approx(plan.cost).margin(1e-9));
}

}  // namespace

TEST_CASE("exact solver on forced and identity couplings", "[transport]") {
  const auto d0 = DiscreteMeasure::point_mass({0.0});
  const auto d3 = DiscreteMeasure::point_mass({3.0});
  const auto plan = solve_w1_exact(d0, d3);
  REQUIRE(plan.cost == Catch::Approx(3.0).margin(1e-12));
  check_plan_feasibility(plan, d0, d3);

  const auto pair = DiscreteMeasure::uniform({0.0, 1.0}, 2, 1);
  REQUIRE(solve_w1_exact(pair, pair).cost == Catch::Approx(0.0).margin(1e-12));

  const auto a = DiscreteMeasure::uniform({0.0, 2.0}, 2, 1);
  const auto b = DiscreteMeasure::uniform({1.0, 3.0}, 2, 1);
  REQUIRE(solve_w1_exact(a, b).cost == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(brute_force_w1(a, b) == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(solve_w1_1d_sorted(a, b) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("brute force preconditions and single-pair case", "[transport]") {
  const auto x = DiscreteMeasure::point_mass({0.0, 0.0});
  const auto y = DiscreteMeasure::point_mass({3.0, 4.0});
  REQUIRE(brute_force_w1(x, y) == Catch::Approx(5.0).margin(1e-12));

  RngStream rng(3);
  const auto big = random_cloud(9, 1, rng.child("big"));
  REQUIRE_THROWS_AS(brute_force_w1(big, big), precondition_error);
  const auto five = random_cloud(5, 1, rng.child("five"));
  const auto six = random_cloud(6, 1, rng.child("six"));
  REQUIRE_THROWS_AS(brute_force_w1(five, six), precondition_error);
}

TEST_CASE("oracle equivalence: simplex vs permutation brute force", "[transport]") {
  RngStream root(2026);
  int trial = 0;
  for (std::size_t d : {1u, 2u, 5u}) {
    for (int rep = 0; rep < 67; ++rep, ++trial) {
      RngStream sub = root.child("oracle", trial);
      const std::size_t n = 2 + sub.uniform_index(5);  // n = m in [2, 6]
      const auto mu = random_cloud(n, d, sub.child("mu"));
      const auto nu = random_cloud(n, d, sub.child("nu"));
      const auto plan = solve_w1_exact(mu, nu);
      const double oracle = brute_force_w1(mu, nu);
      REQUIRE(plan.cost == Catch::Approx(oracle).margin(1e-10));
      check_plan_feasibility(plan, mu, nu);
    }
  }
}

TEST_CASE("1-D consistency: sorted coupling equals the simplex", "[transport]") {
  RngStream root(515);
  for (int rep = 0; rep < 100; ++rep) {
    RngStream sub = root.child("oned", rep);
    const std::size_t n = 2 + sub.uniform_index(30);
    const auto mu = random_cloud(n, 1, sub.child("mu"), 3.0);
    const auto nu = random_cloud(n, 1, sub.child("nu"), 3.0);
    REQUIRE(solve_w1_exact(mu, nu).cost ==
            Catch::Approx(solve_w1_1d_sorted(mu, nu)).margin(1e-10));
  }
}

TEST_CASE("exact solver handles unequal sizes and weights", "[transport]") {
  RngStream root(88);
  for (int rep = 0; rep < 25; ++rep) {
    RngStream sub = root.child("uneven", rep);
    const std::size_t n = 2 + sub.uniform_index(7);
    const std::size_t m = 2 + sub.uniform_index(9);
    auto mu_pts = random_cloud(n, 2, sub.child("mu")).raw_points();
    auto nu_pts = random_cloud(m, 2, sub.child("nu")).raw_points();
    std::vector<double> wa(n), wb(m);
    double sa = 0, sb = 0;
    for (double& w : wa) sa += (w = 0.1 + sub.uniform());
    for (double& w : wb) sb += (w = 0.1 + sub.uniform());
    for (double& w : wa) w /= sa;
    for (double& w : wb) w /= sb;
    const DiscreteMeasure mu(mu_pts, n, 2, wa);
    const DiscreteMeasure nu(nu_pts, m, 2, wb);
    const auto plan = solve_w1_exact(mu, nu);
    check_plan_feasibility(plan, mu, nu);
  }
}

TEST_CASE("metric axioms hold on seeded triples", "[transport]") {
  RngStream root(909);
  for (int rep = 0; rep < 100; ++rep) {
    RngStream sub = root.child("triple", rep);
    const std::size_t n = 2 + sub.uniform_index(8);
    const auto a = random_cloud(n, 2, sub.child("a"));
    const auto b = random_cloud(n, 2, sub.child("b"));
    const auto c = random_cloud(n, 2, sub.child("c"));
    const double ab = solve_w1_exact(a, b).cost;
    const double ba = solve_w1_exact(b, a).cost;
    const double ac = solve_w1_exact(a, c).cost;
    const double cb = solve_w1_exact(c, b).cost;
    REQUIRE(std::abs(ab - ba) < 1e-9);
    REQUIRE(solve_w1_exact(a, a).cost == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(ab <= ac + cb + 1e-9);
  }
}

TEST_CASE("dimension mismatch and entry cap are rejected", "[transport]") {
  const auto one = DiscreteMeasure::point_mass({0.0});
  const auto two = DiscreteMeasure::point_mass({0.0, 0.0});
  REQUIRE_THROWS_AS(solve_w1_exact(one, two), dimension_error);

  RngStream rng(4);
  const auto mu = random_cloud(40, 1, rng.child("mu"));
  const auto nu = random_cloud(40, 1, rng.child("nu"));
  ExactSolverOptions opt;
  opt.max_entries = 100;
  REQUIRE_THROWS_AS(solve_w1_exact(mu, nu, opt), resource_error);
}

TEST_CASE("plans stay feasible under duplicate atoms and skewed weights",
          "[transport]") {
  RngStream root(31337);
  for (int rep = 0; rep < 120; ++rep) {
    RngStream sub = root.child("fuzz", rep);
    const std::size_t n = 2 + sub.uniform_index(7);
    const std::size_t m = 2 + sub.uniform_index(7);
    const std::size_t d = 1 + sub.uniform_index(3);
    const std::size_t pool = 1 + sub.uniform_index(4);
    std::vector<double> atoms(pool * d);
    for (double& a : atoms) a = 2.0 * sub.normal();
    auto draw_points = [&](std::size_t count) {
      std::vector<double> pts(count * d);
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t k = sub.uniform_index(pool);
        for (std::size_t t = 0; t < d; ++t) pts[i * d + t] = atoms[k * d + t];
      }
      return pts;
    };
    auto draw_weights = [&](std::size_t count) {
      std::vector<double> w(count);
      double total = 0;
      for (double& v : w) total += (v = std::pow(10.0, -12.0 * sub.uniform()));
      for (double& v : w) v /= total;
      return w;
    };
    const DiscreteMeasure mu(draw_points(n), n, d, draw_weights(n));
    const DiscreteMeasure nu(draw_points(m), m, d, draw_weights(m));
    check_plan_feasibility(solve_w1_exact(mu, nu), mu, nu);
  }
}

TEST_CASE("sinkhorn approximates the exact cost for small epsilon", "[transport]") {
  const auto a = DiscreteMeasure::uniform({0.0, 2.0}, 2, 1);
  const auto b = DiscreteMeasure::uniform({1.0, 3.0}, 2, 1);

  const auto tight = sinkhorn_w1(a, b, 0.001);
  REQUIRE(tight.converged);
  REQUIRE(std::abs(tight.cost - 1.0) < 0.01);

  const auto self = sinkhorn_w1(a, a, 0.01);
  REQUIRE(self.cost < 0.05);

  // Large epsilon biases the cost away from the exact value.
  const auto loose = sinkhorn_w1(a, b, 10.0);
  REQUIRE(std::abs(loose.cost - 1.0) > std::abs(tight.cost - 1.0));

  REQUIRE_THROWS_AS(sinkhorn_w1(a, b, 0.0), parameter_error);
}

TEST_CASE("sinkhorn matches the simplex on random instances", "[transport]") {
  RngStream root(606);
  for (int rep = 0; rep < 5; ++rep) {
    RngStream sub = root.child("sink", rep);
    const auto mu = random_cloud(12, 2, sub.child("mu"));
    const auto nu = random_cloud(14, 2, sub.child("nu"));
    const double exact = solve_w1_exact(mu, nu).cost;
    const auto approx = sinkhorn_w1(mu, nu, 0.005, 20000);
    REQUIRE(approx.converged);
    REQUIRE(std::abs(approx.cost - exact) < 0.03 * (1.0 + exact));
  }

  // Non-uniform weights go through the same potentials.
  RngStream sub = root.child("weighted");
  auto pts_a = random_cloud(10, 2, sub.child("a")).raw_points();
  auto pts_b = random_cloud(13, 2, sub.child("b")).raw_points();
  std::vector<double> wa(10), wb(13);
  double sa = 0, sb = 0;
  for (double& w : wa) sa += (w = 0.2 + sub.uniform());
  for (double& w : wb) sb += (w = 0.2 + sub.uniform());
  for (double& w : wa) w /= sa;
  for (double& w : wb) w /= sb;
  const DiscreteMeasure mu(pts_a, 10, 2, wa);
  const DiscreteMeasure nu(pts_b, 13, 2, wb);
  const auto approx = sinkhorn_w1(mu, nu, 0.005, 20000);
  REQUIRE(approx.converged);
  REQUIRE(std::abs(approx.cost - solve_w1_exact(mu, nu).cost) < 0.05);
}

TEST_CASE("non-convergent sinkhorn is flagged", "[transport]") {
  const auto a = DiscreteMeasure::uniform({0.0, 2.0}, 2, 1);
  const auto b = DiscreteMeasure::uniform({1.0, 3.0}, 2, 1);
  const auto r = sinkhorn_w1(a, b, 0.001, 1);
  REQUIRE(!r.converged);
  REQUIRE(r.iterations == 1);
}
