#include <doctest.h>

#include <cmath>

#include "nova/allocation.hpp"
#include "nova/error.hpp"
#include "nova/lp.hpp"
#include "nova/rng.hpp"

using namespace nova;

namespace {

// Best vertex: floors plus the whole residual to one client.
double vertex_max(const std::vector<double>& w, const SlotConstraint& c) {
  double best = -1e300;
  const auto& p = c.peaks();
  const auto& lo = c.r_min();
  double res = c.residual_share();
  for (std::size_t j = 0; j < w.size(); ++j) {
    double obj = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) obj += w[i] * (lo[i] + (i == j ? res * p[i] : 0.0));
    best = std::max(best, obj);
  }
  return best;
}

double share(const std::vector<double>& r, const std::vector<double>& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += r[i] / p[i];
  return s;
}

}  // namespace

TEST_CASE("solve_rnova_linear follows the vertex rule") {
  auto a = solve_rnova_linear({1, 2}, SlotConstraint::linear({10, 4}, 0.0));
  CHECK(a.r == std::vector<double>{10, 0});
  CHECK(a.objective == 10);

  auto b = solve_rnova_linear({0, 0}, SlotConstraint::linear({10, 4}, std::vector<double>{1, 1}));
  CHECK(b.r[1] == 1);
  CHECK(b.r[0] == doctest::Approx(1 + 10 * (1 - 0.1 - 0.25)));

  auto c = solve_rnova_linear({1, 1, 1}, SlotConstraint::linear({5, 10, 2}, std::vector<double>{0.1, 0.1, 0.1}));
  CHECK(c.r[0] == 0.1);
  CHECK(c.r[2] == 0.1);
  CHECK(c.r[1] > 0.1);
  CHECK(share(c.r, {5, 10, 2}) == doctest::Approx(1.0));

  CHECK_THROWS_AS(solve_rnova_linear({1, 1}, SlotConstraint::linear({1, 1}, std::vector<double>{0.6, 0.6})), Error);
}

TEST_CASE("solve_rnova_linear matches vertex enumeration and the LP") {
  Rng rng(11);
  for (int t = 0; t < 100; ++t) {
    std::size_t n = 1 + rng.index(4);
    std::vector<double> w(n), p(n), lo(n);
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = rng.uniform(0, 3);
      p[i] = rng.uniform(1, 100);
      lo[i] = rng.uniform(0, 0.2 / n) * p[i];
    }
    auto c = SlotConstraint::linear(p, lo);
    auto a = solve_rnova_linear(w, c);
    CHECK(a.objective == doctest::Approx(vertex_max(w, c)).epsilon(1e-9));
    CHECK(share(a.r, p) <= 1 + 1e-9);
    for (std::size_t i = 0; i < n; ++i) CHECK(a.r[i] >= lo[i]);

    // LP over the excess above the floors
    std::vector<std::vector<double>> A(1, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) A[0][i] = 1.0 / p[i];
    auto lp = lp_maximize(w, A, {c.residual_share()});
    double floor_obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) floor_obj += w[i] * lo[i];
    REQUIRE(lp.status == LpStatus::Optimal);
    CHECK(a.objective == doctest::Approx(lp.value + floor_obj).epsilon(1e-9));

    auto scaled = w;
    for (auto& x : scaled) x *= 3.7;
    CHECK(solve_rnova_linear(scaled, c).r == a.r);

    auto up = w;
    up[rng.index(n)] += 1.0;
    CHECK(solve_rnova_linear(up, c).objective >= a.objective);
  }
}

TEST_CASE("solve_rnova_convex") {
  SUBCASE("interval") {
    auto c = SlotConstraint::convex(
        1, [](const std::vector<double>& r) { return r[0] - 5; },
        [](const std::vector<double>&) { return std::vector<double>{1}; }, {0.1});
    auto a = solve_rnova_convex({1}, c);
    CHECK(a.alloc.r[0] == doctest::Approx(5).epsilon(1e-7));
  }
  SUBCASE("disc") {
    auto c = SlotConstraint::convex(
        2, [](const std::vector<double>& r) { return r[0] * r[0] + r[1] * r[1] - 1; },
        [](const std::vector<double>& r) { return std::vector<double>{2 * r[0], 2 * r[1]}; }, {0, 0});
    auto a = solve_rnova_convex({1, 1}, c);
    CHECK(a.alloc.r[0] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
    CHECK(a.alloc.r[1] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
    CHECK(a.kkt_residual <= 1e-7);
    double best = 0;
    for (double x = 0; x <= 1; x += 1e-3) best = std::max(best, x + std::sqrt(std::max(1 - x * x, 0.0)));
    CHECK(a.alloc.objective >= best - 1e-6);
  }
  SUBCASE("power-sum constraint with uneven weights") {
    // separable, so the optimum follows from a scalar search on the multiplier
    std::vector<double> w{2.13e-5, 3.58e-5, 1.03e-4, 6.49e-4, 7.98e-4, 1.95e-4, 3.81e-5, 7.65e-4};
    std::vector<double> pk{2180, 1940, 7540, 11700, 16400, 12700, 5390, 8000};
    std::vector<double> lo{85.1, 0, 282, 427, 666, 0, 0, 273};
    const double e = 2.041;
    auto c = SlotConstraint::convex(
        8,
        [=](const std::vector<double>& r) {
          double s = -1;
          for (std::size_t i = 0; i < 8; ++i) s += std::pow(std::max(r[i], 0.0) / pk[i], e);
          return s;
        },
        [=](const std::vector<double>& r) {
          std::vector<double> g(8);
          for (std::size_t i = 0; i < 8; ++i) g[i] = e * std::pow(std::max(r[i], 0.0) / pk[i], e - 1) / pk[i];
          return g;
        },
        lo);
    auto alloc_at = [&](double chi) {
      std::vector<double> r(8);
      for (std::size_t i = 0; i < 8; ++i) r[i] = std::max(lo[i], pk[i] * std::pow(w[i] * pk[i] / (chi * e), 1 / (e - 1)));
      return r;
    };
    double a = 1e-12, b = 1e6;
    for (int k = 0; k < 200; ++k) {
      double mid = std::sqrt(a * b);
      (c.eval(alloc_at(mid)) > 0 ? a : b) = mid;
    }
    auto expect = alloc_at(b);
    auto got = solve_rnova_convex(w, c);
    CHECK(got.kkt_residual <= 1e-7);
    for (std::size_t i = 0; i < 8; ++i) CHECK(got.alloc.r[i] == doctest::Approx(expect[i]).epsilon(1e-6));
  }
  SUBCASE("linear instances agree with the closed form") {
    Rng rng(5);
    for (int t = 0; t < 100; ++t) {
      std::size_t n = 1 + rng.index(4);
      std::vector<double> w(n), p(n), lo(n);
      for (std::size_t i = 0; i < n; ++i) {
        w[i] = rng.uniform(0.1, 3);
        p[i] = rng.uniform(1, 100);
        lo[i] = rng.uniform(0, 0.2 / n) * p[i];
      }
      auto lin = SlotConstraint::linear(p, lo);
      auto cv = SlotConstraint::convex(
          n, [lin](const std::vector<double>& r) { return lin.eval(r); },
          [lin](const std::vector<double>& r) { return lin.gradient(r); }, lo);
      auto a = solve_rnova_convex(w, cv);
      CHECK(a.alloc.objective == doctest::Approx(solve_rnova_linear(w, lin).objective).epsilon(1e-6));
      CHECK(a.kkt_residual <= 1e-7);
    }
  }
}

TEST_CASE("solve_rnova_discrete") {
  CHECK(solve_rnova_discrete({1, 2}, {{10, 0}, {0, 4}}).r == std::vector<double>{10, 0});
  CHECK(solve_rnova_discrete({1, 2}, {{3, 3}}).r == std::vector<double>{3, 3});
  CHECK(solve_rnova_discrete({1, 1}, {{2, 0}, {0, 2}, {1, 1}}).r == std::vector<double>{2, 0});
  CHECK_THROWS_AS(solve_rnova_discrete({1}, {}), Error);
}

TEST_CASE("solve_shared merges video and data weights") {
  auto pf = [](double rho) { return 1.0 / rho; };
  auto a = solve_shared({1}, {5}, pf, 2.0, SlotConstraint::linear({10, 10}, 0.0));
  CHECK(a.r == std::vector<double>{10, 0});
  auto b = solve_shared({1}, {5}, pf, 1e-12, SlotConstraint::linear({10, 10}, 0.0));
  CHECK(b.r == std::vector<double>{0, 10});
  auto c = solve_shared({}, {1, 4}, pf, 1.0, SlotConstraint::linear({4, 4}, 0.0));
  CHECK(c.r == std::vector<double>{4, 0});
}

TEST_CASE("solve_pf") {
  CHECK(solve_pf({1, 1}, SlotConstraint::linear({10, 4}, 0.0)).r == std::vector<double>{10, 0});
  CHECK(solve_pf({10, 1}, SlotConstraint::linear({10, 4}, 0.0)).r == std::vector<double>{0, 4});
  CHECK(solve_pf({2, 1}, SlotConstraint::linear({8, 4}, 0.0)).r == std::vector<double>{8, 0});
}

TEST_CASE("solve_rnova_gc sums per-subresource allocations") {
  auto a = solve_rnova_gc({1, 2}, {SlotConstraint::linear({10, 4}, 0.0), SlotConstraint::linear({2, 8}, 0.0)});
  CHECK(a.r == std::vector<double>{10, 8});
  auto one = SlotConstraint::linear({3, 7}, 0.0);
  CHECK(solve_rnova_gc({2, 1}, {one}).r == solve_rnova_linear({2, 1}, one).r);
  auto z = solve_rnova_gc({0, 0}, {SlotConstraint::linear({10, 4}, 0.0)});
  CHECK(z.r == std::vector<double>{10, 0});
}

TEST_CASE("update_ewma") {
  CHECK(update_ewma(0, 10, 0.01) == doctest::Approx(0.1));
  CHECK(update_ewma(3, 3, 0.2) == 3);
  CHECK(update_ewma(3, 9, 1.0) == 9);
}
