#include <doctest.h>

#include "nova/error.hpp"
#include "nova/qr_model.hpp"
#include "nova/rng.hpp"

using namespace nova;

namespace {

QrTradeoff two_knot() { return QrTradeoff({{0, 0.1e6}, {100, 1.5e6}}, 100); }
QrTradeoff three_knot() { return QrTradeoff({{0, 0.1e6}, {40, 0.2e6}, {100, 1.5e6}}, 100); }

bool has(const std::vector<ViolationReport>& v, TradeoffViolation k) {
  for (const auto& r : v)
    if (r.kind == k) return true;
  return false;
}

}  // namespace

TEST_CASE("eval_rate at knots and between them") {
  CHECK(eval_rate(two_knot(), 0) == 0.1e6);
  CHECK(eval_rate(two_knot(), 50) == doctest::Approx(0.8e6).epsilon(1e-12));
  CHECK(eval_rate(three_knot(), 70) == doctest::Approx(0.85e6).epsilon(1e-12));
  CHECK(eval_rate(three_knot(), 40) == 0.2e6);
  CHECK(eval_rate(three_knot(), 100) == 1.5e6);
}

TEST_CASE("eval_rate_derivative uses right slopes and the left slope at the top") {
  CHECK(eval_rate_derivative(two_knot(), 50) == doctest::Approx(14000));
  CHECK(eval_rate_derivative(three_knot(), 10) == doctest::Approx(2500));
  CHECK(eval_rate_derivative(two_knot(), 100) == doctest::Approx(14000));
  CHECK(eval_rate_derivative(three_knot(), 40) == doctest::Approx(1.3e6 / 60));
  auto sg = three_knot().subgradient(40);
  CHECK(sg.first == doctest::Approx(2500));
  CHECK(sg.second == doctest::Approx(1.3e6 / 60));
}

TEST_CASE("out-of-domain qualities are rejected unless the tradeoff spans the full range") {
  QrTradeoff partial({{10, 0.1e6}, {60, 0.5e6}}, 100);
  CHECK_THROWS_AS(eval_rate(partial, 5), Error);
  CHECK_THROWS_AS(eval_rate(partial, 70), Error);
  CHECK_THROWS_AS(eval_rate(two_knot(), 101), Error);
  CHECK_THROWS_AS(eval_rate(two_knot(), -1), Error);
}

TEST_CASE("validate_tradeoff reports structural violations") {
  CHECK(validate_tradeoff(QrTradeoff({{0, 0.1e6}, {50, 0.5e6}, {100, 1.5e6}}, 100)).empty());
  CHECK(has(validate_tradeoff(QrTradeoff({{0, 0.1e6}, {50, 1.0e6}, {100, 1.5e6}}, 100)), TradeoffViolation::NotConvex));
  CHECK(has(validate_tradeoff(QrTradeoff({{0, 0.0}}, 100)), TradeoffViolation::NonPositiveFloor));
  CHECK(has(validate_tradeoff(QrTradeoff({{0, 0.1e6}, {50, 0.05e6}}, 100)), TradeoffViolation::NotIncreasingRate));
}

TEST_CASE("random tradeoffs are increasing and convex") {
  Rng rng(7);
  for (int t = 0; t < 200; ++t) {
    std::vector<QrPoint> pts{{0, rng.uniform(1e4, 1e5)}};
    double slope = rng.uniform(100, 1000);
    for (int k = 1; k <= 5; ++k) {
      slope *= rng.uniform(1.0, 2.0);
      double q = 20.0 * k;
      pts.push_back({q, pts.back().rate + slope * 20.0});
    }
    QrTradeoff f(pts, 100);
    REQUIRE(validate_tradeoff(f).empty());
    for (const auto& p : pts) CHECK(eval_rate(f, p.q) == p.rate);
    double q1 = rng.uniform(0, 100), q2 = rng.uniform(0, 100), a = rng.uniform();
    if (q1 > q2) std::swap(q1, q2);
    if (q1 < q2) {
      CHECK(eval_rate(f, q1) < eval_rate(f, q2));
      CHECK(eval_rate_derivative(f, q1) <= eval_rate_derivative(f, q2));
    }
    CHECK(eval_rate(f, a * q1 + (1 - a) * q2) <= a * eval_rate(f, q1) + (1 - a) * eval_rate(f, q2) + 1e-6);
  }
}
