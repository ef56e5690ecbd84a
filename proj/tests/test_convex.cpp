#include <doctest.h>

#include <cmath>

#include "nova/convex.hpp"
#include "nova/lp.hpp"

using namespace nova;

TEST_CASE("interior point solves a box-constrained concave quadratic") {
  cvx::Program p;
  p.n = 2;
  p.objective = [](const cvx::Vec& z, cvx::Vec* g, cvx::Mat* h) {
    double v = -(z(0) - 3) * (z(0) - 3) - (z(1) + 1) * (z(1) + 1);
    if (g) *g = cvx::Vec{{-2 * (z(0) - 3), -2 * (z(1) + 1)}};
    if (h) *h = -2 * cvx::Mat::Identity(2, 2);
    return v;
  };
  p.A = cvx::Mat{{1, 0}, {0, -1}};
  p.b = cvx::Vec{{2, 0}};
  auto r = cvx::maximize(p, cvx::Vec::Zero(2));
  REQUIRE(r.converged);
  CHECK(r.z(0) == doctest::Approx(2).epsilon(1e-8));
  CHECK(std::abs(r.z(1)) < 1e-8);
  CHECK(r.lambda(0) == doctest::Approx(2).epsilon(1e-6));
  CHECK(r.lambda(1) == doctest::Approx(2).epsilon(1e-6));
}

TEST_CASE("interior point handles a nonlinear constraint") {
  cvx::Program p;
  p.n = 2;
  p.objective = [](const cvx::Vec& z, cvx::Vec* g, cvx::Mat* h) {
    if (g) *g = cvx::Vec{{1, 1}};
    if (h) *h = cvx::Mat::Zero(2, 2);
    return z(0) + z(1);
  };
  p.A = cvx::Mat(0, 2);
  p.b = cvx::Vec(0);
  p.nonlinear.push_back([](const cvx::Vec& z, cvx::Vec* g, cvx::Mat* h) {
    if (g) *g = 2 * z;
    if (h) *h = 2 * cvx::Mat::Identity(2, 2);
    return z.squaredNorm() - 1;
  });
  auto r = cvx::maximize(p, cvx::Vec::Zero(2));
  REQUIRE(r.converged);
  CHECK(r.z(0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-7));
  CHECK(r.z(1) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-7));
}

TEST_CASE("simplex statuses") {
  auto opt = lp_maximize({3, 2}, {{1, 1}, {1, 3}}, {4, 6});
  REQUIRE(opt.status == LpStatus::Optimal);
  CHECK(opt.value == doctest::Approx(12));
  CHECK(lp_maximize({1}, {{1}, {-1}}, {1, -2}).status == LpStatus::Infeasible);
  CHECK(lp_maximize({1, 1}, {{1, -1}}, {1}).status == LpStatus::Unbounded);
  auto neg = lp_maximize({-1, -1}, {{-1, -1}}, {-2});
  REQUIRE(neg.status == LpStatus::Optimal);
  CHECK(neg.value == doctest::Approx(-2));
}
