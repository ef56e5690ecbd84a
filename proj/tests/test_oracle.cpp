#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "nova/adaptation.hpp"
#include "nova/error.hpp"
#include "nova/oracle.hpp"

using namespace nova;

namespace {

constexpr double kTau = 0.01;

TradeoffPtr linear_f(double f0, double slope) {
  return std::make_shared<QrTradeoff>(QrTradeoff({{0, f0}, {100, f0 + 100 * slope}}, 100));
}

UtilitySpec util(double eta = 0.05) {
  UtilitySpec u;
  u.uv.eta = eta;
  return u;
}

StationaryModel one_client(std::vector<FlEntry> entries, double peak_bps) {
  StationaryModel m;
  m.tau_slot = kTau;
  m.constraints.push_back({SlotConstraint::linear({peak_bps * kTau}, 0.0), 1.0});
  m.clients.push_back({std::move(entries)});
  return m;
}

}  // namespace

TEST_CASE("ample capacity: a single tradeoff goes to the top of its domain") {
  auto m = one_client({{linear_f(1e5, 1e4), 1.0, 1.0, {}}}, 1e7);
  auto sol = solve_optstat(m, {Preferences{}}, {util()});
  CHECK(sol.clients[0].q[0] == doctest::Approx(100).epsilon(1e-7));
  CHECK(sol.value == doctest::Approx(100).epsilon(1e-7));
  CHECK(verify_kkt_optstat(sol, m, {Preferences{}}, {util()}).max() <= 1e-6);
}

TEST_CASE("binding capacity gives the closed-form quality") {
  // f(q) = 1e5 + 1e4 q, capacity 3e5 bps: q = 20
  auto m = one_client({{linear_f(1e5, 1e4), 1.0, 1.0, {}}}, 3e5);
  auto sol = solve_optstat(m, {Preferences{}}, {util()});
  CHECK(sol.clients[0].q[0] == doctest::Approx(20).epsilon(1e-7));
  CHECK(sol.clients[0].b == doctest::Approx(1e-4).epsilon(1e-6));

  // barely above the floor rate: quality pinned near zero
  auto tight = one_client({{linear_f(1e5, 1e4), 1.0, 1.0, {}}}, 1e5 * (1 + 1e-4));
  auto t = solve_optstat(tight, {Preferences{}}, {util()});
  CHECK(t.clients[0].q[0] == doctest::Approx(1e-3).epsilon(1e-6).scale(100));

  auto infeasible = one_client({{linear_f(1e5, 1e4), 1.0, 1.0, {}}}, 0.9e5);
  CHECK_THROWS_AS(solve_optstat(infeasible, {Preferences{}}, {util()}), Error);
}

TEST_CASE("hand-built certificate has zero residual") {
  auto m = one_client({{linear_f(1e5, 1e4), 1.0, 1.0, {}}}, 3e5);
  OptstatSolution sol;
  OracleClient c;
  c.q = {20};
  c.gamma = {0};
  c.gamma_bar = {0};
  c.b = 1e-4;
  c.d = 0;
  sol.clients = {c};
  sol.r = {{3e5 * kTau}};
  sol.chi = {1e-4 * 3e5 * kTau};
  sol.omega = {{0}};
  CHECK(verify_kkt_optstat(sol, m, {Preferences{}}, {util()}).max() <= 1e-9);
}

TEST_CASE("steeper tradeoff gets lower quality; grid brute force agrees") {
  auto fa = linear_f(1e5, 2e4), fb = linear_f(1e5, 5e3);
  auto m = one_client({{fa, 1.0, 0.5, {}}, {fb, 1.0, 0.5, {}}}, 8e5);
  auto u = util(0.02);
  auto sol = solve_optstat(m, {Preferences{}}, {u});
  double qa = sol.clients[0].q[0], qb = sol.clients[0].q[1];
  CHECK(qa <= qb);
  CHECK(verify_kkt_optstat(sol, m, {Preferences{}}, {u}).max() <= 1e-6);

  double best = -1e300;
  for (double a = 0; a <= 100; a += 1e-3) {
    // capacity binds: 0.5 fa(a) + 0.5 fb(b) = 8e5
    double bq = std::min(100.0, (1.6e6 - fa->rate(a) - 1e5) / 5e3);
    if (bq < 0) break;
    double mean = 0.5 * (a + bq), var = 0.25 * (a - bq) * (a - bq);
    best = std::max(best, mean - 0.02 * var);
  }
  CHECK(sol.value == doctest::Approx(best).epsilon(1e-6));

  auto bad = sol;
  bad.clients[0].q[0] += 5;
  CHECK(verify_kkt_optstat(bad, m, {Preferences{}}, {u}).max() > 1e-3);
}

TEST_CASE("keystone: stationary parameters reproduce the quality map through QNOVA") {
  auto fa = linear_f(1e5, 2e4);
  auto fb = std::make_shared<QrTradeoff>(QrTradeoff({{0, 1e5}, {30, 2e5}, {70, 6e5}, {100, 1.2e6}}, 100));
  StationaryModel m;
  m.tau_slot = kTau;
  m.constraints.push_back({SlotConstraint::linear({5e3, 9e3}, 0.0), 0.6});
  m.constraints.push_back({SlotConstraint::linear({1.2e4, 2e3}, 0.0), 0.4});
  m.clients.push_back({{{fa, 1.0, 0.3, {}}, {fb, 2.0, 0.7, {}}}});
  m.clients.push_back({{{fb, 1.0, 1.0, {}}}});
  Preferences capped;
  capped.p_d = 1e-5;
  capped.p_bar = 4.0;
  std::vector<Preferences> prefs{capped, Preferences{}};
  std::vector<UtilitySpec> u{util(), util()};
  auto sol = solve_optstat(m, prefs, u);
  CHECK(verify_kkt_optstat(sol, m, prefs, u).max() <= 1e-6);
  for (std::size_t i = 0; i < 2; ++i) {
    auto p = stationary_params(sol.clients[i], prefs[i], u[i]);
    for (std::size_t j = 0; j < m.clients[i].entries.size(); ++j)
      CHECK(std::abs(solve_qnova(p, u[i], *m.clients[i].entries[j].f).q - sol.clients[i].q[j]) <= 1e-6);
  }
  double dual = optstat_dual_bound(m, prefs, u, {sol.clients[0].b, sol.clients[1].b},
                                   {sol.clients[0].d, sol.clients[1].d});
  CHECK(dual >= sol.value - 1e-6);
  CHECK(dual - sol.value <= 1e-5 * std::abs(sol.value));
}

TEST_CASE("solve_opt_s") {
  auto f = linear_f(1e5, 1e4);
  auto g = linear_f(2e5, 3e4);
  SUBCASE("one segment, ample capacity") {
    OfflineInstance inst;
    inst.slots = {SlotConstraint::linear({1e5}, 0.0)};
    inst.videos = {{0, {{1, 1.0, f, {}}}}};
    auto s = solve_opt_s(inst, {Preferences{}}, {util()});
    ClientParams p;
    p.m = 100;
    p.mu = 100;
    p.b = 0;
    p.d = 0;
    CHECK(s.q[0][0] == doctest::Approx(solve_qnova(p, util(), *f).q).epsilon(1e-7));
  }
  SUBCASE("binding cost cap") {
    Preferences pf;
    pf.p_d = 1e-5;
    pf.p_bar = 3.0;
    OfflineInstance inst;
    inst.slots = {SlotConstraint::linear({1e5}, 0.0), SlotConstraint::linear({5e4}, 0.0)};
    inst.videos = {{0, {{1, 1.0, f, {}}, {2, 1.0, g, {}}, {3, 2.0, f, {}}}}};
    auto s = solve_opt_s(inst, {pf}, {util()});
    double bits = 0, secs = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      const auto& seg = inst.videos[0].segments[k];
      bits += seg.length * seg.tradeoff->rate(s.q[0][k]);
      secs += seg.length;
    }
    CHECK(pf.p_d * bits / secs == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(s.q[0][0] == doctest::Approx(s.q[0][2]).epsilon(1e-12));

    auto twice = inst;
    for (auto sc : inst.slots) twice.slots.push_back(sc);
    for (auto seg : inst.videos[0].segments) twice.videos[0].segments.push_back(seg);
    for (std::size_t k = 0; k < twice.videos[0].segments.size(); ++k) twice.videos[0].segments[k].index = int(k) + 1;
    CHECK(solve_opt_s(twice, {pf}, {util()}).value == doctest::Approx(s.value).epsilon(1e-8));

    auto perm = inst;
    std::swap(perm.videos[0].segments[0], perm.videos[0].segments[1]);
    perm.videos[0].segments[0].index = 1;
    perm.videos[0].segments[1].index = 2;
    CHECK(solve_opt_s(perm, {pf}, {util()}).value == doctest::Approx(s.value).epsilon(1e-9));
  }
}

TEST_CASE("brute_force_discrete") {
  auto f = std::make_shared<QrTradeoff>(
      QrTradeoff({{10, 1e5}, {30, 2e5}, {50, 3e5}, {65, 6e5}, {80, 9e5}, {95, 1.5e6}}, 100));
  std::vector<double> ladder{10, 30, 50, 65, 80, 95};
  SUBCASE("single segment matches the finite argmax") {
    OfflineInstance inst;
    inst.slots = {SlotConstraint::linear({1e5}, 0.0)};
    inst.videos = {{0, {{1, 1.0, f, ladder}}}};
    auto bf = brute_force_discrete(inst, {Preferences{}}, {util()});
    ClientParams p;
    p.m = 100;
    p.mu = 100;
    p.b = 0;
    p.d = 0;
    CHECK(bf.q[0][0] == solve_qnova_finite(p, util(), *f, ladder));
  }
  SUBCASE("two clients, three segments, three choices") {
    auto g = std::make_shared<QrTradeoff>(QrTradeoff({{0, 1e5}, {40, 2e5}, {100, 8e5}}, 100));
    std::vector<double> three{0, 40, 100};
    OfflineInstance inst;
    inst.slots = {SlotConstraint::linear({4e3, 4e3}, 0.0), SlotConstraint::linear({2e3, 8e3}, 0.0)};
    VideoTrace v{0, {{1, 1.0, g, three}, {2, 1.0, g, three}, {3, 1.0, g, three}}};
    inst.videos = {v, v};
    inst.videos[1].client = 1;
    std::vector<Preferences> prefs(2);
    std::vector<UtilitySpec> u{util(), util()};
    auto bf = brute_force_discrete(inst, prefs, u);
    auto cont = solve_opt_s(inst, prefs, u);
    CHECK(bf.value <= cont.value + 1e-9);
    CHECK(bf.value >= cont.value - 40.0);
    // tight capacity: the discrete optimum is strictly below the continuous one
    CHECK(bf.value < cont.value);
  }
  SUBCASE("cost cap below the floor rate is infeasible") {
    Preferences pf;
    pf.p_d = 1e-5;
    pf.p_bar = 0.5;
    OfflineInstance inst;
    inst.slots = {SlotConstraint::linear({1e5}, 0.0)};
    inst.videos = {{0, {{1, 1.0, f, ladder}}}};
    CHECK_THROWS_AS(brute_force_discrete(inst, {pf}, {util()}), Error);
    CHECK_THROWS_AS(solve_opt_s(inst, {pf}, {util()}), Error);
  }
  SUBCASE("too many combinations") {
    OfflineInstance inst;
    inst.slots = {SlotConstraint::linear({1e5}, 0.0)};
    VideoTrace v{0, {}};
    for (int s = 1; s <= 10; ++s) v.segments.push_back({s, 1.0, f, ladder});
    inst.videos = {v};
    CHECK_THROWS_AS(brute_force_discrete(inst, {Preferences{}}, {util()}), Error);
  }
}
