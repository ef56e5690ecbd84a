#include <doctest.h>

#include <cmath>

#include "nova/engine.hpp"
#include "nova/error.hpp"
#include "nova/io.hpp"

using namespace nova;

namespace {

TradeoffPtr ladder_f() {
  return std::make_shared<QrTradeoff>(
      QrTradeoff({{0, 0.1e6}, {20, 0.2e6}, {40, 0.3e6}, {60, 0.6e6}, {80, 0.9e6}, {100, 1.5e6}}, 100));
}

VideoTrace constant_video(TradeoffPtr f, int segments, double length = 1.0, std::vector<double> avail = {}) {
  VideoTrace v;
  for (int s = 1; s <= segments; ++s) v.segments.push_back({s, length, f, avail});
  return v;
}

std::unique_ptr<PeakProcess> constant_peaks(std::vector<double> bits) {
  std::vector<std::vector<double>> t;
  for (double b : bits) t.push_back({b});
  return std::make_unique<TablePeaks>(t);
}

ClientSetup setup(VideoTrace v) {
  ClientSetup c;
  c.video = std::move(v);
  c.u.uv.eta = 0.05;
  return c;
}

}  // namespace

TEST_CASE("update_params follows the tracker recursions") {
  ClientParams p;
  p.m = 25;
  p.mu = 25;
  p.v = 0;
  p.lambda = 1;
  p.epsilon = 0.05;
  p.b = 1;
  p.d = 0;
  UtilitySpec u;
  u.uv.eta = 0.05;
  update_params(p, u, 30, 1.0, 1e5);
  CHECK(p.m == doctest::Approx(25.0125));
  CHECK(p.mu == doctest::Approx(25.25));
  CHECK(p.v == doctest::Approx(1.25));
  CHECK(p.lambda == 1.0);
  CHECK(p.b == doctest::Approx(0.95));

  ClientParams q;
  q.pref.p_d = 1e-5;
  q.pref.p_bar = 3;
  q.d = 0;
  q.lambda = 1;
  q.epsilon = 0.05;
  update_params(q, u, 10, 1.0, 1e5);  // cost 1 $/s below the cap
  CHECK(q.d == 0);
  q.b = 0.01;
  update_params(q, u, 10, 1.0, 1e5);
  CHECK(q.b == 0);
}

TEST_CASE("throttle delay") {
  CHECK(throttle_delay(10, 30, 1) == 0);
  CHECK(throttle_delay(15, 30, 1) == 0);
  CHECK(throttle_delay(25, 30, 1) == doctest::Approx(2.0 / 15));
  CHECK(throttle_delay(29.999, 30, 1) > 900);
  CHECK(throttle_delay(31, 30, 2) == doctest::Approx(2.5 + 2 * (1 / 1.5 - 1 / 15.0)));
  CHECK(throttle_delay(25, 0, 1) == 0);
}

TEST_CASE("exact drain completes a segment within the slot") {
  EngineConfig cfg;
  cfg.horizon_segments = 5;
  cfg.startup_delay = 0;
  auto f = std::make_shared<QrTradeoff>(QrTradeoff({{10, 5e3}, {20, 6e3}}, 100));
  auto c = setup(constant_video(f, 5, 1.0, {10}));
  auto out = run(cfg, {c}, constant_peaks({5e3}));
  REQUIRE(out.clients[0].segments.size() == 5);
  for (int s = 0; s < 5; ++s) {
    CHECK(out.clients[0].segments[s].complete_slot == s);
    CHECK(out.clients[0].segments[s].size_bits == 5e3);
  }
  // without a startup delay the first slot is spent waiting for segment 1
  CHECK(out.clients[0].stall_seconds == doctest::Approx(0.01));
}

TEST_CASE("ample capacity and zero penalties: pull-to-mean qualities without stalls") {
  EngineConfig cfg;
  cfg.algorithm = parse_algorithm("nova-cont");
  cfg.horizon_segments = 300;
  auto c = setup(constant_video(ladder_f(), 300));
  c.u.hb.h0 = 0;
  Engine e(cfg, {c}, constant_peaks({2 * 1.5e6 * cfg.tau_slot}));
  std::vector<double> expected{std::min(c.m0 + 1 / (2 * 0.05), 100.0)};
  long seen = e.segments_requested(0);
  while (!e.done()) {
    double m = e.params(0).m;
    e.step_slot();
    if (e.segments_requested(0) != seen) {
      REQUIRE(e.segments_requested(0) == seen + 1);
      seen = e.segments_requested(0);
      expected.push_back(std::min(m + 1 / (2 * 0.05), 100.0));
    }
  }
  auto out = e.outcome();
  REQUIRE(out.clients[0].segments.size() == 300);
  for (std::size_t s = 0; s < 300; ++s) CHECK(out.clients[0].segments[s].q == doctest::Approx(expected[s]).epsilon(1e-8));
  CHECK(out.clients[0].stall_seconds == 0);
  CHECK(out.clients[0].rebuffer_realized == 0);
  CHECK(out.invariant_violations == 0);
}

TEST_CASE("b ledger, controller estimate and playback conservation") {
  EngineConfig cfg;
  cfg.eps_boost = 1;
  cfg.signaling = Signaling::EndOfSeg;
  cfg.horizon_slots = 20000;
  auto c = setup(constant_video(ladder_f(), 200));
  c.b0 = 1000;
  c.u.hb.h0 = 0;
  auto c2 = c;
  c2.video.client = 1;
  std::vector<std::vector<double>> table{{4e3, 9e3, 2e3, 12e3}, {8e3, 1e3, 6e3, 3e3}};
  Engine e(cfg, {c, c2}, std::make_unique<TablePeaks>(table));
  long mismatches = 0;
  std::vector<long> seen{e.segments_requested(0), e.segments_requested(1)};
  while (!e.done()) {
    e.step_slot();
    for (std::size_t i = 0; i < 2; ++i) {
      double lhs = (e.params(i).b - c.b0) / cfg.epsilon;
      double rhs = e.slot() * cfg.tau_slot - e.seconds_requested(i);
      CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, std::abs(rhs)) + 1e-9);
      CHECK(std::abs(e.playback_balance(i)) <= 1e-9);
      bool requested = e.segments_requested(i) != seen[i];
      seen[i] = e.segments_requested(i);
      if (!requested && std::abs(e.controller_b(i) - e.params(i).b) > 1e-9) ++mismatches;
    }
  }
  CHECK(mismatches == 0);
}

TEST_CASE("runs are deterministic and looping is enforced") {
  EngineConfig cfg;
  cfg.horizon_segments = 50;
  auto c = setup(constant_video(ladder_f(), 20, 1.0, {0, 20, 40, 60, 80, 100}));
  auto c2 = c;
  auto a = run(cfg, {c, c2}, constant_peaks({3e3, 5e3}));
  auto b = run(cfg, {c, c2}, constant_peaks({3e3, 5e3}));
  CHECK(outcome_to_json(a).dump() == outcome_to_json(b).dump());

  cfg.loop_video = false;
  CHECK_THROWS_AS(run(cfg, {c}, constant_peaks({3e3})), Error);
  cfg.horizon_segments = 20;
  auto d = run(cfg, {c}, constant_peaks({3e3}));
  CHECK(d.clients[0].segments.size() == 20);
}

TEST_CASE("pf-rm and shared wiring") {
  EngineConfig cfg;
  cfg.horizon_segments = 40;
  auto c = setup(constant_video(ladder_f(), 40, 1.0, {0, 20, 40, 60, 80, 100}));
  cfg.algorithm = parse_algorithm("pf-rm");
  auto pf = run(cfg, {c, c}, constant_peaks({1e4, 1e4}));
  CHECK(pf.clients.size() == 2);
  for (const auto& s : pf.clients[0].segments) {
    bool on_ladder = false;
    for (double q : {0.0, 20.0, 40.0, 60.0, 80.0, 100.0}) on_ladder = on_ladder || s.q == q;
    CHECK(on_ladder);
  }
  cfg.algorithm = parse_algorithm("shared:qnova_finite");
  auto sh = run(cfg, {c}, constant_peaks({1e4, 1e4}), 1);
  CHECK(sh.clients.size() == 1);
  CHECK_THROWS_AS(parse_algorithm("bogus"), Error);
  CHECK_THROWS_AS(parse_algorithm("nova:bogus"), Error);
}
