#include <doctest.h>

#include <algorithm>
#include <sstream>
#include <string>

#include "nova/batch.hpp"
#include "nova/error.hpp"
#include "nova/io.hpp"
#include "nova/scenario.hpp"

using namespace nova;

namespace {

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

Scenario small(const std::string& extra = "") {
  std::string text = R"({"segments": 30, "algorithms": ["nova"], "clients": [1], "seeds": [1])" + extra + "}";
  return scenario_from_json(Json::parse(text));
}

}  // namespace

TEST_CASE("minimal single-client scenario gives one metrics row") {
  auto s = small();
  auto results = run_batch_serial(s, expand_runs(s));
  std::ostringstream os;
  write_metrics_csv(os, results);
  CHECK(count_lines(os.str()) == 2);
  CHECK(os.str().rfind("algorithm,n,seed,client,", 0) == 0);
}

TEST_CASE("runs follow segment counts changed after parsing") {
  auto s = small();
  s.segments = 45;
  auto r = run_one(s, {"nova", 1, 1});
  CHECK(r.outcome.clients[0].segments.size() == 45);
}

TEST_CASE("sweep over client counts and seeds") {
  auto s = small(R"(, "clients": [2, 4], "seeds": {"first": 1, "count": 3})");
  auto keys = expand_runs(s);
  REQUIRE(keys.size() == 6);
  auto serial = run_batch_serial(s, keys);
  auto parallel = run_batch_parallel(s, keys, 3);
  std::vector<RunSummary> sums;
  for (const auto& r : serial) sums.push_back(summarize(r));
  std::ostringstream agg, m1, m2;
  write_aggregate_csv(agg, sums);
  CHECK(count_lines(agg.str()) == 7);
  write_metrics_csv(m1, serial);
  write_metrics_csv(m2, parallel);
  CHECK(m1.str() == m2.str());
  CHECK(count_lines(m1.str()) == 1 + 3 * (2 + 4));
}

TEST_CASE("compare statistics") {
  auto s = small(R"(, "algorithms": ["nova", "pf-rm"], "clients": [3], "seeds": [1, 2, 3, 4, 5])");
  std::vector<RunSummary> sums;
  for (const auto& r : run_batch_serial(s, expand_runs(s))) sums.push_back(summarize(r));
  auto stats = compare_stats(sums);
  for (const char* metric : {"qoe1", "qoe2", "mean_quality", "rebuffer", "cost", "fairness"}) {
    int rows = 0;
    for (const auto& st : stats)
      if (st.metric == metric) {
        ++rows;
        CHECK(st.count == 5);
        CHECK(st.n == 3);
      }
    CHECK(rows == 2);
  }

  auto twice = small(R"(, "algorithms": ["nova", "nova"], "clients": [2], "seeds": [1, 2])");
  std::vector<RunSummary> ts;
  for (const auto& r : run_batch_serial(twice, expand_runs(twice))) ts.push_back(summarize(r));
  auto st2 = compare_stats(ts);
  REQUIRE(st2.size() % 2 == 0);
  for (const auto& a : st2)
    for (const auto& b : st2)
      if (a.metric == b.metric && a.algorithm != b.algorithm) {
        CHECK(a.mean == b.mean);
        CHECK(a.stderr_ == b.stderr_);
      }
}

TEST_CASE("scenario errors are configuration errors") {
  auto code = [](const std::string& text) {
    try {
      scenario_from_json(Json::parse(text), "/nonexistent");
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::InvalidArgument;
  };
  CHECK(code(R"({"algorithms": []})") == Errc::Config);
  CHECK(code(R"({"algorithms": ["warp"]})") == Errc::Config);
  CHECK(code(R"({"seeds": []})") == Errc::Config);
  CHECK(code(R"({"video": {"kind": "file", "path": "missing.json"}})") == Errc::Config);
  try {
    scenario_from_json(Json::parse(R"({"peaks": {"kind": "file", "path": "gone.csv"}})"), "/nonexistent");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("gone.csv") != std::string::npos);
  }
}

TEST_CASE("trace and instance files round-trip") {
  auto s = small();
  auto in = make_run(s, 2, 7, "nova");
  for (const auto& c : in.clients) {
    auto j = trace_to_json(c.video);
    auto back = trace_from_json(Json::parse(j.dump()), 100);
    REQUIRE(back.segments.size() == c.video.segments.size());
    for (std::size_t k = 0; k < back.segments.size(); ++k) {
      CHECK(*back.segments[k].tradeoff == *c.video.segments[k].tradeoff);
      CHECK(back.segments[k].available_q == c.video.segments[k].available_q);
    }
  }

  OracleInstance inst;
  auto f = std::make_shared<QrTradeoff>(QrTradeoff({{0, 1e5}, {100, 1e6}}, 100));
  inst.model.constraints.push_back({SlotConstraint::linear({5e3, 7e3}, 0.0), 1.0});
  inst.model.clients.push_back({{{f, 1.0, 1.0, {}}}});
  inst.model.clients.push_back({{{f, 2.0, 1.0, {}}}});
  inst.prefs.resize(2);
  inst.prefs[1].p_bar = 3;
  inst.prefs[1].p_d = 1e-5;
  inst.u.resize(2);
  auto again = instance_from_json(Json::parse(instance_to_json(inst).dump()));
  CHECK(instance_to_json(again).dump() == instance_to_json(inst).dump());
}
