#include "nova/batch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <map>
#include <ostream>
#include <tuple>

#include <omp.h>

#include "nova/error.hpp"

namespace nova {

bool RunKey::operator<(const RunKey& o) const {
  return std::tie(algorithm, n, seed) < std::tie(o.algorithm, o.n, o.seed);
}

std::vector<RunKey> expand_runs(const Scenario& s) {
  std::vector<RunKey> keys;
  std::map<std::string, int> seen;
  for (const auto& a : s.algorithms) {
    // a repeated algorithm gets its own label so its rows stay separate
    int k = ++seen[a];
    std::string label = k == 1 ? a : a + "#" + std::to_string(k);
    for (int n : s.clients)
      for (auto seed : s.seeds) keys.push_back({label, n, seed});
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

RunResult run_one(const Scenario& s, const RunKey& key) {
  RunInputs in = make_run(s, key.n, key.seed, key.algorithm.substr(0, key.algorithm.find('#')));
  return {key, run(in.cfg, std::move(in.clients), std::move(in.peaks), in.data_users)};
}

std::vector<RunResult> run_batch_serial(const Scenario& s, const std::vector<RunKey>& keys) {
  std::vector<RunResult> out;
  for (const auto& k : keys) out.push_back(run_one(s, k));
  std::sort(out.begin(), out.end(), [](const RunResult& a, const RunResult& b) { return a.key < b.key; });
  return out;
}

std::vector<RunResult> run_batch_parallel(const Scenario& s, const std::vector<RunKey>& keys, int workers) {
  std::vector<RunResult> out(keys.size());
  std::vector<std::exception_ptr> errors(keys.size());
  const long n = static_cast<long>(keys.size());
  if (workers <= 0) workers = omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (long i = 0; i < n; ++i) {
    try {
      out[i] = run_one(s, keys[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::sort(out.begin(), out.end(), [](const RunResult& a, const RunResult& b) { return a.key < b.key; });
  return out;
}

int workers_from_env() {
  const char* v = std::getenv("NOVA_WORKERS");
  if (!v || !*v) return 0;
  char* end = nullptr;
  long w = std::strtol(v, &end, 10);
  if (*end != '\0' || w < 0) throw Error(Errc::Config, "NOVA_WORKERS must be a non-negative integer");
  return static_cast<int>(w);
}

RunSummary summarize(const RunResult& r) {
  RunSummary s;
  s.key = r.key;
  const auto& cs = r.outcome.clients;
  double n = 0.0;
  for (const auto& c : cs) {
    if (c.segments.empty()) continue;
    s.qoe1 += c.qoe1;
    s.qoe2 += c.qoe2;
    s.mean_quality += c.mean_q;
    s.rebuffer += c.rebuffer_realized;
    s.cost += c.cost_per_second;
    n += 1.0;
  }
  if (n > 0.0) {
    s.qoe1 /= n;
    s.qoe2 /= n;
    s.mean_quality /= n;
    s.rebuffer /= n;
    s.cost /= n;
  }
  s.fairness = r.outcome.fairness;
  s.phi = r.outcome.phi;
  return s;
}

std::vector<MetricStat> compare_stats(const std::vector<RunSummary>& runs) {
  static const char* names[] = {"qoe1", "qoe2", "mean_quality", "rebuffer", "cost", "fairness"};
  std::map<std::pair<std::string, int>, std::vector<const RunSummary*>> groups;
  for (const auto& r : runs) groups[{r.key.algorithm, r.key.n}].push_back(&r);
  std::vector<MetricStat> out;
  for (const auto& [g, rs] : groups) {
    for (int m = 0; m < 6; ++m) {
      std::vector<double> x;
      for (const auto* r : rs) {
        const double vals[] = {r->qoe1, r->qoe2, r->mean_quality, r->rebuffer, r->cost, r->fairness};
        x.push_back(vals[m]);
      }
      MetricStat st;
      st.algorithm = g.first;
      st.n = g.second;
      st.metric = names[m];
      st.count = static_cast<int>(x.size());
      for (double v : x) st.mean += v;
      st.mean /= st.count;
      if (st.count > 1) {
        double ss = 0.0;
        for (double v : x) ss += (v - st.mean) * (v - st.mean);
        st.stderr_ = std::sqrt(ss / (st.count - 1) / st.count);
      }
      out.push_back(st);
    }
  }
  return out;
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

void write_metrics_csv(std::ostream& os, const std::vector<RunResult>& results) {
  os << "algorithm,n,seed,client,segments,mean_quality,var_quality,qoe,qoe1,qoe2,rebuffer_realized,"
        "rebuffer_estimate,cost_per_second,invariant_violations\n";
  for (const auto& r : results)
    for (const auto& c : r.outcome.clients) {
      os << r.key.algorithm << ',' << r.key.n << ',' << r.key.seed << ',' << c.client << ',' << c.segments.size()
         << ',' << format_double(c.mean_q) << ',' << format_double(c.var_q) << ',' << format_double(c.qoe) << ','
         << format_double(c.qoe1) << ',' << format_double(c.qoe2) << ',' << format_double(c.rebuffer_realized)
         << ',' << format_double(c.rebuffer_estimate) << ',' << format_double(c.cost_per_second) << ','
         << c.invariant_violations << '\n';
    }
}

void write_aggregate_csv(std::ostream& os, const std::vector<RunSummary>& runs) {
  os << "algorithm,n,seed,qoe1,qoe2,mean_quality,rebuffer,cost,fairness,phi\n";
  for (const auto& r : runs)
    os << r.key.algorithm << ',' << r.key.n << ',' << r.key.seed << ',' << format_double(r.qoe1) << ','
       << format_double(r.qoe2) << ',' << format_double(r.mean_quality) << ',' << format_double(r.rebuffer) << ','
       << format_double(r.cost) << ',' << format_double(r.fairness) << ',' << format_double(r.phi) << '\n';
}

void write_compare_csv(std::ostream& os, const std::vector<MetricStat>& stats) {
  os << "n,algorithm,metric,mean,stderr,count\n";
  std::vector<MetricStat> sorted = stats;
  std::stable_sort(sorted.begin(), sorted.end(), [](const MetricStat& a, const MetricStat& b) {
    return std::tie(a.n, a.metric, a.algorithm) < std::tie(b.n, b.metric, b.algorithm);
  });
  for (const auto& s : sorted)
    os << s.n << ',' << s.algorithm << ',' << s.metric << ',' << format_double(s.mean) << ','
       << format_double(s.stderr_) << ',' << s.count << '\n';
}

}  // namespace nova
