#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nova/engine.hpp"
#include "nova/scenario.hpp"

namespace nova {

struct RunKey {
  std::string algorithm;
  int n = 1;
  std::uint64_t seed = 1;

  bool operator<(const RunKey& o) const;
  bool operator==(const RunKey& o) const = default;
};

struct RunResult {
  RunKey key;
  SimOutcome outcome;
};

// Every (algorithm, n, seed) combination in sorted order.
std::vector<RunKey> expand_runs(const Scenario& s);

RunResult run_one(const Scenario& s, const RunKey& key);

// Serial reference and OpenMP fan-out; both return results sorted by key.
std::vector<RunResult> run_batch_serial(const Scenario& s, const std::vector<RunKey>& keys);
std::vector<RunResult> run_batch_parallel(const Scenario& s, const std::vector<RunKey>& keys, int workers = 0);

// Worker count from NOVA_WORKERS (0 or unset: OpenMP default).
int workers_from_env();

// Per-run summary over the run's clients.
struct RunSummary {
  RunKey key;
  double qoe1 = 0.0, qoe2 = 0.0, mean_quality = 0.0, rebuffer = 0.0, cost = 0.0, fairness = 0.0, phi = 0.0;
};

RunSummary summarize(const RunResult& r);

struct MetricStat {
  std::string algorithm;
  int n = 0;
  std::string metric;
  double mean = 0.0;
  double stderr_ = 0.0;
  int count = 0;
};

// Mean and standard error over seeds for every (algorithm, n, metric).
std::vector<MetricStat> compare_stats(const std::vector<RunSummary>& runs);

// Column orders are fixed; see README.
void write_metrics_csv(std::ostream& os, const std::vector<RunResult>& results);
void write_aggregate_csv(std::ostream& os, const std::vector<RunSummary>& runs);
void write_compare_csv(std::ostream& os, const std::vector<MetricStat>& stats);

std::string format_double(double x);

}  // namespace nova
