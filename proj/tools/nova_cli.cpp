#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nova/batch.hpp"
#include "nova/error.hpp"
#include "nova/io.hpp"
#include "nova/oracle.hpp"
#include "nova/scenario.hpp"

namespace fs = std::filesystem;
using namespace nova;

namespace {

struct Common {
  std::string scenario;
  std::string seeds;
  std::string out;
  bool deterministic = false;
};

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string tok;
  try {
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) continue;
      auto dash = tok.find('-');
      if (dash == std::string::npos) {
        out.push_back(std::stoull(tok));
      } else {
        std::uint64_t a = std::stoull(tok.substr(0, dash)), b = std::stoull(tok.substr(dash + 1));
        if (b < a) throw Error(Errc::Config, "descending seed range " + tok);
        for (std::uint64_t x = a; x <= b; ++x) out.push_back(x);
      }
    }
  } catch (const std::logic_error&) {
    throw Error(Errc::Config, "cannot parse seed list '" + s + "'");
  }
  if (out.empty()) throw Error(Errc::Config, "empty seed list");
  return out;
}

Scenario prepare(const Common& c) {
  if (c.scenario.empty()) throw Error(Errc::Config, "--scenario is required");
  Scenario s = load_scenario(c.scenario);
  if (!c.seeds.empty()) s.seeds = parse_seeds(c.seeds);
  if (!c.out.empty()) s.out_dir = c.out;
  return s;
}

std::string header(bool deterministic) {
  if (deterministic) return "";
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[64];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return std::string("# generated ") + buf + "\n";
}

void write_csv(const fs::path& path, bool deterministic, const std::function<void(std::ostream&)>& body) {
  std::ostringstream os;
  os << header(deterministic);
  body(os);
  write_text_file(path.string(), os.str());
}

fs::path ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::Io, "cannot create output directory " + dir + ": " + ec.message());
  return fs::path(dir);
}

int cmd_run(const Common& c) {
  Scenario s = prepare(c);
  auto keys = expand_runs(s);
  auto results = run_batch_parallel(s, keys, workers_from_env());
  std::vector<RunSummary> sums;
  for (const auto& r : results) sums.push_back(summarize(r));
  fs::path dir = ensure_dir(s.out_dir);
  write_csv(dir / "metrics.csv", c.deterministic, [&](std::ostream& os) { write_metrics_csv(os, results); });
  write_csv(dir / "aggregate.csv", c.deterministic, [&](std::ostream& os) { write_aggregate_csv(os, sums); });
  write_csv(dir / "summary.csv", c.deterministic, [&](std::ostream& os) { write_compare_csv(os, compare_stats(sums)); });
  std::cout << "wrote " << results.size() << " runs to " << dir.string() << "\n";
  return 0;
}

int cmd_compare(const Common& c, const std::string& algorithms) {
  Scenario s = prepare(c);
  if (!algorithms.empty() || s.algorithms.size() < 2) {
    std::vector<std::string> list;
    std::stringstream ss(algorithms);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) list.push_back(tok);
    if (!algorithms.empty() || list.empty()) s.algorithms = list;
  }
  if (s.algorithms.size() < 2) throw Error(Errc::Config, "compare needs at least two algorithms");
  for (const auto& a : s.algorithms) parse_algorithm(a);
  auto results = run_batch_parallel(s, expand_runs(s), workers_from_env());
  std::vector<RunSummary> sums;
  for (const auto& r : results) sums.push_back(summarize(r));
  auto stats = compare_stats(sums);
  fs::path dir = ensure_dir(s.out_dir);
  write_csv(dir / "compare.csv", c.deterministic, [&](std::ostream& os) { write_compare_csv(os, stats); });
  for (const auto& st : stats)
    if (st.metric == "qoe1")
      std::cout << "n=" << st.n << " " << st.algorithm << " qoe1 " << format_double(st.mean) << " +- "
                << format_double(st.stderr_) << "\n";
  return 0;
}

int cmd_oracle(const std::string& instance, const std::string& verify, const std::string& out) {
  if (instance.empty()) throw Error(Errc::Config, "--instance is required");
  OracleInstance inst = instance_from_json(read_json_file(instance));
  fs::path dir = ensure_dir(out.empty() ? "." : out);
  if (!verify.empty()) {
    OptstatSolution sol = solution_from_json(read_json_file(verify));
    KktReport rep = verify_kkt_optstat(sol, inst.model, inst.prefs, inst.u);
    Json j = kkt_to_json(rep);
    write_text_file((dir / "certificate.json").string(), j.dump(2) + "\n");
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  try {
    OptstatSolution sol = solve_optstat(inst.model, inst.prefs, inst.u);
    KktReport rep = verify_kkt_optstat(sol, inst.model, inst.prefs, inst.u);
    write_text_file((dir / "solution.json").string(), solution_to_json(sol).dump(2) + "\n");
    Json cert = {{"status", "optimal"}, {"value", sol.value}, {"kkt", kkt_to_json(rep)}};
    write_text_file((dir / "certificate.json").string(), cert.dump(2) + "\n");
    std::cout << cert.dump(2) << "\n";
    return 0;
  } catch (const Error& e) {
    if (e.code() != Errc::InfeasibleModel && e.code() != Errc::NoConvergence) throw;
    Json cert = {{"status", e.code() == Errc::InfeasibleModel ? "infeasible" : "no_convergence"}, {"reason", e.what()}};
    write_text_file((dir / "certificate.json").string(), cert.dump(2) + "\n");
    std::cerr << e.what() << "\n";
    return 1;
  }
}

int cmd_gen(const Common& c, int n, long slots) {
  Scenario s = prepare(c);
  std::uint64_t seed = s.seeds.front();
  RunInputs in = make_run(s, n, seed, s.algorithms.front());
  fs::path dir = ensure_dir(s.out_dir);
  std::vector<VideoTrace> videos;
  for (const auto& cl : in.clients) videos.push_back(cl.video);
  save_traces((dir / "video.json").string(), videos);
  std::vector<std::vector<double>> peaks(in.peaks->size());
  std::vector<double> buf;
  for (long k = 0; k < slots; ++k) {
    in.peaks->next(buf);
    for (std::size_t i = 0; i < buf.size(); ++i) peaks[i].push_back(buf[i]);
  }
  std::ostringstream os;
  write_peak_csv(os, peaks);
  write_text_file((dir / "peaks.csv").string(), os.str());
  std::cout << "wrote traces for " << n << " clients to " << dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint allocation and quality adaptation simulator"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", common.scenario, "scenario JSON file");
    sub->add_option("--seeds", common.seeds, "seed list, e.g. 1,2,5-9");
    sub->add_option("--out", common.out, "output directory");
    sub->add_flag("--deterministic", common.deterministic, "omit the timestamp header line");
  };
  auto* run = app.add_subcommand("run", "simulate every (algorithm, N, seed) of a scenario");
  add_common(run);
  auto* cmp = app.add_subcommand("compare", "compare algorithms on a scenario");
  add_common(cmp);
  std::string algorithms;
  cmp->add_option("--algorithms", algorithms, "comma-separated algorithm list");
  auto* orc = app.add_subcommand("oracle", "solve or verify a stationary instance");
  std::string instance, verify, oracle_out;
  orc->add_option("--instance", instance, "instance JSON file");
  orc->add_option("--verify", verify, "stored solution to re-check");
  orc->add_option("--out", oracle_out, "output directory");
  auto* gen = app.add_subcommand("gen-traces", "write generated traces for one seed");
  add_common(gen);
  int gen_n = 1;
  long gen_slots = 60000;
  gen->add_option("--clients", gen_n, "number of clients");
  gen->add_option("--slots", gen_slots, "number of peak-rate slots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    if (*run) return cmd_run(common);
    if (*cmp) return cmd_compare(common, algorithms);
    if (*orc) return cmd_oracle(instance, verify, oracle_out);
    if (*gen) return cmd_gen(common, gen_n, gen_slots);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == Errc::Config ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
