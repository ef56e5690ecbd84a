#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "nova/engine.hpp"
#include "nova/oracle.hpp"

namespace nova {

using Json = nlohmann::json;

Json tradeoff_to_json(const QrTradeoff& t);
QrTradeoff tradeoff_from_json(const Json& j, double q_max);

// {"client": i, "segments": [{"l_seconds", "knots": [[q, rate_bps], ...], "available_q": [...]}, ...]}
Json trace_to_json(const VideoTrace& v);
VideoTrace trace_from_json(const Json& j, double q_max);

std::vector<VideoTrace> load_traces(const std::string& path, double q_max);
void save_traces(const std::string& path, const std::vector<VideoTrace>& traces);

// CSV with header slot,client,peak_bits; returns one sequence per client.
std::vector<std::vector<double>> load_peak_csv(const std::string& path);
void write_peak_csv(std::ostream& os, const std::vector<std::vector<double>>& per_client);

Json preferences_to_json(const Preferences& p);
Preferences preferences_from_json(const Json& j, const Preferences& defaults = {});
Json utility_to_json(const UtilitySpec& u);
UtilitySpec utility_from_json(const Json& j, const UtilitySpec& defaults = {});

Json outcome_to_json(const SimOutcome& o);

// Stationary instance file: model plus per-client preferences and utilities.
struct OracleInstance {
  StationaryModel model;
  std::vector<Preferences> prefs;
  std::vector<UtilitySpec> u;
};

OracleInstance instance_from_json(const Json& j);
Json instance_to_json(const OracleInstance& inst);
Json solution_to_json(const OptstatSolution& s);
OptstatSolution solution_from_json(const Json& j);
Json kkt_to_json(const KktReport& r);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace nova
