#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "nova/engine.hpp"
#include "nova/io.hpp"
#include "nova/tracegen.hpp"

namespace nova {

struct Scenario {
  std::string name = "scenario";
  EngineConfig engine;
  std::vector<std::string> algorithms{"nova"};
  std::vector<int> clients{1};
  std::vector<std::uint64_t> seeds{1};
  int segments = 600;

  // peak rates: generated chain unless peak_table is loaded from a file
  PeakRateSpec peaks;
  std::string peak_file;
  std::vector<std::vector<double>> peak_table;

  // video: generated unless video_file is given
  VideoSpec video;
  double theta_spread = 0.4;  // per-client complexity spread around video.theta_bps
  std::string video_file;
  std::vector<VideoTrace> video_traces;

  Preferences pref;
  int price_capped = -1;  // number of clients (lowest ids) that carry the price cap; -1 for all
  UtilitySpec utility;
  double r_min = 0.0;
  double m0 = 25.0;
  double b0 = 2.0;
  double d0 = 1.0;
  std::size_t data_users = 0;
  std::string out_dir = "out";
};

// Parses and validates; relative file paths resolve against base_dir.
// Trace files are loaded here, so a missing file is a configuration error.
Scenario scenario_from_json(const Json& j, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);

struct RunInputs {
  EngineConfig cfg;
  std::vector<ClientSetup> clients;
  std::unique_ptr<PeakProcess> peaks;
  std::size_t data_users = 0;
};

// Inputs depend on (n, seed) only, so algorithms compared on the same seed
// see identical channels and videos.
RunInputs make_run(const Scenario& s, int n, std::uint64_t seed, const std::string& algorithm);

}  // namespace nova
