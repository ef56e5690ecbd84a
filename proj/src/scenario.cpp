#include "nova/scenario.hpp"

#include <filesystem>

#include "nova/error.hpp"
#include "nova/rng.hpp"

namespace nova {

namespace {

std::string resolve(const std::string& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_absolute()) return p;
  return (std::filesystem::path(base) / path).string();
}

template <class T>
T get_or(const Json& j, const char* key, T def) {
  if (!j.contains(key)) return def;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw Error(Errc::Config, std::string("bad value for '") + key + "'");
  }
}

}  // namespace

Scenario scenario_from_json(const Json& j, const std::string& base_dir) {
  if (!j.is_object()) throw Error(Errc::Config, "scenario must be a JSON object");
  Scenario s;
  s.name = get_or<std::string>(j, "name", s.name);
  EngineConfig& e = s.engine;
  e.tau_slot = get_or(j, "tau_slot", e.tau_slot);
  if (j.contains("engine")) {
    const Json& g = j["engine"];
    e.epsilon = get_or(g, "epsilon", e.epsilon);
    e.eps_boost = get_or(g, "eps_boost", e.eps_boost);
    e.boost_segments = get_or(g, "boost_segments", e.boost_segments);
    e.boost_slots = get_or(g, "boost_slots", e.boost_slots);
    e.eps_decay = get_or(g, "eps_decay", e.eps_decay);
    e.startup_delay = get_or(g, "startup_delay", e.startup_delay);
    e.buffer_limit = get_or(g, "buffer_limit", e.buffer_limit);
    e.throttle_c = get_or(g, "throttle_c", e.throttle_c);
    std::string sig = get_or<std::string>(g, "signaling", "ideal");
    if (sig == "ideal") e.signaling = Signaling::Ideal;
    else if (sig == "end_of_seg") e.signaling = Signaling::EndOfSeg;
    else throw Error(Errc::Config, "unknown signaling mode '" + sig + "'");
    e.signal_latency = get_or(g, "signal_latency", e.signal_latency);
    e.pf_epsilon = get_or(g, "pf_epsilon", e.pf_epsilon);
    e.p_v = get_or(g, "p_v", e.p_v);
    e.loop_video = get_or(g, "loop_video", e.loop_video);
    e.horizon_slots = get_or(g, "horizon_slots", e.horizon_slots);
  }
  if (!(e.tau_slot > 0.0)) throw Error(Errc::Config, "tau_slot must be positive");
  if (!(e.epsilon > 0.0)) throw Error(Errc::Config, "epsilon must be positive");

  s.algorithms = get_or(j, "algorithms", s.algorithms);
  if (s.algorithms.empty()) throw Error(Errc::Config, "algorithm list is empty");
  for (const auto& a : s.algorithms) parse_algorithm(a);
  s.clients = get_or(j, "clients", s.clients);
  if (s.clients.empty()) throw Error(Errc::Config, "client count list is empty");
  for (int n : s.clients)
    if (n < 1) throw Error(Errc::Config, "client counts must be positive");
  if (j.contains("seeds")) {
    const Json& sd = j["seeds"];
    if (sd.is_object()) {
      auto first = get_or<std::uint64_t>(sd, "first", 1);
      auto count = get_or<std::uint64_t>(sd, "count", 1);
      s.seeds.clear();
      for (std::uint64_t k = 0; k < count; ++k) s.seeds.push_back(first + k);
    } else {
      s.seeds = get_or(j, "seeds", s.seeds);
    }
  }
  if (s.seeds.empty()) throw Error(Errc::Config, "at least one seed is required");
  s.segments = get_or(j, "segments", s.segments);
  if (s.segments < 1) throw Error(Errc::Config, "segments must be positive");
  e.horizon_segments = e.horizon_slots > 0 ? 0 : s.segments;

  const Json pk = j.value("peaks", Json::object());
  std::string pkind = get_or<std::string>(pk, "kind", "markov");
  if (pkind == "file") {
    s.peak_file = resolve(base_dir, get_or<std::string>(pk, "path", ""));
    s.peak_table = load_peak_csv(s.peak_file);
  } else if (pkind == "markov") {
    s.peaks = default_peak_spec(e.tau_slot, get_or(pk, "lo_bps", 0.5e6), get_or(pk, "hi_bps", 4e6),
                                get_or(pk, "median_bps", 1.5e6), get_or(pk, "sigma_log", 0.6), get_or(pk, "bins", 16));
    s.peaks.rho_corr = get_or(pk, "rho_corr", s.peaks.rho_corr);
    s.peaks.scale_lo = get_or(pk, "scale_lo", s.peaks.scale_lo);
    s.peaks.scale_hi = get_or(pk, "scale_hi", s.peaks.scale_hi);
    try {
      validate_peak_spec(s.peaks);
    } catch (const Error& err) {
      throw Error(Errc::Config, err.what());
    }
  } else {
    throw Error(Errc::Config, "unknown peak kind '" + pkind + "'");
  }

  s.pref = j.contains("preferences") ? preferences_from_json(j["preferences"]) : s.pref;
  const Json vd = j.value("video", Json::object());
  std::string vkind = get_or<std::string>(vd, "kind", "generated");
  if (vkind == "file") {
    s.video_file = resolve(base_dir, get_or<std::string>(vd, "path", ""));
    s.video_traces = load_traces(s.video_file, s.pref.q_max);
  } else if (vkind == "generated") {
    s.video.ladder_bps = get_or(vd, "ladder_bps", s.video.ladder_bps);
    s.video.theta_bps = get_or(vd, "theta_bps", s.video.theta_bps);
    s.video.jitter = get_or(vd, "jitter", s.video.jitter);
    s.video.length = get_or(vd, "length", s.video.length);
    s.video.full_range = get_or(vd, "full_range", s.video.full_range);
    s.video.q_max = s.pref.q_max;
    s.theta_spread = get_or(vd, "theta_spread", s.theta_spread);
    if (s.theta_spread < 0.0 || s.theta_spread >= 1.0) throw Error(Errc::Config, "theta_spread must be in [0,1)");
  } else {
    throw Error(Errc::Config, "unknown video kind '" + vkind + "'");
  }

  s.price_capped = get_or(j, "price_capped", s.price_capped);
  s.utility = j.contains("utility") ? utility_from_json(j["utility"]) : s.utility;
  if (j.contains("client_init")) {
    const Json& c = j["client_init"];
    s.m0 = get_or(c, "m0", s.m0);
    s.b0 = get_or(c, "b0", s.b0);
    s.d0 = get_or(c, "d0", s.d0);
    s.r_min = get_or(c, "r_min", s.r_min);
  }
  s.data_users = get_or<std::size_t>(j, "data_users", 0);
  s.out_dir = get_or<std::string>(j, "out", s.out_dir);
  return s;
}

Scenario load_scenario(const std::string& path) {
  Json j = read_json_file(path);
  std::string base = std::filesystem::path(path).parent_path().string();
  return scenario_from_json(j, base.empty() ? "." : base);
}

RunInputs make_run(const Scenario& s, int n, std::uint64_t seed, const std::string& algorithm) {
  RunInputs in;
  in.cfg = s.engine;
  in.cfg.algorithm = parse_algorithm(algorithm);
  in.cfg.horizon_segments = in.cfg.horizon_slots > 0 ? 0 : s.segments;
  in.data_users = s.data_users;
  const std::size_t users = static_cast<std::size_t>(n) + s.data_users;
  for (int i = 0; i < n; ++i) {
    ClientSetup c;
    c.pref = s.pref;
    if (s.price_capped >= 0 && i >= s.price_capped) c.pref.p_bar = 0.0;
    c.u = s.utility;
    c.r_min = s.r_min;
    c.m0 = s.m0;
    c.b0 = s.b0;
    c.d0 = s.d0;
    if (!s.video_traces.empty()) {
      c.video = s.video_traces[static_cast<std::size_t>(i) % s.video_traces.size()];
      c.video.client = i;
    } else {
      VideoSpec vs = s.video;
      Rng r(stream_seed(seed, 3, static_cast<std::uint64_t>(i)));
      vs.theta_bps *= 1.0 + s.theta_spread * (2.0 * r.uniform() - 1.0);
      c.video = gen_video(vs, s.segments, stream_seed(seed, 4, static_cast<std::uint64_t>(i)), i);
    }
    in.clients.push_back(std::move(c));
  }
  if (!s.peak_table.empty()) {
    std::vector<std::vector<double>> t;
    for (std::size_t i = 0; i < users; ++i) t.push_back(s.peak_table[i % s.peak_table.size()]);
    in.peaks = std::make_unique<TablePeaks>(std::move(t));
  } else {
    std::vector<double> scales;
    for (std::size_t i = 0; i < users; ++i) scales.push_back(draw_client_scale(s.peaks, stream_seed(seed, 2, i)));
    in.peaks = std::make_unique<MarkovPeaks>(s.peaks, std::move(scales), stream_seed(seed, 1));
  }
  return in;
}

}  // namespace nova
