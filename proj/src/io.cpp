#include "nova/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "nova/error.hpp"

namespace nova {

Json tradeoff_to_json(const QrTradeoff& t) {
  Json knots = Json::array();
  for (const auto& p : t.points()) knots.push_back({p.q, p.rate});
  return knots;
}

QrTradeoff tradeoff_from_json(const Json& j, double q_max) {
  std::vector<QrPoint> pts;
  for (const auto& k : j) {
    if (!k.is_array() || k.size() != 2) throw Error(Errc::Config, "knots must be [quality, rate] pairs");
    pts.push_back({k[0].get<double>(), k[1].get<double>()});
  }
  QrTradeoff t(std::move(pts), q_max);
  auto v = validate_tradeoff(t);
  if (!v.empty()) throw Error(Errc::Config, "invalid tradeoff: " + v.front().detail);
  return t;
}

Json trace_to_json(const VideoTrace& v) {
  Json segs = Json::array();
  for (const auto& s : v.segments)
    segs.push_back({{"l_seconds", s.length}, {"knots", tradeoff_to_json(*s.tradeoff)}, {"available_q", s.available_q}});
  return {{"client", v.client}, {"segments", segs}};
}

VideoTrace trace_from_json(const Json& j, double q_max) {
  VideoTrace v;
  v.client = j.value("client", 0);
  int idx = 1;
  TradeoffPtr prev;
  for (const auto& s : j.at("segments")) {
    Segment seg;
    seg.index = idx++;
    seg.length = s.at("l_seconds").get<double>();
    auto t = tradeoff_from_json(s.at("knots"), q_max);
    // consecutive identical tradeoffs share storage
    if (prev && *prev == t)
      seg.tradeoff = prev;
    else
      seg.tradeoff = prev = std::make_shared<QrTradeoff>(std::move(t));
    if (s.contains("available_q")) seg.available_q = s.at("available_q").get<std::vector<double>>();
    v.segments.push_back(std::move(seg));
  }
  validate_trace(v);
  return v;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Config, "cannot open file: " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(Errc::Config, "cannot parse " + path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write file: " + path);
  out << text;
}

std::vector<VideoTrace> load_traces(const std::string& path, double q_max) {
  Json j = read_json_file(path);
  std::vector<VideoTrace> out;
  const Json& arr = j.is_array() ? j : j.at("clients");
  for (const auto& c : arr) out.push_back(trace_from_json(c, q_max));
  if (out.empty()) throw Error(Errc::Config, "trace file has no clients: " + path);
  return out;
}

void save_traces(const std::string& path, const std::vector<VideoTrace>& traces) {
  Json arr = Json::array();
  for (const auto& t : traces) arr.push_back(trace_to_json(t));
  write_text_file(path, Json{{"clients", arr}}.dump(1) + "\n");
}

std::vector<std::vector<double>> load_peak_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Config, "cannot open trace file: " + path);
  std::string line;
  std::getline(in, line);
  std::map<int, std::map<long, double>> cols;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b, c;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c))
      throw Error(Errc::Config, "malformed peak row in " + path);
    cols[std::stoi(b)][std::stol(a)] = std::stod(c);
  }
  std::vector<std::vector<double>> out;
  for (auto& [client, series] : cols) {
    std::vector<double> v;
    for (auto& [slot, x] : series) v.push_back(x);
    out.push_back(std::move(v));
  }
  if (out.empty()) throw Error(Errc::Config, "peak file has no rows: " + path);
  return out;
}

void write_peak_csv(std::ostream& os, const std::vector<std::vector<double>>& per_client) {
  os << "slot,client,peak_bits\n";
  std::size_t len = 0;
  for (const auto& v : per_client) len = std::max(len, v.size());
  char buf[64];
  for (std::size_t k = 0; k < len; ++k)
    for (std::size_t i = 0; i < per_client.size(); ++i)
      if (k < per_client[i].size()) {
        std::snprintf(buf, sizeof buf, "%.17g", per_client[i][k]);
        os << k << ',' << i << ',' << buf << '\n';
      }
}

Json preferences_to_json(const Preferences& p) {
  return {{"beta_bar", p.beta_bar}, {"p_bar", p.p_bar}, {"p_d", p.p_d}, {"q_max", p.q_max}};
}

Preferences preferences_from_json(const Json& j, const Preferences& d) {
  Preferences p = d;
  p.beta_bar = j.value("beta_bar", d.beta_bar);
  p.p_bar = j.value("p_bar", d.p_bar);
  p.p_d = j.value("p_d", d.p_d);
  p.q_max = j.value("q_max", d.q_max);
  if (!(p.beta_bar > -1.0)) throw Error(Errc::Config, "beta_bar must exceed -1");
  if (!(p.q_max > 0.0)) throw Error(Errc::Config, "q_max must be positive");
  return p;
}

Json utility_to_json(const UtilitySpec& u) {
  Json j;
  j["ue"] = {{"kind", u.ue.kind == UeSpec::Kind::Identity ? "identity" : "alpha_fair"},
             {"alpha", u.ue.alpha}, {"delta", u.ue.delta}, {"e_min", u.ue.e_min}};
  j["uv"] = {{"kind", u.uv.kind == UvSpec::Kind::Linear ? "linear" : "quadratic"}, {"eta", u.uv.eta}, {"eta2", u.uv.eta2}};
  j["uq"] = {{"kind", u.uq.identity() ? "identity" : "log"}, {"kappa", u.uq.kappa}};
  Json hb = {{"h0", u.hb.h0}, {"scale", u.hb.scale}, {"floor", u.hb.floor}};
  hb["knee"] = std::isinf(u.hb.knee) ? Json(nullptr) : Json(u.hb.knee);
  j["hb"] = hb;
  j["hd"] = {{"slope", u.hd.slope}, {"floor", u.hd.floor}};
  return j;
}

UtilitySpec utility_from_json(const Json& j, const UtilitySpec& d) {
  UtilitySpec u = d;
  if (j.contains("ue")) {
    const Json& e = j["ue"];
    std::string k = e.value("kind", u.ue.kind == UeSpec::Kind::Identity ? "identity" : "alpha_fair");
    if (k == "identity") u.ue.kind = UeSpec::Kind::Identity;
    else if (k == "alpha_fair") u.ue.kind = UeSpec::Kind::AlphaFair;
    else throw Error(Errc::Config, "unknown ue kind '" + k + "'");
    u.ue.alpha = e.value("alpha", u.ue.alpha);
    u.ue.delta = e.value("delta", u.ue.delta);
    u.ue.e_min = e.value("e_min", u.ue.e_min);
  }
  if (j.contains("uv")) {
    const Json& e = j["uv"];
    std::string k = e.value("kind", u.uv.kind == UvSpec::Kind::Linear ? "linear" : "quadratic");
    if (k == "linear") u.uv.kind = UvSpec::Kind::Linear;
    else if (k == "quadratic") u.uv.kind = UvSpec::Kind::Quadratic;
    else throw Error(Errc::Config, "unknown uv kind '" + k + "'");
    u.uv.eta = e.value("eta", u.uv.eta);
    u.uv.eta2 = e.value("eta2", u.uv.eta2);
    if (!(u.uv.eta > 0.0)) throw Error(Errc::Config, "eta must be positive");
  }
  if (j.contains("uq")) {
    const Json& e = j["uq"];
    std::string k = e.value("kind", u.uq.identity() ? "identity" : "log");
    if (k == "identity") u.uq.kind = UqSpec::Kind::Identity;
    else if (k == "log") u.uq.kind = UqSpec::Kind::Log;
    else throw Error(Errc::Config, "unknown uq kind '" + k + "'");
    u.uq.kappa = e.value("kappa", u.uq.kappa);
  }
  if (j.contains("hb")) {
    const Json& e = j["hb"];
    u.hb.h0 = e.value("h0", u.hb.h0);
    u.hb.scale = e.value("scale", u.hb.scale);
    u.hb.floor = e.value("floor", u.hb.floor);
    if (e.contains("knee")) u.hb.knee = e["knee"].is_null() ? std::numeric_limits<double>::infinity() : e["knee"].get<double>();
  }
  if (j.contains("hd")) {
    u.hd.slope = j["hd"].value("slope", u.hd.slope);
    u.hd.floor = j["hd"].value("floor", u.hd.floor);
  }
  return u;
}

namespace {

Json params_to_json(const ClientParams& p) {
  return {{"m", p.m}, {"mu", p.mu}, {"v", p.v}, {"b", p.b}, {"d", p.d},
          {"lambda", p.lambda}, {"sigma", p.sigma}, {"epsilon", p.epsilon}};
}

}  // namespace

Json outcome_to_json(const SimOutcome& o) {
  Json clients = Json::array();
  for (const auto& c : o.clients) {
    Json segs = Json::array();
    for (const auto& s : c.segments)
      segs.push_back({s.segment, s.request_slot, s.complete_slot, s.t_complete, s.q, s.length, s.size_bits, s.b_request});
    clients.push_back({{"client", c.client},
                       {"mean_q", c.mean_q},
                       {"var_q", c.var_q},
                       {"qoe", c.qoe},
                       {"qoe1", c.qoe1},
                       {"qoe2", c.qoe2},
                       {"rebuffer_realized", c.rebuffer_realized},
                       {"rebuffer_estimate", c.rebuffer_estimate},
                       {"cost_per_second", c.cost_per_second},
                       {"stall_seconds", c.stall_seconds},
                       {"alloc_bits", c.alloc_bits},
                       {"slots_to_complete", c.slots_to_complete},
                       {"invariant_violations", c.invariant_violations},
                       {"final_params", params_to_json(c.final_params)},
                       {"segment_columns", {"segment", "request_slot", "complete_slot", "t_complete", "q", "length", "size_bits", "b_request"}},
                       {"segments", segs}});
  }
  return {{"slots", o.slots},
          {"phi", o.phi},
          {"fairness", o.fairness},
          {"invariant_violations", o.invariant_violations},
          {"clients", clients}};
}

OracleInstance instance_from_json(const Json& j) {
  OracleInstance inst;
  inst.model.tau_slot = j.value("tau_slot", 0.01);
  const Preferences pdef = j.contains("preferences") ? preferences_from_json(j["preferences"]) : Preferences{};
  const UtilitySpec udef = j.contains("utility") ? utility_from_json(j["utility"]) : UtilitySpec{};
  for (const auto& c : j.at("constraints")) {
    auto peaks = c.at("peaks").get<std::vector<double>>();
    std::vector<double> floors = c.contains("r_min") ? c["r_min"].get<std::vector<double>>()
                                                     : std::vector<double>(peaks.size(), 0.0);
    inst.model.constraints.push_back({SlotConstraint::linear(peaks, floors), c.at("prob").get<double>()});
  }
  for (const auto& c : j.at("clients")) {
    Preferences pf = c.contains("preferences") ? preferences_from_json(c["preferences"], pdef) : pdef;
    UtilitySpec u = c.contains("utility") ? utility_from_json(c["utility"], udef) : udef;
    ClientModel cm;
    for (const auto& e : c.at("entries")) {
      FlEntry fe;
      fe.f = std::make_shared<QrTradeoff>(tradeoff_from_json(e.at("knots"), pf.q_max));
      fe.length = e.value("l_seconds", 1.0);
      fe.prob = e.at("prob").get<double>();
      cm.entries.push_back(fe);
    }
    inst.model.clients.push_back(std::move(cm));
    inst.prefs.push_back(pf);
    inst.u.push_back(u);
  }
  validate_model(inst.model);
  return inst;
}

Json instance_to_json(const OracleInstance& inst) {
  Json cons = Json::array();
  for (const auto& c : inst.model.constraints)
    cons.push_back({{"peaks", c.c.peaks()}, {"r_min", c.c.r_min()}, {"prob", c.prob}});
  Json clients = Json::array();
  for (std::size_t i = 0; i < inst.model.clients.size(); ++i) {
    Json entries = Json::array();
    for (const auto& e : inst.model.clients[i].entries)
      entries.push_back({{"knots", tradeoff_to_json(*e.f)}, {"l_seconds", e.length}, {"prob", e.prob}});
    clients.push_back({{"preferences", preferences_to_json(inst.prefs[i])},
                       {"utility", utility_to_json(inst.u[i])},
                       {"entries", entries}});
  }
  return {{"tau_slot", inst.model.tau_slot}, {"constraints", cons}, {"clients", clients}};
}

Json solution_to_json(const OptstatSolution& s) {
  Json clients = Json::array();
  for (const auto& c : s.clients)
    clients.push_back({{"q", c.q}, {"gamma", c.gamma}, {"gamma_bar", c.gamma_bar}, {"b", c.b}, {"d", c.d},
                       {"m", c.m}, {"mu", c.mu}, {"v", c.v}, {"e", c.e}, {"sigma", c.sigma},
                       {"lambda", c.lambda}, {"rho", c.rho}});
  return {{"value", s.value}, {"kkt_residual", s.kkt_residual}, {"iterations", s.iterations},
          {"r", s.r}, {"chi", s.chi}, {"omega", s.omega}, {"clients", clients}};
}

OptstatSolution solution_from_json(const Json& j) {
  OptstatSolution s;
  s.value = j.at("value").get<double>();
  s.kkt_residual = j.value("kkt_residual", 0.0);
  s.iterations = j.value("iterations", 0);
  s.r = j.at("r").get<std::vector<std::vector<double>>>();
  s.chi = j.at("chi").get<std::vector<double>>();
  s.omega = j.at("omega").get<std::vector<std::vector<double>>>();
  for (const auto& c : j.at("clients")) {
    OracleClient oc;
    oc.q = c.at("q").get<std::vector<double>>();
    oc.gamma = c.at("gamma").get<std::vector<double>>();
    oc.gamma_bar = c.at("gamma_bar").get<std::vector<double>>();
    oc.b = c.at("b").get<double>();
    oc.d = c.at("d").get<double>();
    oc.m = c.value("m", 0.0);
    oc.mu = c.value("mu", 0.0);
    oc.v = c.value("v", 0.0);
    oc.e = c.value("e", 0.0);
    oc.sigma = c.value("sigma", 0.0);
    oc.lambda = c.value("lambda", 0.0);
    oc.rho = c.value("rho", 0.0);
    s.clients.push_back(std::move(oc));
  }
  return s;
}

Json kkt_to_json(const KktReport& r) {
  return {{"stationarity", r.stationarity}, {"complementarity", r.complementarity},
          {"feasibility", r.feasibility}, {"max", r.max()}};
}

}  // namespace nova
