#include "nova/engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "nova/error.hpp"
#include "nova/metrics.hpp"

namespace nova {

const char* allocator_name(AllocatorKind k) {
  switch (k) {
    case AllocatorKind::Nova: return "nova";
    case AllocatorKind::Pf: return "pf";
    case AllocatorKind::Shared: return "shared";
    case AllocatorKind::Fixed: return "fixed";
  }
  return "?";
}

const char* adapter_name(AdapterKind k) {
  switch (k) {
    case AdapterKind::Qnova: return "qnova";
    case AdapterKind::QnovaFinite: return "qnova_finite";
    case AdapterKind::Rm: return "rm";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& s) {
  if (s == "nova") return {AllocatorKind::Nova, AdapterKind::QnovaFinite};
  if (s == "nova-cont") return {AllocatorKind::Nova, AdapterKind::Qnova};
  if (s == "pf-qnova") return {AllocatorKind::Pf, AdapterKind::QnovaFinite};
  if (s == "pf-rm") return {AllocatorKind::Pf, AdapterKind::Rm};
  auto colon = s.find(':');
  if (colon == std::string::npos) throw Error(Errc::Config, "unknown algorithm '" + s + "'");
  std::string a = s.substr(0, colon), b = s.substr(colon + 1);
  Algorithm alg;
  if (a == "nova") alg.allocator = AllocatorKind::Nova;
  else if (a == "pf") alg.allocator = AllocatorKind::Pf;
  else if (a == "shared") alg.allocator = AllocatorKind::Shared;
  else if (a == "fixed") alg.allocator = AllocatorKind::Fixed;
  else throw Error(Errc::Config, "unknown allocator '" + a + "'");
  if (b == "qnova") alg.adapter = AdapterKind::Qnova;
  else if (b == "qnova_finite") alg.adapter = AdapterKind::QnovaFinite;
  else if (b == "rm") alg.adapter = AdapterKind::Rm;
  else throw Error(Errc::Config, "unknown adapter '" + b + "'");
  return alg;
}

MarkovPeaks::MarkovPeaks(const PeakRateSpec& spec, std::vector<double> scales, std::uint64_t seed)
    : support_(spec.support), scales_(std::move(scales)) {
  validate_peak_spec(spec);
  for (std::size_t i = 0; i < scales_.size(); ++i)
    chains_.emplace_back(spec.probs, spec.rho_corr, stream_seed(seed, 0x7065616b, i));
}

void MarkovPeaks::next(std::vector<double>& peaks) {
  peaks.resize(chains_.size());
  for (std::size_t i = 0; i < chains_.size(); ++i) peaks[i] = scales_[i] * support_[chains_[i].next()];
}

JointPeaks::JointPeaks(std::vector<std::vector<double>> support, std::vector<double> probs, double rho_corr,
                       std::uint64_t seed)
    : support_(std::move(support)), chain_(probs, rho_corr, seed) {
  if (support_.empty() || support_.size() != probs.size())
    throw Error(Errc::InvalidArgument, "joint peak support and probabilities must match");
  for (const auto& v : support_)
    if (v.size() != support_.front().size()) throw Error(Errc::InvalidArgument, "joint peak vectors differ in size");
}

void JointPeaks::next(std::vector<double>& peaks) { peaks = support_[chain_.next()]; }

TablePeaks::TablePeaks(std::vector<std::vector<double>> per_client) : table_(std::move(per_client)) {
  if (table_.empty()) throw Error(Errc::InvalidArgument, "empty peak table");
  for (const auto& t : table_)
    if (t.empty()) throw Error(Errc::InvalidArgument, "empty peak sequence");
}

void TablePeaks::next(std::vector<double>& peaks) {
  peaks.resize(table_.size());
  for (std::size_t i = 0; i < table_.size(); ++i) peaks[i] = table_[i][k_ % table_[i].size()];
  ++k_;
}

void update_params(ClientParams& p, const UtilitySpec& u, double q, double l, double rate) {
  const double eps = p.epsilon;
  const double a = u.ue.d1(p.mu - u.uv.value(p.v));
  const double bv = u.uv.d1(p.v);
  const double ratio = l / p.lambda;
  const double m_old = p.m;
  p.m = p.m + eps * a * bv * (ratio * q - p.m);
  p.mu = p.mu + eps * (ratio * u.uq.value(q) - p.mu);
  p.v = p.v + eps * (ratio * (q - m_old) * (q - m_old) - p.v);
  p.b = std::max(p.b - eps * l, u.hb.floor);
  if (p.pref.cost_constrained())
    p.d = std::max(p.d + eps * (p.pref.p_d * l * rate / p.pref.p_bar - p.lambda), u.hd.floor);
  p.sigma = p.sigma + eps * (l * rate / p.lambda - p.sigma);
  p.lambda = p.lambda + eps * (l - p.lambda);
}

double throttle_delay(double pb_cur, double pb_lim, double c) {
  if (!(pb_lim > 0.0)) return 0.0;
  if (pb_cur >= pb_lim) {
    // wait for playback to bring the buffer back under the limit first
    double back = 0.95 * pb_lim;
    return (pb_cur - back) + throttle_delay(back, pb_lim, c);
  }
  return c * std::max(1.0 / (pb_lim - pb_cur) - 1.0 / (0.5 * pb_lim), 0.0);
}

struct Engine::Impl {
  struct Client {
    ClientSetup setup;
    ClientParams p;
    double lmin = 0.0, lmax = 0.0;
    long requested = 0, completed = 0;
    double requested_secs = 0.0;
    bool out_of_video = false;
    // in-flight segment
    double rem = 0.0, cur_q = 0.0, cur_l = 0.0, cur_size = 0.0, cur_b = 0.0;
    long cur_req_slot = 0;
    double wait_until = 0.0;
    // playback
    double buffer = 0.0, stall = 0.0, played = 0.0;
    // controller side
    double b_ctrl = 0.0;
    std::deque<std::pair<long, double>> msgs;
    RmState rm;
    double rho = 0.0;
    std::vector<SegmentRecord> records;
    double alloc_bits = 0.0;
    double alloc_snap = 0.0, stall_snap = 0.0;
    long slot_snap = 0;
    long violations = 0;
  };

  EngineConfig cfg;
  std::unique_ptr<PeakProcess> peaks;
  std::size_t nd = 0;
  std::vector<Client> cl;
  std::vector<double> rho_data;
  std::vector<double> pk, rmin, r;
  long k = 0;
  long target = 0;  // segment horizon, 0 when slot-bounded
  long max_slots = 0;
  std::vector<SlotRecord> log;

  double now(double t) const { return static_cast<double>(k) * cfg.tau_slot + t; }

  void check(Client& c) {
    if (!cfg.check_invariants) return;
    const double qmax = c.p.pref.q_max;
    const double mb = qmax * c.lmax / c.lmin;
    const ClientParams& p = c.p;
    bool ok = p.m >= 0.0 && p.m <= mb && p.mu >= 0.0 && p.mu <= mb && p.v >= 0.0 &&
              p.v <= (c.lmax / c.lmin) * mb * mb && p.b >= c.setup.u.hb.floor && p.d >= c.setup.u.hd.floor &&
              p.lambda >= c.lmin && p.lambda <= c.lmax;
    if (!ok) ++c.violations;
  }

  std::vector<double> choices(const Client& c, const Segment& seg) const {
    if (!seg.available_q.empty()) return seg.available_q;
    std::vector<double> q;
    for (const auto& pt : seg.tradeoff->points())
      if (pt.q >= 0.0 && pt.q <= c.p.pref.q_max) q.push_back(pt.q);
    return q;
  }

  void request(std::size_t i, double t_abs, long emit_slot) {
    Client& c = cl[i];
    const auto& segs = c.setup.video.segments;
    const std::size_t idx = static_cast<std::size_t>(c.requested);
    if (idx >= segs.size() && !cfg.loop_video) {
      c.out_of_video = true;
      return;
    }
    const Segment& seg = segs[idx % segs.size()];
    const QrTradeoff& f = *seg.tradeoff;
    double q = 0.0;
    switch (cfg.algorithm.adapter) {
      case AdapterKind::Qnova: q = solve_qnova(c.p, c.setup.u, f).q; break;
      case AdapterKind::QnovaFinite: q = solve_qnova_finite(c.p, c.setup.u, f, choices(c, seg)); break;
      case AdapterKind::Rm: {
        auto ch = choices(c, seg);
        RmChoice pick = select_rm(c.buffer, c.rho / cfg.tau_slot, f, ch, c.p.pref, c.rm, cfg.rm);
        c.rm = pick.state;
        q = ch[pick.index];
        break;
      }
    }
    const double rate = f.rate(q);
    c.cur_b = c.p.b;
    const double eps = c.p.epsilon;
    update_params(c.p, c.setup.u, q, seg.length, rate);
    check(c);
    if (cfg.signaling == Signaling::EndOfSeg) c.msgs.emplace_back(emit_slot + 1 + cfg.signal_latency, eps * seg.length);
    ++c.requested;
    c.requested_secs += seg.length;
    if (c.requested >= cfg.boost_segments && k >= cfg.boost_slots)
      c.p.epsilon = std::max(c.p.epsilon * cfg.eps_decay, cfg.epsilon);
    c.cur_q = q;
    c.cur_l = seg.length;
    c.cur_size = seg.length * rate;
    c.rem = c.cur_size;
    c.cur_req_slot = std::max(emit_slot, 0L);
    if (cfg.buffer_limit > 0.0) c.wait_until = t_abs + throttle_delay(c.buffer, cfg.buffer_limit, cfg.throttle_c);
  }

  void play(Client& c, double a, double b) {
    a = std::max(a, cfg.startup_delay);
    if (b <= a) return;
    double dt = b - a;
    double x = std::min(c.buffer, dt);
    c.buffer -= x;
    c.played += x;
    if (!c.out_of_video) c.stall += dt - x;
  }

  void complete(std::size_t i, double t_abs, double r_slot) {
    Client& c = cl[i];
    c.buffer += c.cur_l;
    ++c.completed;
    if (target == 0 || c.completed <= target) {
      SegmentRecord rec;
      rec.segment = static_cast<int>(c.completed);
      rec.request_slot = c.cur_req_slot;
      rec.complete_slot = k;
      rec.t_complete = t_abs;
      rec.q = c.cur_q;
      rec.length = c.cur_l;
      rec.size_bits = c.cur_size;
      rec.b_request = c.cur_b;
      c.records.push_back(rec);
      c.stall_snap = c.stall;
      c.alloc_snap = c.alloc_bits + r_slot;
      c.slot_snap = k + 1;
    }
    request(i, t_abs, k);
  }

  void advance_client(std::size_t i, double r_slot) {
    Client& c = cl[i];
    const double tau = cfg.tau_slot;
    const double T0 = now(0.0);
    double left = r_slot;  // bits still deliverable in this slot
    double t = 0.0;
    auto time_at = [&](double l) { return r_slot > 0.0 ? tau * (1.0 - l / r_slot) : tau; };
    while (t < tau) {
      if (c.out_of_video) {
        play(c, T0 + t, T0 + tau);
        break;
      }
      if (c.wait_until > T0 + t) {
        double tw = std::min(c.wait_until - T0, tau);
        play(c, T0 + t, T0 + tw);
        t = tw;
        left = r_slot * (1.0 - t / tau);
        continue;
      }
      if (left <= 0.0) {
        play(c, T0 + t, T0 + tau);
        break;
      }
      if (c.rem <= left) {
        left -= c.rem;
        double tc = std::min(std::max(time_at(left), t), tau);
        play(c, T0 + t, T0 + tc);
        t = tc;
        c.rem = 0.0;
        complete(i, T0 + t, r_slot);
      } else {
        c.rem -= left;
        left = 0.0;
        play(c, T0 + t, T0 + tau);
        break;
      }
    }
  }

  void allocate() {
    const std::size_t n = cl.size(), nt = n + nd;
    peaks->next(pk);
    if (pk.size() != nt) throw Error(Errc::InvalidArgument, "peak process size differs from user count");
    if (k == 0) {
      for (std::size_t i = 0; i < n; ++i) cl[i].rho = pk[i] / static_cast<double>(nt);
      for (std::size_t j = 0; j < nd; ++j) rho_data[j] = pk[n + j] / static_cast<double>(nt);
    }
    r.assign(nt, 0.0);
    auto bw = [&](std::size_t i) {
      const Client& c = cl[i];
      return c.setup.u.hb.value(cfg.signaling == Signaling::EndOfSeg ? c.b_ctrl : c.p.b);
    };
    SlotConstraint sc = SlotConstraint::linear(pk, rmin);
    switch (cfg.algorithm.allocator) {
      case AllocatorKind::Nova: {
        std::vector<double> w(nt, 0.0);
        for (std::size_t i = 0; i < n; ++i) w[i] = bw(i);
        for (std::size_t j = 0; j < nd; ++j) w[n + j] = pf_marginal(rho_data[j]);
        r = solve_rnova_linear(w, sc).r;
        break;
      }
      case AllocatorKind::Pf: {
        std::vector<double> rho(nt);
        for (std::size_t i = 0; i < n; ++i) rho[i] = cl[i].rho;
        for (std::size_t j = 0; j < nd; ++j) rho[n + j] = rho_data[j];
        r = solve_pf(rho, sc).r;
        break;
      }
      case AllocatorKind::Shared: {
        std::vector<double> w(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = bw(i);
        r = solve_shared(w, rho_data, nullptr, cfg.p_v, sc).r;
        break;
      }
      case AllocatorKind::Fixed: {
        double res = sc.residual_share();
        if (res < -1e-12) throw Error(Errc::InfeasibleFloor, "floors exceed the slot capacity");
        for (std::size_t i = 0; i < nt; ++i) r[i] = rmin[i] + std::max(res, 0.0) * pk[i] / static_cast<double>(nt);
        break;
      }
    }
  }

  void step() {
    const std::size_t n = cl.size();
    for (auto& c : cl) {
      while (!c.msgs.empty() && c.msgs.front().first <= k) {
        c.b_ctrl = std::max(c.b_ctrl - c.msgs.front().second, c.setup.u.hb.floor);
        c.msgs.pop_front();
      }
    }
    allocate();
    for (auto& c : cl) {
      if (c.out_of_video) continue;
      double inc = c.p.epsilon * cfg.tau_slot / (1.0 + c.p.pref.beta_bar);
      c.p.b += inc;
      c.b_ctrl += inc;
    }
    for (std::size_t i = 0; i < n; ++i) advance_client(i, r[i]);
    for (std::size_t i = 0; i < n; ++i) {
      Client& c = cl[i];
      c.alloc_bits += r[i];
      c.rho = update_ewma(c.rho, r[i], cfg.pf_epsilon);
      if (cfg.record_slots) log.push_back({k, static_cast<int>(i), r[i], c.p.b, c.b_ctrl});
    }
    for (std::size_t j = 0; j < nd; ++j) rho_data[j] = update_ewma(rho_data[j], r[n + j], cfg.pf_epsilon);
    ++k;
  }
};

Engine::Engine(EngineConfig cfg, std::vector<ClientSetup> clients, std::unique_ptr<PeakProcess> peaks,
               std::size_t data_users)
    : impl_(std::make_unique<Impl>()) {
  if (!(cfg.tau_slot > 0.0)) throw Error(Errc::InvalidArgument, "slot length must be positive");
  if (!(cfg.epsilon > 0.0)) throw Error(Errc::InvalidArgument, "step size must be positive");
  if (cfg.eps_boost < 1.0) throw Error(Errc::InvalidArgument, "warm-start multiplier must be at least 1");
  if (clients.empty()) throw Error(Errc::InvalidArgument, "no clients");
  if (!peaks) throw Error(Errc::InvalidArgument, "no peak process");
  if (peaks->size() != clients.size() + data_users)
    throw Error(Errc::InvalidArgument, "peak process size differs from user count");
  Impl& s = *impl_;
  s.cfg = cfg;
  s.peaks = std::move(peaks);
  s.nd = data_users;
  s.rho_data.assign(data_users, 1.0);
  s.target = cfg.horizon_segments;
  if (cfg.horizon_segments <= 0 && cfg.horizon_slots <= 0) s.target = static_cast<long>(clients.front().video.segments.size());
  double content = 0.0;
  for (auto& setup : clients) {
    validate_trace(setup.video);
    if (!cfg.loop_video && s.target > static_cast<long>(setup.video.segments.size()))
      throw Error(Errc::TraceExhausted, "video shorter than the segment horizon and looping is disabled");
    Impl::Client c;
    c.lmin = std::numeric_limits<double>::infinity();
    for (const auto& seg : setup.video.segments) {
      c.lmin = std::min(c.lmin, seg.length);
      c.lmax = std::max(c.lmax, seg.length);
    }
    double secs = 0.0;
    for (const auto& seg : setup.video.segments) secs += seg.length;
    content = std::max(content, secs * std::max(1.0, static_cast<double>(s.target) / setup.video.segments.size()));
    const Segment& first = setup.video.segments.front();
    c.p.pref = setup.pref;
    c.p.m = setup.m0;
    c.p.mu = setup.u.uq.value(setup.m0);
    c.p.v = 0.0;
    c.p.b = setup.b0;
    c.p.d = setup.d0;
    c.p.lambda = first.length;
    c.p.sigma = first.length * first.tradeoff->rate(first.tradeoff->q_lo());
    c.p.epsilon = cfg.epsilon * cfg.eps_boost;
    c.b_ctrl = setup.b0;
    c.setup = std::move(setup);
    s.cl.push_back(std::move(c));
    s.rmin.push_back(s.cl.back().setup.r_min);
  }
  for (std::size_t j = 0; j < data_users; ++j) s.rmin.push_back(0.0);
  s.max_slots = cfg.max_slots > 0 ? cfg.max_slots : static_cast<long>(100.0 * content / cfg.tau_slot) + 1000;
  for (std::size_t i = 0; i < s.cl.size(); ++i) s.request(i, 0.0, -1);
}

Engine::~Engine() = default;
Engine::Engine(Engine&&) noexcept = default;

void Engine::step_slot() { impl_->step(); }

bool Engine::done() const {
  const Impl& s = *impl_;
  if (s.cfg.horizon_slots > 0) return s.k >= s.cfg.horizon_slots;
  if (s.k >= s.max_slots) return true;
  for (const auto& c : s.cl)
    if (c.completed < s.target && !c.out_of_video) return false;
  return true;
}

long Engine::slot() const { return impl_->k; }
const ClientParams& Engine::params(std::size_t i) const { return impl_->cl.at(i).p; }
double Engine::controller_b(std::size_t i) const { return impl_->cl.at(i).b_ctrl; }
double Engine::buffer(std::size_t i) const { return impl_->cl.at(i).buffer; }
long Engine::segments_requested(std::size_t i) const { return impl_->cl.at(i).requested; }
double Engine::seconds_requested(std::size_t i) const { return impl_->cl.at(i).requested_secs; }

double Engine::playback_balance(std::size_t i) const {
  const Impl& s = *impl_;
  const auto& c = s.cl.at(i);
  double wall = s.now(0.0);
  return c.stall + c.played + std::min(wall, s.cfg.startup_delay) - wall;
}

SimOutcome Engine::outcome() const {
  const Impl& s = *impl_;
  SimOutcome out;
  out.slots = s.k;
  out.slot_log = s.log;
  std::vector<QualitySeries> series;
  std::vector<UtilitySpec> us;
  std::vector<double> q1;
  for (std::size_t i = 0; i < s.cl.size(); ++i) {
    const auto& c = s.cl[i];
    ClientOutcome co;
    co.client = static_cast<int>(i);
    co.segments = c.records;
    co.final_params = c.p;
    co.invariant_violations = c.violations;
    out.invariant_violations += c.violations;
    co.stall_seconds = c.stall_snap;
    co.alloc_bits = c.alloc_snap;
    co.slots_to_complete = c.slot_snap;
    if (!c.records.empty()) {
      QualitySeries qs;
      qs.client = co.client;
      double bits = 0.0, secs = 0.0;
      for (const auto& rec : c.records) {
        qs.q.push_back(rec.q);
        qs.l.push_back(rec.length);
        bits += rec.size_bits;
        secs += rec.length;
      }
      co.mean_q = mean_quality(qs);
      co.var_q = var_quality(qs);
      co.qoe = qoe(qs, c.setup.u);
      co.qoe1 = qoe1(qs);
      co.qoe2 = qs.q.size() >= 2 ? qoe2(qs) : co.qoe1;
      co.rebuffer_realized = realized_rebuffering(c.stall_snap, secs);
      co.rebuffer_estimate = c.alloc_snap > 0.0
                                 ? rebuffer_estimate(bits, secs, c.alloc_snap, c.slot_snap, s.cfg.tau_slot)
                                 : std::numeric_limits<double>::infinity();
      co.cost_per_second = cost_per_second(bits, secs, c.setup.pref.p_d);
      series.push_back(qs);
      us.push_back(c.setup.u);
      q1.push_back(co.qoe1);
    }
    out.clients.push_back(std::move(co));
  }
  if (!series.empty()) {
    out.phi = phi_total(series, us);
    double mean = 0.0;
    for (double x : q1) mean += x;
    out.fairness = mean != 0.0 ? fairness_ratio(q1) : 0.0;
  }
  return out;
}

SimOutcome run(const EngineConfig& cfg, std::vector<ClientSetup> clients, std::unique_ptr<PeakProcess> peaks,
               std::size_t data_users) {
  Engine e(cfg, std::move(clients), std::move(peaks), data_users);
  while (!e.done()) e.step_slot();
  return e.outcome();
}

}  // namespace nova
