#include "nova/tracegen.hpp"

#include <algorithm>
#include <cmath>

#include "nova/error.hpp"

namespace nova {

void validate_peak_spec(const PeakRateSpec& s) {
  if (s.support.empty() || s.support.size() != s.probs.size())
    throw Error(Errc::InvalidArgument, "peak support and probabilities must match and be non-empty");
  double total = 0.0;
  for (std::size_t i = 0; i < s.support.size(); ++i) {
    if (!(s.support[i] > 0.0)) throw Error(Errc::InvalidArgument, "peak support must be positive");
    if (!(s.probs[i] > 0.0)) throw Error(Errc::InvalidArgument, "probabilities must be positive");
    total += s.probs[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error(Errc::InvalidArgument, "probabilities must sum to 1");
  if (!(s.rho_corr >= 0.0 && s.rho_corr < 1.0)) throw Error(Errc::InvalidArgument, "persistence must be in [0,1)");
  if (!(s.scale_lo > 0.0 && s.scale_hi >= s.scale_lo)) throw Error(Errc::InvalidArgument, "bad scaling range");
}

PeakRateSpec default_peak_spec(double tau_slot, double lo_bps, double hi_bps, double median_bps,
                               double sigma_log, int bins) {
  PeakRateSpec s;
  const double a = std::log(lo_bps), b = std::log(hi_bps), mu = std::log(median_bps);
  double total = 0.0;
  for (int k = 0; k < bins; ++k) {
    double x = a + (b - a) * (k + 0.5) / bins;
    double z = (x - mu) / sigma_log;
    double w = std::exp(-0.5 * z * z);
    s.support.push_back(std::exp(x) * tau_slot);
    s.probs.push_back(w);
    total += w;
  }
  for (double& p : s.probs) p /= total;
  return s;
}

MarkovChain::MarkovChain(std::vector<double> probs, double rho_corr, std::uint64_t seed)
    : rho_(rho_corr), rng_(seed) {
  double acc = 0.0;
  for (double p : probs) {
    acc += p;
    cdf_.push_back(acc);
  }
  for (double& c : cdf_) c /= acc;
  cdf_.back() = 1.0;
}

std::size_t MarkovChain::draw() {
  double u = rng_.uniform();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
}

std::size_t MarkovChain::next() {
  if (!started_) {
    started_ = true;
    state_ = draw();
    return state_;
  }
  // always consume one variate for the stay decision so streams stay aligned
  double u = rng_.uniform();
  if (u >= rho_) state_ = draw();
  return state_;
}

std::vector<double> gen_peak_trace(const PeakRateSpec& spec, std::uint64_t seed, double scale) {
  validate_peak_spec(spec);
  MarkovChain chain(spec.probs, spec.rho_corr, seed);
  std::vector<double> out(static_cast<std::size_t>(std::max(spec.length, 0L)));
  for (double& x : out) x = scale * spec.support[chain.next()];
  return out;
}

double draw_client_scale(const PeakRateSpec& spec, std::uint64_t seed) {
  Rng r(seed);
  return r.uniform(spec.scale_lo, spec.scale_hi);
}

QrTradeoff make_tradeoff(const VideoSpec& spec, double theta) {
  std::vector<QrPoint> pts;
  for (double r : spec.ladder_bps) pts.push_back({spec.q_max * (1.0 - std::exp(-r / theta)), r});
  if (spec.full_range) {
    const QrPoint p0 = pts[0], p1 = pts[1];
    double s0 = (p1.rate - p0.rate) / (p1.q - p0.q);
    double f0 = std::max(p0.rate - s0 * p0.q, 0.5 * p0.rate);
    pts.insert(pts.begin(), QrPoint{0.0, f0});
    const QrPoint pa = pts[pts.size() - 2], pb = pts.back();
    double sl = (pb.rate - pa.rate) / (pb.q - pa.q);
    if (pb.q < spec.q_max) pts.push_back({spec.q_max, pb.rate + 2.0 * sl * (spec.q_max - pb.q)});
  }
  return QrTradeoff(std::move(pts), spec.q_max);
}

VideoTrace gen_video(const VideoSpec& spec, int segments, std::uint64_t seed, int client) {
  if (spec.ladder_bps.size() < 2 || !std::is_sorted(spec.ladder_bps.begin(), spec.ladder_bps.end()))
    throw Error(Errc::InvalidArgument, "ladder must hold at least two ascending rates");
  Rng rng(seed);
  VideoTrace v;
  v.client = client;
  TradeoffPtr shared;
  if (spec.jitter == 0.0) shared = std::make_shared<QrTradeoff>(make_tradeoff(spec, spec.theta_bps));
  for (int s = 1; s <= segments; ++s) {
    Segment seg;
    seg.index = s;
    seg.length = spec.length;
    if (shared) {
      seg.tradeoff = shared;
    } else {
      double theta = spec.theta_bps * std::exp(spec.jitter * rng.normal());
      seg.tradeoff = std::make_shared<QrTradeoff>(make_tradeoff(spec, theta));
    }
    // the ladder knots are the downloadable representations
    for (const auto& p : seg.tradeoff->points()) {
      bool on_ladder = std::find(spec.ladder_bps.begin(), spec.ladder_bps.end(), p.rate) != spec.ladder_bps.end();
      if (on_ladder) seg.available_q.push_back(p.q);
    }
    v.segments.push_back(std::move(seg));
  }
  return v;
}

VideoTrace gen_stationary_video(const std::vector<FlEntry>& support, int segments, std::uint64_t seed, int client) {
  if (support.empty()) throw Error(Errc::InvalidArgument, "empty segment support");
  std::vector<double> probs;
  for (const auto& e : support) probs.push_back(e.prob);
  MarkovChain chain(probs, 0.0, seed);
  VideoTrace v;
  v.client = client;
  for (int s = 1; s <= segments; ++s) {
    const FlEntry& e = support[chain.next()];
    Segment seg;
    seg.index = s;
    seg.length = e.length;
    seg.tradeoff = e.f;
    seg.available_q = e.available_q;
    v.segments.push_back(std::move(seg));
  }
  return v;
}

}  // namespace nova
