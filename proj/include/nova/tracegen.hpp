#pragma once

#include <cstdint>
#include <vector>

#include "nova/qr_model.hpp"
#include "nova/rng.hpp"

namespace nova {

struct PeakRateSpec {
  std::vector<double> support;  // bits per slot
  std::vector<double> probs;
  double rho_corr = 0.95;       // probability of keeping the previous value
  long length = 0;              // slots
  double scale_lo = 0.5;        // per-client scaling range
  double scale_hi = 1.5;
};

void validate_peak_spec(const PeakRateSpec& s);

// Discretized log-normal over [lo_bps, hi_bps], converted to bits per slot.
PeakRateSpec default_peak_spec(double tau_slot, double lo_bps = 0.5e6, double hi_bps = 4e6,
                               double median_bps = 1.5e6, double sigma_log = 0.6, int bins = 16);

// Lazy stay-or-redraw chain; the marginal is exactly the spec marginal.
class MarkovChain {
 public:
  MarkovChain(std::vector<double> probs, double rho_corr, std::uint64_t seed);
  std::size_t next();

 private:
  std::size_t draw();
  std::vector<double> cdf_;
  double rho_;
  Rng rng_;
  std::size_t state_ = 0;
  bool started_ = false;
};

std::vector<double> gen_peak_trace(const PeakRateSpec& spec, std::uint64_t seed, double scale = 1.0);

double draw_client_scale(const PeakRateSpec& spec, std::uint64_t seed);

struct VideoSpec {
  std::vector<double> ladder_bps{0.1e6, 0.2e6, 0.3e6, 0.6e6, 0.9e6, 1.5e6};
  double q_max = 100.0;
  double theta_bps = 0.5e6;  // content complexity: q = q_max (1 - exp(-rate / theta))
  double jitter = 0.3;       // log-normal spread of theta across segments
  double length = 1.0;       // seconds per segment
  bool full_range = false;   // add anchor knots at 0 and q_max for continuous adaptation
};

QrTradeoff make_tradeoff(const VideoSpec& spec, double theta);

VideoTrace gen_video(const VideoSpec& spec, int segments, std::uint64_t seed, int client = 0);

struct FlEntry {
  TradeoffPtr f;
  double length = 1.0;
  double prob = 1.0;
  std::vector<double> available_q;
};

// i.i.d. draws of (tradeoff, length) from a finite support.
VideoTrace gen_stationary_video(const std::vector<FlEntry>& support, int segments, std::uint64_t seed,
                                int client = 0);

}  // namespace nova
