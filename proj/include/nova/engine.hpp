#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "nova/adaptation.hpp"
#include "nova/allocation.hpp"
#include "nova/qr_model.hpp"
#include "nova/tracegen.hpp"
#include "nova/utility.hpp"

namespace nova {

enum class AllocatorKind { Nova, Pf, Shared, Fixed };
enum class AdapterKind { Qnova, QnovaFinite, Rm };
enum class Signaling { Ideal, EndOfSeg };

const char* allocator_name(AllocatorKind k);
const char* adapter_name(AdapterKind k);

struct Algorithm {
  AllocatorKind allocator = AllocatorKind::Nova;
  AdapterKind adapter = AdapterKind::QnovaFinite;
};

// "nova", "nova-cont", "pf-qnova", "pf-rm", or "<allocator>:<adapter>".
Algorithm parse_algorithm(const std::string& s);

struct EngineConfig {
  double tau_slot = 0.01;
  double epsilon = 0.05;      // step size floor
  double eps_boost = 4.0;     // warm-start multiplier (1 disables)
  int boost_segments = 50;
  long boost_slots = 2000;
  double eps_decay = 0.95;    // per-segment decay after the warm-start phase
  double startup_delay = 3.0;
  double buffer_limit = 0.0;  // seconds; 0 disables the throttle
  double throttle_c = 1.0;    // s^2
  Signaling signaling = Signaling::Ideal;
  int signal_latency = 0;     // slots
  Algorithm algorithm;
  double pf_epsilon = 0.01;
  double p_v = 1.0;           // video priority for the shared allocator
  RmThresholds rm;
  bool loop_video = true;
  long horizon_segments = 0;  // stop once every client completed this many
  long horizon_slots = 0;     // or after this many slots
  long max_slots = 0;         // safety cap for segment horizons (0: 100x the content)
  bool record_slots = false;
  bool check_invariants = true;
};

struct ClientSetup {
  Preferences pref;
  UtilitySpec u;
  double r_min = 0.0;  // bits per slot
  double m0 = 25.0;
  double b0 = 2.0;     // 40 seconds of deficit at the default h^B scale
  double d0 = 1.0;
  VideoTrace video;
};

// Per-slot peak rates (bits per slot) for every client, video first.
class PeakProcess {
 public:
  virtual ~PeakProcess() = default;
  virtual std::size_t size() const = 0;
  virtual void next(std::vector<double>& peaks) = 0;
};

// Independent lazy Markov chains, one per client, each scaled.
class MarkovPeaks : public PeakProcess {
 public:
  MarkovPeaks(const PeakRateSpec& spec, std::vector<double> scales, std::uint64_t seed);
  std::size_t size() const override { return chains_.size(); }
  void next(std::vector<double>& peaks) override;

 private:
  std::vector<double> support_;
  std::vector<double> scales_;
  std::vector<MarkovChain> chains_;
};

// One chain over a finite set of joint peak vectors.
class JointPeaks : public PeakProcess {
 public:
  JointPeaks(std::vector<std::vector<double>> support, std::vector<double> probs, double rho_corr,
             std::uint64_t seed);
  std::size_t size() const override { return support_.front().size(); }
  void next(std::vector<double>& peaks) override;

 private:
  std::vector<std::vector<double>> support_;
  MarkovChain chain_;
};

// Fixed per-client sequences, looped.
class TablePeaks : public PeakProcess {
 public:
  explicit TablePeaks(std::vector<std::vector<double>> per_client);
  std::size_t size() const override { return table_.size(); }
  void next(std::vector<double>& peaks) override;

 private:
  std::vector<std::vector<double>> table_;
  std::size_t k_ = 0;
};

struct SegmentRecord {
  int segment = 0;          // 1-based download ordinal
  long request_slot = 0;
  long complete_slot = 0;
  double t_complete = 0.0;  // seconds
  double q = 0.0;
  double length = 0.0;
  double size_bits = 0.0;
  double b_request = 0.0;
};

struct SlotRecord {
  long slot = 0;
  int client = 0;
  double r = 0.0;
  double b = 0.0;
  double b_ctrl = 0.0;
};

struct ClientOutcome {
  int client = 0;
  std::vector<SegmentRecord> segments;  // first S completions
  ClientParams final_params;
  double mean_q = 0.0, var_q = 0.0, qoe = 0.0, qoe1 = 0.0, qoe2 = 0.0;
  double rebuffer_realized = 0.0;
  double rebuffer_estimate = 0.0;
  double cost_per_second = 0.0;
  double stall_seconds = 0.0;   // at completion of segment S
  double alloc_bits = 0.0;      // through the completion slot of segment S
  long slots_to_complete = 0;
  long invariant_violations = 0;
};

struct SimOutcome {
  std::vector<ClientOutcome> clients;
  long slots = 0;
  double phi = 0.0;
  double fairness = 0.0;
  long invariant_violations = 0;
  std::vector<SlotRecord> slot_log;
};

// Applies the post-choice tracker updates for a segment of length l whose
// chosen representation has rate `rate` (bits/s).
void update_params(ClientParams& p, const UtilitySpec& u, double q, double l, double rate);

double throttle_delay(double pb_cur, double pb_lim, double c);

class Engine {
 public:
  Engine(EngineConfig cfg, std::vector<ClientSetup> clients, std::unique_ptr<PeakProcess> peaks,
         std::size_t data_users = 0);
  ~Engine();
  Engine(Engine&&) noexcept;

  void step_slot();
  bool done() const;
  long slot() const;
  const ClientParams& params(std::size_t i) const;
  double controller_b(std::size_t i) const;
  double buffer(std::size_t i) const;
  // stall + played + elapsed startup delay, minus wall-clock time
  double playback_balance(std::size_t i) const;
  long segments_requested(std::size_t i) const;
  double seconds_requested(std::size_t i) const;
  SimOutcome outcome() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SimOutcome run(const EngineConfig& cfg, std::vector<ClientSetup> clients, std::unique_ptr<PeakProcess> peaks,
               std::size_t data_users = 0);

}  // namespace nova
