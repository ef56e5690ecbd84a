#pragma once

#include <cstddef>
#include <vector>

#include "nova/qr_model.hpp"
#include "nova/utility.hpp"

namespace nova {

struct Preferences {
  double beta_bar = 0.0;  // tolerated rebuffering fraction, > -1
  double p_bar = 0.0;     // $/s cap; <= 0 disables the cost constraint
  double p_d = 0.0;       // $/bit
  double q_max = 100.0;

  bool cost_constrained() const { return p_bar > 0.0 && p_d > 0.0; }
};

// Learned per-client state plus the constants it is judged against.
struct ClientParams {
  double m = 25.0;
  double mu = 25.0;
  double v = 0.0;
  double b = 0.0;
  double d = 1.0;
  double lambda = 1.0;
  double sigma = 0.0;
  double epsilon = 0.05;
  Preferences pref;
};

// Combined per-bit penalty h^B(b)/(1+beta_bar) + p_d h^D(d)/p_bar.
double rate_penalty(const ClientParams& p, const UtilitySpec& u);

double phi_q(double q, const ClientParams& p, const UtilitySpec& u, const QrTradeoff& f);

struct KktCertificate {
  double residual = 0.0;
  double gamma = 0.0;      // lower-bound multiplier
  double gamma_bar = 0.0;  // upper-bound multiplier
};

struct QnovaResult {
  double q = 0.0;
  KktCertificate cert;
  int iterations = 0;
};

// Feasible quality interval: the tradeoff's domain intersected with [0, q_max].
std::pair<double, double> quality_domain(const ClientParams& p, const QrTradeoff& f);

QnovaResult solve_qnova(const ClientParams& p, const UtilitySpec& u, const QrTradeoff& f);

double solve_qnova_finite(const ClientParams& p, const UtilitySpec& u, const QrTradeoff& f,
                          const std::vector<double>& choices);

double kkt_residual_qnova(double q, const ClientParams& p, const UtilitySpec& u, const QrTradeoff& f,
                          KktCertificate* cert = nullptr);

struct RmThresholds {
  double panic = 5.0;
  double cautious_set = 10.0;
  double cautious_reset = 15.0;
  double aggressive_set = 30.0;
  double aggressive_reset = 25.0;
  double headroom = 0.99;
};

struct RmState {
  bool cautious = false;
  bool aggressive = false;
};

struct RmChoice {
  std::size_t index = 0;  // 0-based into the ascending choice list
  RmState state;
};

// rho in bits/s; choices are qualities on f in ascending order.
RmChoice select_rm(double buffer_seconds, double rho, const QrTradeoff& f, const std::vector<double>& choices,
                   const Preferences& pref, RmState state, const RmThresholds& th = {});

}  // namespace nova
