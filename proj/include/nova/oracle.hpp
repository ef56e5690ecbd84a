#pragma once

#include <vector>

#include "nova/adaptation.hpp"
#include "nova/allocation.hpp"
#include "nova/qr_model.hpp"
#include "nova/tracegen.hpp"
#include "nova/utility.hpp"

namespace nova {

struct ConstraintEntry {
  SlotConstraint c;  // linear
  double prob = 1.0;
};

struct ClientModel {
  std::vector<FlEntry> entries;  // (tradeoff, length) support with probabilities
};

struct StationaryModel {
  std::vector<ConstraintEntry> constraints;
  std::vector<ClientModel> clients;
  double tau_slot = 0.01;
};

void validate_model(const StationaryModel& m);

struct OracleClient {
  std::vector<double> q;          // per entry
  std::vector<double> gamma;      // lower quality bound multipliers, per entry
  std::vector<double> gamma_bar;  // upper quality bound multipliers, per entry
  double b = 0.0;       // rebuffering multiplier, per bps (the h^B target)
  double d = 0.0;       // cost multiplier (the h^D target)
  double m = 0.0;       // mean quality
  double mu = 0.0;      // mean of U^Q(q)
  double v = 0.0;       // quality variance
  double e = 0.0;       // QoE
  double sigma = 0.0;   // mean compression rate, bps
  double lambda = 0.0;  // mean segment length, s
  double rho = 0.0;     // mean allocation, bits per slot
};

struct OptstatSolution {
  std::vector<OracleClient> clients;
  std::vector<std::vector<double>> r;      // [constraint][client], bits per slot
  std::vector<double> chi;                 // per constraint
  std::vector<std::vector<double>> omega;  // [constraint][client]
  double value = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
};

struct OptstatOptions {
  double tol = 1e-11;
  int max_iter = 300;
  double accept = 1e-6;  // KKT residual above this raises NoConvergence
};

OptstatSolution solve_optstat(const StationaryModel& model, const std::vector<Preferences>& prefs,
                              const std::vector<UtilitySpec>& u, const OptstatOptions& opt = {});

struct KktReport {
  double stationarity = 0.0;
  double complementarity = 0.0;
  double feasibility = 0.0;
  double max() const;
};

// Recomputes every statistic from the solution's qualities and allocations.
KktReport verify_kkt_optstat(const OptstatSolution& sol, const StationaryModel& model,
                             const std::vector<Preferences>& prefs, const std::vector<UtilitySpec>& u);

// Lagrange dual function at multipliers (b, d); an upper bound on the
// OPTSTAT value. Needs identity U^E and linear U^V.
double optstat_dual_bound(const StationaryModel& model, const std::vector<Preferences>& prefs,
                          const std::vector<UtilitySpec>& u, const std::vector<double>& b,
                          const std::vector<double>& d);

// Parameter vector that reproduces the stationary solution through QNOVA.
ClientParams stationary_params(const OracleClient& c, const Preferences& pref, const UtilitySpec& u);

// Realized sequences: one linear constraint per slot and S segments per client.
struct OfflineInstance {
  std::vector<SlotConstraint> slots;
  std::vector<VideoTrace> videos;
  double tau_slot = 0.01;
};

struct OfflineSolution {
  double value = 0.0;
  std::vector<std::vector<double>> q;  // [client][segment]
  std::vector<std::vector<double>> r;  // [slot][client]
  OptstatSolution grouped;
};

// Empirical-distribution model of a realized instance, with the map from
// segments/slots to support entries.
struct EmpiricalModel {
  StationaryModel model;
  std::vector<std::vector<std::size_t>> segment_entry;  // [client][segment]
  std::vector<std::size_t> slot_entry;
};

EmpiricalModel empirical_model(const OfflineInstance& inst);

OfflineSolution solve_opt_s(const OfflineInstance& inst, const std::vector<Preferences>& prefs,
                            const std::vector<UtilitySpec>& u, const OptstatOptions& opt = {});

struct DiscreteSolution {
  double value = 0.0;
  std::vector<std::vector<double>> q;  // [client][segment]
};

// Exhaustive search over every segment's available_q.
DiscreteSolution brute_force_discrete(const OfflineInstance& inst, const std::vector<Preferences>& prefs,
                                      const std::vector<UtilitySpec>& u, double max_combinations = 1e7);

// Can the mean allocation (bits per slot) meet need_i for every client?
bool allocation_feasible(const std::vector<ConstraintEntry>& cs, const std::vector<double>& need);

}  // namespace nova
