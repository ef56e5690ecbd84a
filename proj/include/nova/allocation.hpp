#pragma once

#include <functional>
#include <vector>

namespace nova {

// Per-slot allocation constraint c(r) <= 0 with per-client floors r >= r_min.
// Allocations are in bits per slot.
class SlotConstraint {
 public:
  enum class Kind { Linear, GeneralConvex };
  using Eval = std::function<double(const std::vector<double>&)>;
  using Grad = std::function<std::vector<double>(const std::vector<double>&)>;

  // sum_i r_i / peaks_i - 1 <= 0
  static SlotConstraint linear(std::vector<double> peaks, std::vector<double> r_min);
  static SlotConstraint linear(std::vector<double> peaks, double r_min = 0.0);
  static SlotConstraint convex(std::size_t n, Eval c, Grad grad, std::vector<double> r_min);

  Kind kind() const { return kind_; }
  std::size_t size() const { return r_min_.size(); }
  const std::vector<double>& peaks() const { return peaks_; }
  const std::vector<double>& r_min() const { return r_min_; }

  double eval(const std::vector<double>& r) const;
  std::vector<double> gradient(const std::vector<double>& r) const;
  // Share of the slot left after every floor is served (linear only).
  double residual_share() const;

  bool operator==(const SlotConstraint& o) const;

 private:
  Kind kind_ = Kind::Linear;
  std::vector<double> peaks_;
  std::vector<double> r_min_;
  Eval c_;
  Grad grad_;
};

struct SlotAllocation {
  std::vector<double> r;
  double objective = 0.0;
};

// Closed form: floors first, residual to the client maximizing w_i * p_i
// (lowest id on ties).
SlotAllocation solve_rnova_linear(const std::vector<double>& w, const SlotConstraint& c);

struct ConvexAllocation {
  SlotAllocation alloc;
  double chi = 0.0;               // multiplier of c(r) <= 0
  std::vector<double> omega;      // multipliers of the floors
  double kkt_residual = 0.0;
  int iterations = 0;
};

struct ConvexAllocOptions {
  double kkt_tol = 1e-7;
  int max_iter = 10000;
};

ConvexAllocation solve_rnova_convex(const std::vector<double>& w, const SlotConstraint& c,
                                    const ConvexAllocOptions& opt = {});

// Relative KKT residual of an allocation for max w.r over the constraint.
// Also reports the fitted multipliers.
double rnova_kkt_residual(const std::vector<double>& w, const SlotConstraint& c,
                          const std::vector<double>& r, double* chi = nullptr,
                          std::vector<double>* omega = nullptr);

SlotAllocation solve_rnova_discrete(const std::vector<double>& w,
                                    const std::vector<std::vector<double>>& feasible);

// Video clients first (weights p_V * w_video), then data users weighted by
// udprime(rho_j). The constraint covers both groups in that order.
SlotAllocation solve_shared(const std::vector<double>& w_video, const std::vector<double>& rho_data,
                            const std::function<double(double)>& udprime, double p_v,
                            const SlotConstraint& c);

double pf_marginal(double rho);

SlotAllocation solve_pf(const std::vector<double>& rho, const SlotConstraint& c);

// Each sub-resource is solved independently with its own floors; the
// per-client totals are summed.
SlotAllocation solve_rnova_gc(const std::vector<double>& w, const std::vector<SlotConstraint>& subs);

double update_ewma(double rho, double r, double epsilon);

}  // namespace nova
