#pragma once

#include <vector>

namespace nova {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double value = 0.0;
};

// maximize c'x  s.t.  A x <= b,  x >= 0  (b may have either sign).
// Dense two-phase simplex with Bland's rule; meant for small instances.
LpResult lp_maximize(const std::vector<double>& c, const std::vector<std::vector<double>>& A,
                     const std::vector<double>& b);

}  // namespace nova
