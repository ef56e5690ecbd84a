#include "nova/adaptation.hpp"

#include <algorithm>
#include <cmath>

#include "nova/error.hpp"

namespace nova {

namespace {

struct Coeffs {
  double a;    // (U^E)'(mu - U^V(v))
  double bv;   // (U^V)'(v)
  double pen;  // per-bit penalty
};

Coeffs coeffs(const ClientParams& p, const UtilitySpec& u) {
  return {u.ue.d1(p.mu - u.uv.value(p.v)), u.uv.d1(p.v), rate_penalty(p, u)};
}

double smooth_part_d1(double q, const ClientParams& p, const UtilitySpec& u, const Coeffs& k) {
  return k.a * (u.uq.d1(q) - 2.0 * k.bv * (q - p.m));
}

}  // namespace

double rate_penalty(const ClientParams& p, const UtilitySpec& u) {
  double pen = u.hb.value(p.b) / (1.0 + p.pref.beta_bar);
  if (p.pref.cost_constrained()) pen += p.pref.p_d * u.hd.value(p.d) / p.pref.p_bar;
  return pen;
}

std::pair<double, double> quality_domain(const ClientParams& p, const QrTradeoff& f) {
  double lo = std::max(0.0, f.q_lo());
  double hi = std::min(p.pref.q_max, f.q_hi());
  if (hi < lo) throw Error(Errc::QualityOutOfRange, "tradeoff domain does not meet [0, q_max]");
  return {lo, hi};
}

double phi_q(double q, const ClientParams& p, const UtilitySpec& u, const QrTradeoff& f) {
  if (!(q >= 0.0 && q <= p.pref.q_max)) throw Error(Errc::QualityOutOfRange, "quality outside [0, q_max]");
  Coeffs k = coeffs(p, u);
  double dq = q - p.m;
  return k.a * (u.uq.value(q) - k.bv * dq * dq) - k.pen * f.rate(q);
}

double kkt_residual_qnova(double q, const ClientParams& p, const UtilitySpec& u, const QrTradeoff& f,
                          KktCertificate* cert) {
  auto [lo, hi] = quality_domain(p, f);
  Coeffs k = coeffs(p, u);
  const double tol = 1e-7 * p.pref.q_max;
  KktCertificate c;
  if (hi - lo <= tol) {
    if (cert) *cert = c;
    return 0.0;
  }
  auto [sl, sr] = f.subgradient(std::clamp(q, lo, hi), tol);
  double smooth = smooth_part_d1(q, p, u, k);
  double dl = smooth - k.pen * sl;  // left derivative of the objective
  double dr = smooth - k.pen * sr;  // right derivative
  double res;
  if (q <= lo + tol) {
    res = std::max(dr, 0.0);
    c.gamma = std::max(-dl, 0.0);
  } else if (q >= hi - tol) {
    res = std::max(-dl, 0.0);
    c.gamma_bar = std::max(dr, 0.0);
  } else {
    res = std::max(dr, 0.0) + std::max(-dl, 0.0);
  }
  c.residual = res / k.a;
  if (cert) *cert = c;
  return c.residual;
}

QnovaResult solve_qnova(const ClientParams& p, const UtilitySpec& u, const QrTradeoff& f) {
  if (!(u.uv.d1(p.v) > 0.0)) throw Error(Errc::InvalidArgument, "variability penalty must be increasing");
  auto [lo, hi] = quality_domain(p, f);
  Coeffs k = coeffs(p, u);
  auto d_right = [&](double q) { return smooth_part_d1(q, p, u, k) - k.pen * f.slope_right(q); };
  auto d_left = [&](double q) { return smooth_part_d1(q, p, u, k) - k.pen * f.slope_left(q); };

  QnovaResult out;
  if (hi <= lo || d_right(lo) <= 0.0) {
    out.q = lo;
  } else if (d_left(hi) >= 0.0) {
    out.q = hi;
  } else {
    double a = lo, b = hi;
    const double tol = 1e-8 * p.pref.q_max;
    int it = 0;
    while (b - a > tol && it < 200) {
      double mid = 0.5 * (a + b);
      (d_right(mid) > 0.0 ? a : b) = mid;
      ++it;
    }
    out.iterations = it;
    double q = 0.5 * (a + b);
    // Snap to the exact optimum: either a knot inside the bracket or the
    // stationary point of the bracketing linear piece.
    bool snapped = false;
    for (const auto& pt : f.points()) {
      if (pt.q >= a - tol && pt.q <= b + tol && pt.q >= lo && pt.q <= hi) {
        if (d_right(pt.q) <= 0.0 && d_left(pt.q) >= 0.0) {
          q = pt.q;
          snapped = true;
          break;
        }
      }
    }
    if (!snapped && u.uq.identity() && f.points().size() > 1) {
      double s = f.slope_right(std::clamp(q, lo, hi));
      double cand = p.m + (1.0 - k.pen * s / k.a) / (2.0 * k.bv);
      if (cand >= a - tol && cand <= b + tol && cand > lo && cand < hi &&
          std::abs(f.slope_right(cand) - s) <= 1e-12 * std::abs(s) &&
          std::abs(f.slope_left(cand) - s) <= 1e-12 * std::abs(s))
        q = cand;
    }
    out.q = q;
  }
  kkt_residual_qnova(out.q, p, u, f, &out.cert);
  return out;
}

double solve_qnova_finite(const ClientParams& p, const UtilitySpec& u, const QrTradeoff& f,
                          const std::vector<double>& choices) {
  if (choices.empty()) throw Error(Errc::EmptyChoiceSet, "no quality choices");
  double best_q = 0.0, best_v = 0.0;
  bool have = false;
  for (double q : choices) {
    double v = phi_q(q, p, u, f);
    bool better = !have || v > best_v || (v == best_v && q < best_q);
    if (better) {
      best_q = q;
      best_v = v;
      have = true;
    }
  }
  return best_q;
}

RmChoice select_rm(double buffer_seconds, double rho, const QrTradeoff& f, const std::vector<double>& choices,
                   const Preferences& pref, RmState state, const RmThresholds& th) {
  if (choices.empty()) throw Error(Errc::EmptyChoiceSet, "no representations");
  if (buffer_seconds < th.cautious_set)
    state.cautious = true;
  else if (buffer_seconds > th.cautious_reset)
    state.cautious = false;
  if (buffer_seconds > th.aggressive_set)
    state.aggressive = true;
  else if (buffer_seconds < th.aggressive_reset)
    state.aggressive = false;

  RmChoice out;
  out.state = state;
  if (buffer_seconds < th.panic) return out;

  auto price_ok = [&](std::size_t j) {
    return !pref.cost_constrained() || pref.p_d * f.rate(choices[j]) <= pref.p_bar;
  };
  std::size_t base = 0;
  for (std::size_t j = 0; j < choices.size(); ++j)
    if (f.rate(choices[j]) <= th.headroom * rho && price_ok(j)) base = j;
  long idx = static_cast<long>(base) + (state.aggressive ? 1 : 0) - (state.cautious ? 1 : 0);
  idx = std::clamp(idx, 0L, static_cast<long>(choices.size()) - 1);
  while (idx > 0 && !price_ok(static_cast<std::size_t>(idx))) --idx;
  out.index = static_cast<std::size_t>(idx);
  return out;
}

}  // namespace nova
