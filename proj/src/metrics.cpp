#include "nova/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "nova/error.hpp"

namespace nova {

namespace {

void check(const QualitySeries& s) {
  if (s.q.empty()) throw Error(Errc::EmptySeries, "quality series is empty");
  if (s.q.size() != s.l.size()) throw Error(Errc::InvalidArgument, "quality and length series differ");
}

double total_length(const QualitySeries& s) {
  double t = 0.0;
  for (double x : s.l) t += x;
  return t;
}

}  // namespace

double mean_quality(const QualitySeries& s) {
  check(s);
  double acc = 0.0;
  for (std::size_t i = 0; i < s.q.size(); ++i) acc += s.l[i] * s.q[i];
  return acc / total_length(s);
}

double var_quality(const QualitySeries& s) {
  double m = mean_quality(s);
  double acc = 0.0;
  for (std::size_t i = 0; i < s.q.size(); ++i) acc += s.l[i] * (s.q[i] - m) * (s.q[i] - m);
  return acc / total_length(s);
}

double mean_utility(const QualitySeries& s, const UqSpec& uq) {
  check(s);
  double acc = 0.0;
  for (std::size_t i = 0; i < s.q.size(); ++i) acc += s.l[i] * uq.value(s.q[i]);
  return acc / total_length(s);
}

double qoe(const QualitySeries& s, const UtilitySpec& u) {
  return mean_utility(s, u.uq) - u.uv.value(var_quality(s));
}

double phi_total(const std::vector<QualitySeries>& all, const std::vector<UtilitySpec>& u) {
  if (all.size() != u.size()) throw Error(Errc::InvalidArgument, "one utility spec per client required");
  double total = 0.0;
  for (std::size_t i = 0; i < all.size(); ++i) total += u[i].ue.value(qoe(all[i], u[i]));
  return total;
}

double qoe1(const QualitySeries& s) { return mean_quality(s) - std::sqrt(var_quality(s)); }

double mean_square_difference(const QualitySeries& s) {
  check(s);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < s.q.size(); ++i) acc += (s.q[i + 1] - s.q[i]) * (s.q[i + 1] - s.q[i]);
  return acc / static_cast<double>(s.q.size());
}

double qoe2(const QualitySeries& s) {
  if (s.q.size() < 2) throw Error(Errc::EmptySeries, "needs at least two segments");
  return mean_quality(s) - std::sqrt(mean_square_difference(s));
}

double rebuffer_estimate(double total_bits, double total_seconds, double alloc_bits, long slots, double tau_slot) {
  if (slots < 1) throw Error(Errc::InvalidArgument, "needs at least one slot");
  if (!(alloc_bits > 0.0)) throw Error(Errc::ZeroAllocation, "no bits were allocated");
  double download_rate = alloc_bits / (tau_slot * static_cast<double>(slots));
  return total_bits / (total_seconds * download_rate) - 1.0;
}

double realized_rebuffering(double stall_seconds, double played_seconds) {
  if (played_seconds <= 0.0) return stall_seconds > 0.0 ? 1.0 : 0.0;
  return stall_seconds / played_seconds;
}

double cost_per_second(double total_bits, double total_seconds, double p_d) {
  if (!(total_seconds > 0.0)) throw Error(Errc::EmptySeries, "no video duration");
  return p_d * total_bits / total_seconds;
}

double fairness_ratio(const std::vector<double>& v) {
  if (v.empty()) throw Error(Errc::EmptySeries, "no clients");
  double lo = *std::min_element(v.begin(), v.end());
  double hi = *std::max_element(v.begin(), v.end());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  return (hi - lo) / mean;
}

}  // namespace nova
