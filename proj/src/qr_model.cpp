#include "nova/qr_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nova/error.hpp"

namespace nova {

QrTradeoff::QrTradeoff(std::vector<QrPoint> points, double q_max)
    : points_(std::move(points)), q_max_(q_max) {
  if (points_.empty()) throw Error(Errc::InvalidArgument, "tradeoff needs at least one knot");
  if (!(q_max_ > 0.0)) throw Error(Errc::InvalidArgument, "q_max must be positive");
}

double QrTradeoff::checked(double q) const {
  // allow round-off at the domain ends
  double tol = 1e-12 * q_max_;
  if (std::isnan(q) || q < q_lo() - tol || q > q_hi() + tol) {
    std::ostringstream os;
    os << "quality " << q << " outside [" << q_lo() << ", " << q_hi() << "]";
    throw Error(Errc::QualityOutOfRange, os.str());
  }
  return std::clamp(q, q_lo(), q_hi());
}

std::size_t QrTradeoff::piece_index(double q) const {
  // index k of the piece [q_k, q_{k+1}] with q_k <= q < q_{k+1}; last piece for q_hi
  auto it = std::upper_bound(points_.begin(), points_.end(), q,
                             [](double v, const QrPoint& p) { return v < p.q; });
  std::size_t k = static_cast<std::size_t>(it - points_.begin());
  if (k == 0) return 0;
  k -= 1;
  if (k + 1 >= points_.size()) k = points_.size() - 2;
  return k;
}

double QrTradeoff::rate(double q) const {
  q = checked(q);
  if (points_.size() == 1) return points_[0].rate;
  std::size_t k = piece_index(q);
  const QrPoint& a = points_[k];
  const QrPoint& b = points_[k + 1];
  if (q == a.q) return a.rate;
  if (q == b.q) return b.rate;
  return a.rate + (q - a.q) * ((b.rate - a.rate) / (b.q - a.q));
}

std::vector<double> QrTradeoff::slopes() const {
  std::vector<double> s;
  for (std::size_t k = 0; k + 1 < points_.size(); ++k)
    s.push_back((points_[k + 1].rate - points_[k].rate) / (points_[k + 1].q - points_[k].q));
  return s;
}

double QrTradeoff::slope_right(double q) const {
  q = checked(q);
  if (points_.size() == 1) return 0.0;
  std::size_t k = piece_index(q);
  return (points_[k + 1].rate - points_[k].rate) / (points_[k + 1].q - points_[k].q);
}

double QrTradeoff::slope_left(double q) const {
  q = checked(q);
  if (points_.size() == 1) return 0.0;
  std::size_t k = piece_index(q);
  if (q == points_[k].q && k > 0) k -= 1;
  return (points_[k + 1].rate - points_[k].rate) / (points_[k + 1].q - points_[k].q);
}

double QrTradeoff::slope(double q) const { return slope_right(q); }

std::pair<double, double> QrTradeoff::subgradient(double q, double knot_tol) const {
  q = checked(q);
  if (points_.size() == 1) return {0.0, 0.0};
  auto s = slopes();
  for (std::size_t k = 0; k < points_.size(); ++k) {
    if (std::abs(q - points_[k].q) <= knot_tol) {
      if (k == 0) return {s[0], s[0]};
      if (k + 1 == points_.size()) return {s[k - 1], s[k - 1]};
      return {s[k - 1], s[k]};
    }
  }
  std::size_t k = piece_index(q);
  return {slope_left(q), s[k]};
}

double eval_rate(const QrTradeoff& t, double q) { return t.rate(q); }

double eval_rate_derivative(const QrTradeoff& t, double q) { return t.slope(q); }

std::vector<ViolationReport> validate_tradeoff(const QrTradeoff& t) {
  std::vector<ViolationReport> out;
  const auto& p = t.points();
  if (p.empty()) {
    out.push_back({TradeoffViolation::Empty, "no knots"});
    return out;
  }
  if (p.front().rate <= 0.0) {
    std::ostringstream os;
    os << "rate at lowest quality is " << p.front().rate << ", must be positive";
    out.push_back({TradeoffViolation::NonPositiveFloor, os.str()});
  }
  for (const auto& pt : p) {
    if (pt.q < 0.0 || pt.q > t.q_max()) {
      out.push_back({TradeoffViolation::OutOfRange, "knot quality outside [0, q_max]"});
      break;
    }
  }
  double prev_slope = -1.0;
  for (std::size_t k = 0; k + 1 < p.size(); ++k) {
    if (!(p[k + 1].q > p[k].q)) {
      out.push_back({TradeoffViolation::NotIncreasingQuality, "knot qualities must increase strictly"});
      return out;
    }
    if (!(p[k + 1].rate > p[k].rate))
      out.push_back({TradeoffViolation::NotIncreasingRate, "knot rates must increase strictly"});
    double s = (p[k + 1].rate - p[k].rate) / (p[k + 1].q - p[k].q);
    if (k > 0 && s < prev_slope * (1.0 - 1e-12)) {
      std::ostringstream os;
      os << "slope drops from " << prev_slope << " to " << s << " at knot " << k;
      out.push_back({TradeoffViolation::NotConvex, os.str()});
    }
    prev_slope = s;
  }
  return out;
}

void validate_trace(const VideoTrace& v) {
  if (v.segments.empty()) throw Error(Errc::InvalidArgument, "video trace has no segments");
  for (std::size_t s = 0; s < v.segments.size(); ++s) {
    const Segment& seg = v.segments[s];
    if (seg.index != static_cast<int>(s) + 1)
      throw Error(Errc::InvalidArgument, "segment indices must be contiguous from 1");
    if (!(seg.length > 0.0)) throw Error(Errc::InvalidArgument, "segment length must be positive");
    if (!seg.tradeoff) throw Error(Errc::InvalidArgument, "segment without tradeoff");
    for (double q : seg.available_q) {
      bool found = false;
      for (const auto& p : seg.tradeoff->points()) found = found || p.q == q;
      if (!found) throw Error(Errc::InvalidArgument, "available quality is not a knot of the tradeoff");
    }
  }
}

}  // namespace nova
