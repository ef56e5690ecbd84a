#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace nova {

struct QrPoint {
  double q = 0.0;     // quality score
  double rate = 0.0;  // compression rate, bits/s

  bool operator==(const QrPoint&) const = default;
};

// Convex increasing quality -> rate map, stored as knots and extended
// piecewise-linearly between them. The domain is [first knot, last knot].
class QrTradeoff {
 public:
  QrTradeoff() = default;
  QrTradeoff(std::vector<QrPoint> points, double q_max);

  const std::vector<QrPoint>& points() const { return points_; }
  double q_max() const { return q_max_; }
  double q_lo() const { return points_.front().q; }
  double q_hi() const { return points_.back().q; }
  bool spans_full_range() const { return q_lo() == 0.0 && q_hi() == q_max_; }

  double rate(double q) const;
  // Right derivative; the left derivative at the last knot.
  double slope(double q) const;
  double slope_left(double q) const;
  double slope_right(double q) const;
  // One-sided slopes [left, right] at q. Points within knot_tol of a knot
  // are treated as sitting on it. At the domain ends both sides use the
  // adjacent piece.
  std::pair<double, double> subgradient(double q, double knot_tol = 0.0) const;
  // Slopes of the linear pieces; size() == points().size() - 1.
  std::vector<double> slopes() const;

  bool operator==(const QrTradeoff& o) const {
    return q_max_ == o.q_max_ && points_ == o.points_;
  }

 private:
  std::size_t piece_index(double q) const;
  double checked(double q) const;

  std::vector<QrPoint> points_;
  double q_max_ = 100.0;
};

using TradeoffPtr = std::shared_ptr<const QrTradeoff>;

double eval_rate(const QrTradeoff& t, double q);
double eval_rate_derivative(const QrTradeoff& t, double q);

enum class TradeoffViolation { NotIncreasingQuality, NotIncreasingRate, NotConvex, NonPositiveFloor, OutOfRange, Empty };

struct ViolationReport {
  TradeoffViolation kind;
  std::string detail;
};

// Empty result means the tradeoff is valid.
std::vector<ViolationReport> validate_tradeoff(const QrTradeoff& t);

struct Segment {
  int index = 1;
  double length = 1.0;  // seconds
  TradeoffPtr tradeoff;
  std::vector<double> available_q;  // finite representation qualities, ascending
};

struct VideoTrace {
  int client = 0;
  std::vector<Segment> segments;
};

void validate_trace(const VideoTrace& v);

}  // namespace nova
