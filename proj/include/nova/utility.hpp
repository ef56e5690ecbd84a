#pragma once

#include <limits>

namespace nova {

// Concave increasing map applied to the per-client QoE.
struct UeSpec {
  enum class Kind { Identity, AlphaFair };
  Kind kind = Kind::Identity;
  double alpha = 1.0;   // alpha-fair exponent (1 -> log)
  double delta = 1.0;   // shift keeping the argument positive
  double e_min = 0.0;   // lowest attainable QoE

  double value(double e) const;
  double d1(double e) const;
  double d2(double e) const;
};

// Convex increasing variability penalty applied to the variance.
struct UvSpec {
  enum class Kind { Linear, Quadratic };
  Kind kind = Kind::Linear;
  double eta = 0.05;
  double eta2 = 0.0;  // quadratic coefficient for Kind::Quadratic

  double value(double v) const;
  double d1(double v) const;
  double d2(double v) const;
};

// Concave increasing per-segment utility inside the generalized mean.
struct UqSpec {
  enum class Kind { Identity, Log };
  Kind kind = Kind::Identity;
  double kappa = 50.0;  // U(q) = kappa * log(1 + q / kappa)

  bool identity() const { return kind == Kind::Identity; }
  double value(double q) const;
  double d1(double q) const;
  double d2(double q) const;
};

// Rebuffer-risk weight: h0 * (y + max(y - knee, 0)^2), y = max(b - floor, 0) / scale.
struct HbSpec {
  double h0 = 5e-6;
  double knee = 20.0;
  double scale = 0.05;
  double floor = 0.0;

  static HbSpec linear(double h0, double scale = 1.0, double floor = 0.0) {
    return HbSpec{h0, std::numeric_limits<double>::infinity(), scale, floor};
  }
  double value(double b) const;
  double d1(double b) const;
  // Smallest b with value(b) >= target (b = floor for target <= 0).
  double inverse(double target) const;
};

// Cost-risk weight: slope * max(d - floor, 0).
struct HdSpec {
  double slope = 10.0;
  double floor = 0.0;

  double value(double d) const;
  double inverse(double target) const;
};

struct UtilitySpec {
  UeSpec ue;
  UvSpec uv;
  UqSpec uq;
  HbSpec hb;
  HdSpec hd;
};

}  // namespace nova
