#include "nova/utility.hpp"

#include <cmath>

#include "nova/error.hpp"

namespace nova {

namespace {

double alpha_arg(const UeSpec& u, double e) {
  double x = e - u.e_min + u.delta;
  if (!(x > 0.0)) throw Error(Errc::InvalidArgument, "alpha-fair utility evaluated below its domain");
  return x;
}

}  // namespace

double UeSpec::value(double e) const {
  if (kind == Kind::Identity) return e;
  double x = alpha_arg(*this, e);
  if (alpha == 1.0) return std::log(x);
  return (std::pow(x, 1.0 - alpha) - 1.0) / (1.0 - alpha);
}

double UeSpec::d1(double e) const {
  if (kind == Kind::Identity) return 1.0;
  return std::pow(alpha_arg(*this, e), -alpha);
}

double UeSpec::d2(double e) const {
  if (kind == Kind::Identity) return 0.0;
  return -alpha * std::pow(alpha_arg(*this, e), -alpha - 1.0);
}

double UvSpec::value(double v) const {
  return kind == Kind::Linear ? eta * v : eta * v + eta2 * v * v;
}

double UvSpec::d1(double v) const { return kind == Kind::Linear ? eta : eta + 2.0 * eta2 * v; }

double UvSpec::d2(double) const { return kind == Kind::Linear ? 0.0 : 2.0 * eta2; }

double UqSpec::value(double q) const {
  return kind == Kind::Identity ? q : kappa * std::log1p(q / kappa);
}

double UqSpec::d1(double q) const { return kind == Kind::Identity ? 1.0 : 1.0 / (1.0 + q / kappa); }

double UqSpec::d2(double q) const {
  if (kind == Kind::Identity) return 0.0;
  double t = 1.0 + q / kappa;
  return -1.0 / (kappa * t * t);
}

double HbSpec::value(double b) const {
  double y = std::max(b - floor, 0.0) / scale;
  double over = std::isinf(knee) ? 0.0 : std::max(y - knee, 0.0);
  return h0 * (y + over * over);
}

double HbSpec::d1(double b) const {
  if (b <= floor) return 0.0;
  double y = (b - floor) / scale;
  double over = std::isinf(knee) ? 0.0 : std::max(y - knee, 0.0);
  return h0 * (1.0 + 2.0 * over) / scale;
}

double HbSpec::inverse(double target) const {
  if (target <= 0.0) return floor;
  // y + max(y - knee, 0)^2 = target / h0, solved in closed form
  double t = target / h0;
  double y;
  if (std::isinf(knee) || t <= knee) {
    y = t;
  } else {
    // y + (y - knee)^2 = t  ->  z = y - knee, z^2 + z + knee - t = 0
    double z = (-1.0 + std::sqrt(1.0 + 4.0 * (t - knee))) / 2.0;
    y = knee + z;
  }
  return floor + y * scale;
}

double HdSpec::value(double d) const { return slope * std::max(d - floor, 0.0); }

double HdSpec::inverse(double target) const {
  if (target <= 0.0) return floor;
  return floor + target / slope;
}

}  // namespace nova
