#include "nova/allocation.hpp"

#include <algorithm>
#include <cmath>

#include "nova/convex.hpp"
#include "nova/error.hpp"

namespace nova {

SlotConstraint SlotConstraint::linear(std::vector<double> peaks, std::vector<double> r_min) {
  if (peaks.size() != r_min.size()) throw Error(Errc::InvalidArgument, "peaks and floors differ in size");
  for (double p : peaks)
    if (!(p > 0.0)) throw Error(Errc::InvalidArgument, "peak rates must be positive");
  for (double f : r_min)
    if (f < 0.0) throw Error(Errc::InvalidArgument, "floors must be non-negative");
  SlotConstraint c;
  c.kind_ = Kind::Linear;
  c.peaks_ = std::move(peaks);
  c.r_min_ = std::move(r_min);
  return c;
}

SlotConstraint SlotConstraint::linear(std::vector<double> peaks, double r_min) {
  std::vector<double> floors(peaks.size(), r_min);
  return linear(std::move(peaks), std::move(floors));
}

SlotConstraint SlotConstraint::convex(std::size_t n, Eval c, Grad grad, std::vector<double> r_min) {
  if (r_min.size() != n) throw Error(Errc::InvalidArgument, "floor vector has wrong size");
  SlotConstraint s;
  s.kind_ = Kind::GeneralConvex;
  s.r_min_ = std::move(r_min);
  s.c_ = std::move(c);
  s.grad_ = std::move(grad);
  return s;
}

double SlotConstraint::eval(const std::vector<double>& r) const {
  if (kind_ == Kind::GeneralConvex) return c_(r);
  double s = 0.0;
  for (std::size_t i = 0; i < peaks_.size(); ++i) s += r[i] / peaks_[i];
  return s - 1.0;
}

std::vector<double> SlotConstraint::gradient(const std::vector<double>& r) const {
  if (kind_ == Kind::GeneralConvex) return grad_(r);
  std::vector<double> g(peaks_.size());
  for (std::size_t i = 0; i < peaks_.size(); ++i) g[i] = 1.0 / peaks_[i];
  return g;
}

double SlotConstraint::residual_share() const {
  double used = 0.0;
  for (std::size_t i = 0; i < peaks_.size(); ++i) used += r_min_[i] / peaks_[i];
  return 1.0 - used;
}

bool SlotConstraint::operator==(const SlotConstraint& o) const {
  return kind_ == Kind::Linear && o.kind_ == Kind::Linear && peaks_ == o.peaks_ && r_min_ == o.r_min_;
}

namespace {

void check_weights(const std::vector<double>& w, std::size_t n) {
  if (w.size() != n) throw Error(Errc::InvalidArgument, "weight vector has wrong size");
  for (double x : w)
    if (!(x >= 0.0)) throw Error(Errc::InvalidArgument, "weights must be non-negative");
}

}  // namespace

SlotAllocation solve_rnova_linear(const std::vector<double>& w, const SlotConstraint& c) {
  if (c.kind() != SlotConstraint::Kind::Linear)
    throw Error(Errc::InvalidArgument, "closed form needs a linear constraint");
  const std::size_t n = c.size();
  check_weights(w, n);
  double residual = c.residual_share();
  if (residual < -1e-12) throw Error(Errc::InfeasibleFloor, "floors exceed the slot capacity");
  residual = std::max(residual, 0.0);
  SlotAllocation a;
  a.r = c.r_min();
  std::size_t best = 0;
  double best_metric = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    double metric = w[i] * c.peaks()[i];
    if (metric > best_metric) {
      best_metric = metric;
      best = i;
    }
  }
  if (n > 0) a.r[best] += residual * c.peaks()[best];
  for (std::size_t i = 0; i < n; ++i) a.objective += w[i] * a.r[i];
  return a;
}

double rnova_kkt_residual(const std::vector<double>& w, const SlotConstraint& c,
                          const std::vector<double>& r, double* chi_out, std::vector<double>* omega_out) {
  const std::size_t n = c.size();
  std::vector<double> g = c.gradient(r);
  double wmax = 0.0, rmax = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    wmax = std::max(wmax, std::abs(w[i]));
    rmax = std::max(rmax, std::abs(r[i]));
  }
  if (wmax == 0.0) wmax = 1.0;
  double delta = 1e-7 * rmax;
  double cv = c.eval(r);
  std::vector<bool> free(n);
  double num = 0.0, den = 0.0;
  bool any_free = false;
  for (std::size_t i = 0; i < n; ++i) {
    free[i] = r[i] - c.r_min()[i] > delta;
    if (free[i]) {
      num += w[i] * g[i];
      den += g[i] * g[i];
      any_free = true;
    }
  }
  double chi = 0.0;
  if (cv > -1e-9) {
    if (any_free && den > 0.0) {
      chi = std::max(num / den, 0.0);
    } else {
      for (std::size_t i = 0; i < n; ++i)
        if (g[i] > 0.0) chi = std::max(chi, w[i] / g[i]);
    }
  }
  double res = std::max(cv, 0.0);
  std::vector<double> omega(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double st = w[i] - chi * g[i];
    if (free[i]) {
      res = std::max(res, std::abs(st) / wmax);
    } else {
      omega[i] = std::max(-st, 0.0);
      res = std::max(res, std::max(st, 0.0) / wmax);
    }
    res = std::max(res, std::max(c.r_min()[i] - r[i], 0.0) / std::max(1.0, c.r_min()[i]));
  }
  if (chi > 0.0) res = std::max(res, std::abs(cv));
  if (chi_out) *chi_out = chi;
  if (omega_out) *omega_out = omega;
  return res;
}

ConvexAllocation solve_rnova_convex(const std::vector<double>& w, const SlotConstraint& c,
                                    const ConvexAllocOptions& opt) {
  const std::size_t n = c.size();
  check_weights(w, n);
  const auto& floor = c.r_min();
  if (c.eval(floor) >= 0.0) throw Error(Errc::InfeasibleFloor, "floor allocation is not strictly feasible");

  // Scale: step t along the all-ones direction at which the constraint binds.
  auto along = [&](double t) {
    std::vector<double> r = floor;
    for (double& x : r) x += t;
    return r;
  };
  double hi = 1.0;
  int guard = 0;
  while (c.eval(along(hi)) < 0.0 && guard++ < 200) hi *= 2.0;
  double lo = 0.0;
  for (int k = 0; k < 200 && hi - lo > 1e-14 * hi; ++k) {
    double mid = 0.5 * (lo + hi);
    (c.eval(along(mid)) < 0.0 ? lo : hi) = mid;
  }
  const double t = hi;
  double wmax = 0.0;
  for (double x : w) wmax = std::max(wmax, x);
  const double wscale = wmax > 0.0 ? wmax : 1.0;

  auto to_r = [&](const cvx::Vec& z) {
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = t * z(static_cast<int>(i));
    return r;
  };

  cvx::Program p;
  p.n = static_cast<int>(n);
  p.objective = [&](const cvx::Vec& z, cvx::Vec* grad, cvx::Mat* hess) {
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      f += w[i] * z(static_cast<int>(i)) / wscale;
      if (grad) (*grad)(static_cast<int>(i)) = w[i] / wscale;
    }
    if (hess) hess->setZero();
    return f;
  };
  p.A = -cvx::Mat::Identity(p.n, p.n);
  p.b.resize(p.n);
  for (std::size_t i = 0; i < n; ++i) p.b(static_cast<int>(i)) = -floor[i] / t;
  p.nonlinear.push_back([&](const cvx::Vec& z, cvx::Vec* grad, cvx::Mat* hess) {
    std::vector<double> r = to_r(z);
    double v = c.eval(r);
    if (grad || hess) {
      std::vector<double> g = c.gradient(r);
      if (grad)
        for (std::size_t i = 0; i < n; ++i) (*grad)(static_cast<int>(i)) = t * g[i];
      if (hess) {
        const double h = 1e-5;
        for (std::size_t j = 0; j < n; ++j) {
          std::vector<double> rp = r, rm = r;
          rp[j] += h * t;
          rm[j] -= h * t;
          auto gp = c.gradient(rp), gm = c.gradient(rm);
          for (std::size_t i = 0; i < n; ++i)
            (*hess)(static_cast<int>(i), static_cast<int>(j)) = t * (gp[i] - gm[i]) / (2.0 * h);
        }
        cvx::Mat sym = 0.5 * (*hess + hess->transpose());
        *hess = sym;
      }
    }
    return v;
  });

  cvx::Vec z0(p.n);
  for (std::size_t i = 0; i < n; ++i) z0(static_cast<int>(i)) = (floor[i] + 0.5 * t) / t;
  cvx::Options o;
  o.max_iter = std::min(opt.max_iter, 500);
  cvx::Result res = cvx::maximize(p, z0, o);

  ConvexAllocation out;
  out.iterations = res.iterations;
  std::vector<double> r = to_r(res.z);
  for (std::size_t i = 0; i < n; ++i) r[i] = std::max(r[i], floor[i]);
  if (c.eval(r) > 0.0) {
    // pull back toward the floor until feasible
    double a = 0.0, b = 1.0;
    auto mix = [&](double s) {
      std::vector<double> x(n);
      for (std::size_t i = 0; i < n; ++i) x[i] = floor[i] + s * (r[i] - floor[i]);
      return x;
    };
    for (int k = 0; k < 100; ++k) {
      double mid = 0.5 * (a + b);
      (c.eval(mix(mid)) <= 0.0 ? a : b) = mid;
    }
    r = mix(a);
  }
  out.alloc.r = r;
  for (std::size_t i = 0; i < n; ++i) out.alloc.objective += w[i] * r[i];
  out.kkt_residual = rnova_kkt_residual(w, c, r, &out.chi, &out.omega);
  if (out.kkt_residual > opt.kkt_tol)
    throw Error(Errc::NoConvergence, "KKT residual " + std::to_string(out.kkt_residual) + " above tolerance");
  return out;
}

SlotAllocation solve_rnova_discrete(const std::vector<double>& w, const std::vector<std::vector<double>>& feasible) {
  if (feasible.empty()) throw Error(Errc::EmptyFeasibleSet, "no candidate allocations");
  std::size_t best = 0;
  double best_val = 0.0;
  for (std::size_t k = 0; k < feasible.size(); ++k) {
    if (feasible[k].size() != w.size()) throw Error(Errc::InvalidArgument, "candidate has wrong size");
    double v = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) v += w[i] * feasible[k][i];
    if (k == 0 || v > best_val) {
      best_val = v;
      best = k;
    }
  }
  return {feasible[best], best_val};
}

SlotAllocation solve_shared(const std::vector<double>& w_video, const std::vector<double>& rho_data,
                            const std::function<double(double)>& udprime, double p_v, const SlotConstraint& c) {
  if (!(p_v > 0.0)) throw Error(Errc::InvalidArgument, "video priority must be positive");
  if (w_video.size() + rho_data.size() != c.size())
    throw Error(Errc::InvalidArgument, "constraint must cover video and data users");
  std::vector<double> w;
  w.reserve(c.size());
  for (double x : w_video) w.push_back(p_v * x);
  for (double rho : rho_data) w.push_back(udprime ? udprime(rho) : pf_marginal(rho));
  return solve_rnova_linear(w, c);
}

double pf_marginal(double rho) {
  if (!(rho > 0.0)) throw Error(Errc::InvalidArgument, "mean-rate tracker must be positive");
  return 1.0 / rho;
}

SlotAllocation solve_pf(const std::vector<double>& rho, const SlotConstraint& c) {
  std::vector<double> w(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) w[i] = pf_marginal(rho[i]);
  return solve_rnova_linear(w, c);
}

SlotAllocation solve_rnova_gc(const std::vector<double>& w, const std::vector<SlotConstraint>& subs) {
  if (subs.empty()) throw Error(Errc::InvalidArgument, "no sub-resources");
  SlotAllocation total;
  total.r.assign(w.size(), 0.0);
  for (const auto& sub : subs) {
    SlotAllocation a = solve_rnova_linear(w, sub);
    for (std::size_t i = 0; i < w.size(); ++i) total.r[i] += a.r[i];
    total.objective += a.objective;
  }
  return total;
}

double update_ewma(double rho, double r, double epsilon) { return rho + epsilon * (r - rho); }

}  // namespace nova
