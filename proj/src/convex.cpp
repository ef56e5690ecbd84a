#include "nova/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nova::cvx {

namespace {

struct Eval {
  double f = 0.0;
  Vec grad;
  Mat hess;
  Vec g;     // constraint values
  Mat jac;   // constraint Jacobian (m x n)
  std::vector<Mat> g_hess;
  bool ok = true;
};

Eval evaluate(const Program& p, const Vec& z, bool second_order) {
  Eval e;
  const int n = p.n;
  const int ml = static_cast<int>(p.A.rows());
  const int mn = static_cast<int>(p.nonlinear.size());
  e.grad = Vec::Zero(n);
  e.hess = Mat::Zero(n, n);
  e.g.resize(ml + mn);
  e.jac.resize(ml + mn, n);
  try {
    e.f = p.objective(z, &e.grad, second_order ? &e.hess : nullptr);
    if (ml > 0) {
      e.g.head(ml) = p.A * z - p.b;
      e.jac.topRows(ml) = p.A;
    }
    e.g_hess.resize(mn);
    for (int j = 0; j < mn; ++j) {
      Vec gr = Vec::Zero(n);
      Mat h = Mat::Zero(n, n);
      e.g(ml + j) = p.nonlinear[j](z, &gr, second_order ? &h : nullptr);
      e.jac.row(ml + j) = gr.transpose();
      e.g_hess[j] = std::move(h);
    }
  } catch (...) {
    e.ok = false;
    return e;
  }
  e.ok = std::isfinite(e.f) && e.g.allFinite() && e.grad.allFinite();
  return e;
}

double max_step(const Vec& x, const Vec& dx) {
  double a = 1.0;
  for (int i = 0; i < x.size(); ++i)
    if (dx(i) < 0.0) a = std::min(a, -x(i) / dx(i));
  return a;
}

double inf_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

struct Score {
  double dual = 0.0, primal = 0.0, comp = 0.0;
  double max() const { return std::max({dual, primal, comp}); }
};

Score kkt_score(const Eval& e, const Vec& lam) {
  Score sc;
  Vec rd = -e.grad;
  if (lam.size() > 0) rd += e.jac.transpose() * lam;
  sc.dual = inf_norm(rd) / (1.0 + inf_norm(e.grad));
  for (int j = 0; j < lam.size(); ++j) {
    sc.primal = std::max(sc.primal, e.g(j));
    sc.comp = std::max(sc.comp, std::abs(lam(j) * e.g(j)));
  }
  return sc;
}

// Newton steps on the equality system of the constraints the interior point
// run identified as active. Interior iterates stall once the barrier scaling
// becomes ill-conditioned; this recovers multipliers to near machine precision.
void polish(const Program& p, Result& r) {
  const int n = p.n;
  const int ml = static_cast<int>(p.A.rows());
  const int m = ml + static_cast<int>(p.nonlinear.size());
  Eval e = evaluate(p, r.z, true);
  if (!e.ok) return;
  Vec lam = r.lambda;
  Score cur = kkt_score(e, lam);
  for (int it = 0; it < 4; ++it) {
    std::vector<int> act;
    for (int j = 0; j < m; ++j)
      if (lam(j) > -e.g(j)) act.push_back(j);
    const int ka = static_cast<int>(act.size());
    Mat H = e.hess;
    for (int j = ml; j < m; ++j) H -= lam(j) * e.g_hess[j - ml];
    Mat K = Mat::Zero(n + ka, n + ka);
    Vec rhs(n + ka);
    K.topLeftCorner(n, n) = H;
    rhs.head(n) = -e.grad;
    for (int a = 0; a < ka; ++a) {
      K.block(0, n + a, n, 1) = -e.jac.row(act[a]).transpose();
      K.block(n + a, 0, 1, n) = e.jac.row(act[a]);
      rhs(n + a) = -e.g(act[a]);
    }
    Vec sol = K.completeOrthogonalDecomposition().solve(rhs);
    if (!sol.allFinite()) return;
    Vec lam_new = Vec::Zero(m);
    for (int a = 0; a < ka; ++a) lam_new(act[a]) = std::max(sol(n + a), 0.0);
    Vec z_new = r.z + sol.head(n);
    Eval trial = evaluate(p, z_new, true);
    if (!trial.ok) return;
    Score next = kkt_score(trial, lam_new);
    if (!(next.max() < cur.max())) return;
    r.z = z_new;
    r.lambda = lam_new;
    r.objective = trial.f;
    r.dual_residual = next.dual;
    r.primal_residual = next.primal;
    r.complementarity = next.comp;
    cur = next;
    e = std::move(trial);
  }
}

// Classic log-barrier path following from a strictly feasible point.
// Slower than the primal-dual iteration but monotone, so it serves as the
// fallback when that iteration stalls.
bool barrier(const Program& p, const Vec& z0, double tol, Result& out) {
  const int m = static_cast<int>(p.A.rows() + p.nonlinear.size());
  Eval e = evaluate(p, z0, true);
  if (!e.ok || m == 0 || (e.g.array() >= 0.0).any()) return false;
  Vec z = z0;
  auto phi = [&](const Eval& ev, double t) {
    double v = -t * ev.f;
    for (int j = 0; j < m; ++j) v -= std::log(-ev.g(j));
    return v;
  };
  double t = 1.0;
  int total = 0;
  while (true) {
    for (int it = 0; it < 100; ++it, ++total) {
      Vec inv = (-e.g).cwiseInverse();
      Vec grad = -t * e.grad + e.jac.transpose() * inv;
      Mat H = -t * e.hess + e.jac.transpose() * inv.cwiseAbs2().asDiagonal() * e.jac;
      for (std::size_t j = 0; j < p.nonlinear.size(); ++j)
        H += inv(p.A.rows() + static_cast<int>(j)) * e.g_hess[j];
      H.diagonal().array() += 1e-14 * (1.0 + H.diagonal().cwiseAbs().maxCoeff());
      Vec dz = -H.ldlt().solve(grad);
      double dec = -grad.dot(dz);
      if (!std::isfinite(dec) || dec < 2e-14) break;
      double f0 = phi(e, t), a = 1.0;
      Eval trial;
      bool moved = false;
      for (int bt = 0; bt < 60; ++bt, a *= 0.5) {
        trial = evaluate(p, z + a * dz, true);
        if (!trial.ok || (trial.g.array() >= 0.0).any()) continue;
        if (phi(trial, t) <= f0 - 0.25 * a * dec) {
          moved = true;
          break;
        }
      }
      if (!moved) break;
      z += a * dz;
      e = std::move(trial);
    }
    if (m / t < tol * 1e-2 || t > 1e16) break;
    t *= 10.0;
  }
  out = Result{};
  out.z = z;
  out.lambda = (-e.g).cwiseInverse() / t;
  out.objective = e.f;
  out.iterations = total;
  Score sc = kkt_score(e, out.lambda);
  out.dual_residual = sc.dual;
  out.primal_residual = sc.primal;
  out.complementarity = sc.comp;
  return true;
}

}  // namespace

Result maximize(const Program& p, const Vec& z0, const Options& opt) {
  const int m = static_cast<int>(p.A.rows() + p.nonlinear.size());
  Result res;
  Vec z = z0;
  Eval e = evaluate(p, z, true);
  if (!e.ok) {
    res.z = z;
    return res;
  }
  Vec s(m), lam(m);
  for (int j = 0; j < m; ++j) {
    s(j) = std::max(-e.g(j), 1e-2);
    lam(j) = 1.0;
  }

  auto residuals = [&](const Eval& ev, const Vec& sv, const Vec& lv, Vec& rd, Vec& rp) {
    rd = -ev.grad;
    if (m > 0) rd += ev.jac.transpose() * lv;
    rp = ev.g + sv;
  };

  Vec rd, rp;
  Result best;
  double best_score = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opt.max_iter; ++it) {
    residuals(e, s, lam, rd, rp);
    double mu = m > 0 ? s.dot(lam) / m : 0.0;
    double dscale = 1.0 + inf_norm(e.grad);
    res.iterations = it;
    res.dual_residual = inf_norm(rd) / dscale;
    res.primal_residual = inf_norm(rp);
    res.complementarity = mu;
    double score = std::max({res.dual_residual, res.primal_residual, 10.0 * mu});
    if (!(score >= best_score)) {
      best_score = score;
      best = res;
      best.z = z;
      best.lambda = lam;
      best.objective = e.f;
    }
    if (res.dual_residual <= opt.tol && res.primal_residual <= opt.tol && mu <= opt.tol * 0.1) {
      best.converged = true;
      break;
    }
    // Past this point the scaling matrix is too ill-conditioned to make progress.
    if (mu <= opt.tol * 1e-3) break;

    Mat H = -e.hess;
    for (std::size_t j = 0; j < p.nonlinear.size(); ++j)
      H += lam(p.A.rows() + static_cast<int>(j)) * e.g_hess[j];
    Vec D = lam.cwiseQuotient(s);
    Mat M = H;
    if (m > 0) M += e.jac.transpose() * D.asDiagonal() * e.jac;
    double reg = 1e-14 * (1.0 + M.diagonal().cwiseAbs().maxCoeff());
    M.diagonal().array() += reg;
    Eigen::LDLT<Mat> ldlt(M);

    auto direction = [&](const Vec& rc, Vec& dz, Vec& dl, Vec& ds) {
      Vec rhs = -rd;
      if (m > 0) rhs -= e.jac.transpose() * (D.cwiseProduct(rp) - rc.cwiseQuotient(s));
      dz = ldlt.solve(rhs);
      if (m > 0) {
        dl = D.cwiseProduct(e.jac * dz + rp) - rc.cwiseQuotient(s);
        ds = -(rc + s.cwiseProduct(dl)).cwiseQuotient(lam);
      } else {
        dl.resize(0);
        ds.resize(0);
      }
    };

    Vec dz, dl, ds;
    Vec rc = s.cwiseProduct(lam);
    direction(rc, dz, dl, ds);
    double sigma = 0.0;
    if (m > 0) {
      double ap = max_step(s, ds), ad = max_step(lam, dl);
      double mu_aff = (s + ap * ds).dot(lam + ad * dl) / m;
      sigma = std::pow(std::max(mu_aff, 0.0) / mu, 3.0);
      sigma = std::min(sigma, 1.0);
      rc = s.cwiseProduct(lam) + ds.cwiseProduct(dl) - Vec::Constant(m, sigma * mu);
      direction(rc, dz, dl, ds);
    }

    double frac = std::max(0.995, 1.0 - mu);
    double alpha = 1.0;
    if (m > 0) alpha = std::min(1.0, frac * std::min(max_step(s, ds), max_step(lam, dl)));

    // Backtrack on the KKT residual at the centering target when curvature comes from
    // the constraints; purely linear constraints take the boundary step.
    auto merit = [&](const Eval& ev, const Vec& sv, const Vec& lv) {
      Vec a, b;
      residuals(ev, sv, lv, a, b);
      double c = m > 0 ? (sv.cwiseProduct(lv).array() - sigma * mu).matrix().squaredNorm() : 0.0;
      return a.squaredNorm() + b.squaredNorm() + c;
    };
    bool curved = false;
    for (const auto& h : e.g_hess) curved = curved || h.cwiseAbs().maxCoeff() > 0.0;
    const double m0 = curved ? merit(e, s, lam) : 0.0;
    Eval trial;
    for (int bt = 0; bt < 60; ++bt) {
      trial = evaluate(p, z + alpha * dz, true);
      if (trial.ok) {
        if (!curved || bt >= 30) break;
        double m1 = merit(trial, s + alpha * ds, lam + alpha * dl);
        if (std::isfinite(m1) && m1 <= m0 * (1.0 - 1e-4 * alpha)) break;
      }
      alpha *= 0.5;
    }
    if (!trial.ok) break;
    z += alpha * dz;
    if (m > 0) {
      s += alpha * ds;
      lam += alpha * dl;
    }
    e = std::move(trial);
  }
  if (!std::isfinite(best_score)) {
    res.z = z;
    res.lambda = lam;
    res.objective = e.f;
    return res;
  }
  polish(p, best);
  if (!best.converged) {
    Result alt;
    auto worst = [](const Result& r) { return std::max({r.dual_residual, r.primal_residual, r.complementarity}); };
    if (barrier(p, z0, opt.tol, alt)) {
      polish(p, alt);
      if (worst(alt) < worst(best)) {
        alt.converged = worst(alt) <= opt.tol;
        return alt;
      }
    }
  }
  return best;
}

}  // namespace nova::cvx
