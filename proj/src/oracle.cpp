#include "nova/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "nova/convex.hpp"
#include "nova/error.hpp"
#include "nova/lp.hpp"
#include "nova/metrics.hpp"

namespace nova {

namespace {

struct Stats {
  std::vector<double> w;  // length-weighted entry weights
  double lambda = 0.0, m = 0.0, mu = 0.0, v = 0.0, e = 0.0, sigma = 0.0;
};

std::vector<double> entry_weights(const ClientModel& cm, double* lambda) {
  double el = 0.0;
  for (const auto& e : cm.entries) el += e.prob * e.length;
  std::vector<double> w;
  for (const auto& e : cm.entries) w.push_back(e.prob * e.length / el);
  if (lambda) *lambda = el;
  return w;
}

Stats stats_of(const ClientModel& cm, const std::vector<double>& q, const UtilitySpec& u) {
  Stats s;
  s.w = entry_weights(cm, &s.lambda);
  for (std::size_t j = 0; j < q.size(); ++j) {
    s.m += s.w[j] * q[j];
    s.mu += s.w[j] * u.uq.value(q[j]);
    s.sigma += s.w[j] * cm.entries[j].f->rate(q[j]);
  }
  for (std::size_t j = 0; j < q.size(); ++j) s.v += s.w[j] * (q[j] - s.m) * (q[j] - s.m);
  s.e = s.mu - u.uv.value(s.v);
  return s;
}

std::pair<double, double> domain(const FlEntry& e, const Preferences& p) {
  double lo = std::max(0.0, e.f->q_lo());
  double hi = std::min(p.q_max, e.f->q_hi());
  return {lo, hi};
}

double rate_scale(const StationaryModel& m) {
  double r = 0.0;
  for (const auto& c : m.clients)
    for (const auto& e : c.entries)
      for (const auto& p : e.f->points()) r = std::max(r, p.rate);
  return r;
}

double mean_floor(const std::vector<ConstraintEntry>& cs, std::size_t i) {
  double s = 0.0;
  for (const auto& ce : cs) s += ce.prob * ce.c.r_min()[i];
  return s;
}

double client_pen(const Preferences& p, double b, double d) {
  double pen = b / (1.0 + p.beta_bar);
  if (p.cost_constrained()) pen += p.p_d * d / p.p_bar;
  return pen;
}

void check_sizes(const StationaryModel& model, const std::vector<Preferences>& prefs,
                 const std::vector<UtilitySpec>& u) {
  if (prefs.size() != model.clients.size() || u.size() != model.clients.size())
    throw Error(Errc::InvalidArgument, "one preference and utility set per client required");
}

}  // namespace

double KktReport::max() const { return std::max({stationarity, complementarity, feasibility}); }

void validate_model(const StationaryModel& m) {
  if (m.constraints.empty()) throw Error(Errc::InvalidArgument, "empty constraint support");
  if (m.clients.empty()) throw Error(Errc::InvalidArgument, "no clients");
  if (!(m.tau_slot > 0.0)) throw Error(Errc::InvalidArgument, "slot length must be positive");
  double total = 0.0;
  for (const auto& ce : m.constraints) {
    if (ce.c.kind() != SlotConstraint::Kind::Linear)
      throw Error(Errc::InvalidArgument, "stationary models use linear slot constraints");
    if (ce.c.size() != m.clients.size()) throw Error(Errc::InvalidArgument, "constraint size differs from client count");
    if (!(ce.prob > 0.0)) throw Error(Errc::InvalidArgument, "constraint probabilities must be positive");
    total += ce.prob;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error(Errc::InvalidArgument, "constraint probabilities must sum to 1");
  for (const auto& c : m.clients) {
    if (c.entries.empty()) throw Error(Errc::InvalidArgument, "client without segment support");
    double t = 0.0;
    for (const auto& e : c.entries) {
      if (!e.f) throw Error(Errc::InvalidArgument, "entry without tradeoff");
      if (!(e.prob > 0.0) || !(e.length > 0.0))
        throw Error(Errc::InvalidArgument, "entry probabilities and lengths must be positive");
      if (!(e.f->q_hi() > e.f->q_lo())) throw Error(Errc::InvalidArgument, "tradeoff domain has zero width");
      t += e.prob;
    }
    if (std::abs(t - 1.0) > 1e-9) throw Error(Errc::InvalidArgument, "entry probabilities must sum to 1");
  }
}

bool allocation_feasible(const std::vector<ConstraintEntry>& cs, const std::vector<double>& need) {
  const std::size_t n = need.size(), nc = cs.size();
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  for (std::size_t c = 0; c < nc; ++c) {
    if (cs[c].c.residual_share() < -1e-12) return false;
    std::vector<double> row(nc * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) row[c * n + i] = 1.0;
    A.push_back(row);
    b.push_back(1.0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(nc * n, 0.0);
    double scale = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
      double coef = cs[c].prob * std::max(cs[c].c.residual_share(), 0.0) * cs[c].c.peaks()[i];
      row[c * n + i] = -coef;
      scale = std::max(scale, coef);
    }
    double rhs = mean_floor(cs, i) - need[i] * (1.0 - 1e-9);
    if (scale == 0.0) {
      if (rhs < 0.0) return false;
      continue;
    }
    for (double& x : row) x /= scale;
    A.push_back(row);
    b.push_back(rhs / scale);
  }
  std::vector<double> obj(nc * n, 0.0);
  return lp_maximize(obj, A, b).status != LpStatus::Infeasible;
}

ClientParams stationary_params(const OracleClient& c, const Preferences& pref, const UtilitySpec& u) {
  ClientParams p;
  p.pref = pref;
  p.m = c.m;
  p.mu = c.mu;
  p.v = c.v;
  p.b = u.hb.inverse(c.b);
  p.d = pref.cost_constrained() ? u.hd.inverse(c.d) : u.hd.floor;
  p.lambda = c.lambda;
  p.sigma = c.sigma;
  return p;
}

KktReport verify_kkt_optstat(const OptstatSolution& sol, const StationaryModel& model,
                             const std::vector<Preferences>& prefs, const std::vector<UtilitySpec>& u) {
  check_sizes(model, prefs, u);
  KktReport rep;
  const double tau = model.tau_slot;
  const double R = rate_scale(model);
  const std::size_t n = model.clients.size();
  std::vector<double> rho(n, 0.0);
  for (std::size_t c = 0; c < model.constraints.size(); ++c)
    for (std::size_t i = 0; i < n; ++i) rho[i] += model.constraints[c].prob * sol.r[c][i];

  std::vector<double> unit(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ClientModel& cm = model.clients[i];
    const OracleClient& oc = sol.clients[i];
    const Preferences& pf = prefs[i];
    const double qmax = pf.q_max;
    Stats st = stats_of(cm, oc.q, u[i]);
    const double A = u[i].ue.d1(st.e);
    const double B = u[i].uv.d1(st.v);
    unit[i] = A * qmax;
    const double pen = client_pen(pf, oc.b, oc.d);
    for (std::size_t j = 0; j < cm.entries.size(); ++j) {
      const QrTradeoff& f = *cm.entries[j].f;
      auto [lo, hi] = domain(cm.entries[j], pf);
      double q = oc.q[j];
      rep.feasibility = std::max({rep.feasibility, (lo - q) / qmax, (q - hi) / qmax});
      auto [sl, sr] = f.subgradient(std::clamp(q, f.q_lo(), f.q_hi()), 1e-7 * qmax);
      double g = A * (u[i].uq.d1(q) - 2.0 * B * (q - st.m)) + oc.gamma[j] - oc.gamma_bar[j];
      double dist = std::max({pen * sl - g, g - pen * sr, 0.0});
      rep.stationarity = std::max(rep.stationarity, dist / A);
      rep.stationarity = std::max({rep.stationarity, -oc.gamma[j] / A, -oc.gamma_bar[j] / A});
      rep.complementarity = std::max(rep.complementarity, oc.gamma[j] * std::abs(q - lo) / (A * qmax));
      rep.complementarity = std::max(rep.complementarity, oc.gamma_bar[j] * std::abs(hi - q) / (A * qmax));
    }
    double gap = st.sigma / (1.0 + pf.beta_bar) - rho[i] / tau;
    rep.feasibility = std::max(rep.feasibility, gap / std::max(R, 1.0));
    rep.complementarity = std::max(rep.complementarity, oc.b * std::abs(gap) / unit[i]);
    rep.stationarity = std::max(rep.stationarity, -oc.b * R / unit[i]);
    if (pf.cost_constrained()) {
      double cg = pf.p_d * st.sigma / pf.p_bar - 1.0;
      rep.feasibility = std::max(rep.feasibility, cg);
      rep.complementarity = std::max(rep.complementarity, oc.d * std::abs(cg) / unit[i]);
      rep.stationarity = std::max(rep.stationarity, -oc.d / unit[i]);
    }
  }
  double bnat = 0.0;
  for (std::size_t i = 0; i < n; ++i) bnat = std::max(bnat, unit[i] / std::max(R, 1.0));
  for (std::size_t c = 0; c < model.constraints.size(); ++c) {
    const SlotConstraint& sc = model.constraints[c].c;
    double cv = sc.eval(sol.r[c]);
    rep.feasibility = std::max(rep.feasibility, cv);
    rep.stationarity = std::max(rep.stationarity, -sol.chi[c] / (bnat * sc.peaks()[0]));
    double umin = *std::min_element(unit.begin(), unit.end());
    rep.complementarity = std::max(rep.complementarity, sol.chi[c] * std::abs(cv) / tau / umin);
    for (std::size_t i = 0; i < n; ++i) {
      double p = sc.peaks()[i];
      double st = sol.clients[i].b - sol.chi[c] / p + sol.omega[c][i];
      rep.stationarity = std::max(rep.stationarity, std::abs(st) / bnat);
      rep.stationarity = std::max(rep.stationarity, -sol.omega[c][i] / bnat);
      double slack = sol.r[c][i] - sc.r_min()[i];
      rep.feasibility = std::max(rep.feasibility, -slack / p);
      rep.complementarity = std::max(rep.complementarity, sol.omega[c][i] * std::abs(slack) / tau / unit[i]);
    }
  }
  return rep;
}

OptstatSolution solve_optstat(const StationaryModel& model, const std::vector<Preferences>& prefs,
                              const std::vector<UtilitySpec>& u, const OptstatOptions& opt) {
  validate_model(model);
  check_sizes(model, prefs, u);
  const std::size_t n = model.clients.size();
  const std::size_t nc = model.constraints.size();
  const double tau = model.tau_slot;
  const double R = rate_scale(model);

  // strict feasibility at the lowest qualities
  std::vector<double> need(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Preferences& pf = prefs[i];
    double lambda;
    auto w = entry_weights(model.clients[i], &lambda);
    double sig = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      const auto& e = model.clients[i].entries[j];
      sig += w[j] * e.f->rate(domain(e, pf).first);
    }
    if (pf.cost_constrained() && pf.p_d * sig > pf.p_bar * (1.0 + 1e-12))
      throw Error(Errc::InfeasibleModel, "cost cap below the cheapest representation of client " + std::to_string(i));
    need[i] = tau * sig / (1.0 + pf.beta_bar);
  }
  if (!allocation_feasible(model.constraints, need))
    throw Error(Errc::InfeasibleModel, "capacity cannot carry the lowest qualities");

  std::size_t entries = 0;
  for (const auto& c : model.clients) entries += c.entries.size();
  if (entries > 600) throw Error(Errc::TooLarge, "more than 600 quality variables");

  // variable layout: per client [q_hat..., t_hat...], then r_hat[c][i]
  std::vector<int> qoff(n), toff(n);
  int nv = 0;
  for (std::size_t i = 0; i < n; ++i) {
    int J = static_cast<int>(model.clients[i].entries.size());
    qoff[i] = nv;
    toff[i] = nv + J;
    nv += 2 * J;
  }
  const int roff = nv;
  nv += static_cast<int>(nc * n);
  auto rvar = [&](std::size_t c, std::size_t i) { return roff + static_cast<int>(c * n + i); };

  std::vector<std::vector<std::pair<int, double>>> rows;
  std::vector<double> rhs;
  auto add_row = [&](std::vector<std::pair<int, double>> r, double b) {
    rows.push_back(std::move(r));
    rhs.push_back(b);
    return static_cast<int>(rows.size()) - 1;
  };

  std::vector<std::vector<int>> row_lo(n), row_hi(n);
  std::vector<int> row_reb(n, -1), row_cost(n, -1), row_slot(nc);
  std::vector<std::vector<int>> row_floor(nc, std::vector<int>(n));
  std::vector<std::vector<double>> wts(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ClientModel& cm = model.clients[i];
    const Preferences& pf = prefs[i];
    const double qmax = pf.q_max;
    wts[i] = entry_weights(cm, nullptr);
    for (std::size_t j = 0; j < cm.entries.size(); ++j) {
      const int qv = qoff[i] + static_cast<int>(j), tv = toff[i] + static_cast<int>(j);
      auto [lo, hi] = domain(cm.entries[j], pf);
      row_lo[i].push_back(add_row({{qv, -1.0}}, -lo / qmax));
      row_hi[i].push_back(add_row({{qv, 1.0}}, hi / qmax));
      const auto& pts = cm.entries[j].f->points();
      for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        double s = (pts[k + 1].rate - pts[k].rate) / (pts[k + 1].q - pts[k].q);
        double a = pts[k].rate - s * pts[k].q;
        add_row({{qv, qmax * s / R}, {tv, -1.0}}, -a / R);
      }
      if (pts.size() == 1) add_row({{tv, -1.0}}, -pts[0].rate / R);
      add_row({{tv, 1.0}}, 2.0 * cm.entries[j].f->rate(hi) / R);
    }
    std::vector<std::pair<int, double>> reb;
    for (std::size_t j = 0; j < cm.entries.size(); ++j)
      reb.push_back({toff[i] + static_cast<int>(j), wts[i][j] / (1.0 + pf.beta_bar)});
    for (std::size_t c = 0; c < nc; ++c) reb.push_back({rvar(c, i), -model.constraints[c].prob});
    row_reb[i] = add_row(reb, 0.0);
    if (pf.cost_constrained()) {
      std::vector<std::pair<int, double>> cost;
      for (std::size_t j = 0; j < cm.entries.size(); ++j)
        cost.push_back({toff[i] + static_cast<int>(j), pf.p_d * R * wts[i][j] / pf.p_bar});
      row_cost[i] = add_row(cost, 1.0);
    }
  }
  for (std::size_t c = 0; c < nc; ++c) {
    const SlotConstraint& sc = model.constraints[c].c;
    std::vector<std::pair<int, double>> slot;
    for (std::size_t i = 0; i < n; ++i) slot.push_back({rvar(c, i), R * tau / sc.peaks()[i]});
    row_slot[c] = add_row(slot, 1.0);
    for (std::size_t i = 0; i < n; ++i) row_floor[c][i] = add_row({{rvar(c, i), -1.0}}, -sc.r_min()[i] / (R * tau));
  }

  cvx::Program p;
  p.n = nv;
  p.A = cvx::Mat::Zero(static_cast<int>(rows.size()), nv);
  p.b = cvx::Vec::Zero(static_cast<int>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (auto [j, v] : rows[k]) p.A(static_cast<int>(k), j) += v;
    p.b(static_cast<int>(k)) = rhs[k];
  }
  double qscale = 0.0;
  for (const auto& pf : prefs) qscale = std::max(qscale, pf.q_max);
  const double kf = 1.0 / (static_cast<double>(n) * qscale);

  p.objective = [&](const cvx::Vec& z, cvx::Vec* grad, cvx::Mat* hess) {
    double F = 0.0;
    if (grad) grad->setZero();
    if (hess) hess->setZero();
    for (std::size_t i = 0; i < n; ++i) {
      const UtilitySpec& ui = u[i];
      const double qmax = prefs[i].q_max;
      const auto& w = wts[i];
      const int J = static_cast<int>(w.size());
      std::vector<double> q(J);
      double m = 0.0, mu = 0.0, v = 0.0;
      for (int j = 0; j < J; ++j) {
        q[j] = qmax * z(qoff[i] + j);
        m += w[j] * q[j];
        mu += w[j] * ui.uq.value(q[j]);
      }
      for (int j = 0; j < J; ++j) v += w[j] * (q[j] - m) * (q[j] - m);
      const double e = mu - ui.uv.value(v);
      F += ui.ue.value(e);
      if (!grad && !hess) continue;
      const double a1 = ui.ue.d1(e), a2 = ui.ue.d2(e);
      const double v1 = ui.uv.d1(v), v2 = ui.uv.d2(v);
      cvx::Vec ge(J), gv(J);
      for (int j = 0; j < J; ++j) {
        gv(j) = 2.0 * w[j] * (q[j] - m);
        ge(j) = w[j] * ui.uq.d1(q[j]) - v1 * gv(j);
      }
      if (grad)
        for (int j = 0; j < J; ++j) (*grad)(qoff[i] + j) = kf * qmax * a1 * ge(j);
      if (hess) {
        cvx::Mat He = -v2 * gv * gv.transpose();
        for (int j = 0; j < J; ++j)
          for (int k = 0; k < J; ++k)
            He(j, k) += 2.0 * v1 * w[j] * w[k] - (j == k ? 2.0 * v1 * w[j] - w[j] * ui.uq.d2(q[j]) : 0.0);
        cvx::Mat H = a2 * ge * ge.transpose() + a1 * He;
        hess->block(qoff[i], qoff[i], J, J) = kf * qmax * qmax * H;
      }
    }
    return kf * F;
  };

  cvx::Vec z0 = cvx::Vec::Zero(nv);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& cm = model.clients[i];
    for (std::size_t j = 0; j < cm.entries.size(); ++j) {
      auto [lo, hi] = domain(cm.entries[j], prefs[i]);
      double q = lo + 0.05 * (hi - lo);
      z0(qoff[i] + static_cast<int>(j)) = q / prefs[i].q_max;
      z0(toff[i] + static_cast<int>(j)) = 1.05 * cm.entries[j].f->rate(q) / R;
    }
  }
  for (std::size_t c = 0; c < nc; ++c) {
    const SlotConstraint& sc = model.constraints[c].c;
    double res = std::max(sc.residual_share(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      z0(rvar(c, i)) = (sc.r_min()[i] + 0.9 * res * sc.peaks()[i] / n) / (R * tau);
  }

  cvx::Options o;
  o.tol = opt.tol;
  o.max_iter = opt.max_iter;
  cvx::Result res = cvx::maximize(p, z0, o);

  OptstatSolution sol;
  sol.iterations = res.iterations;
  sol.clients.resize(n);
  sol.r.assign(nc, std::vector<double>(n));
  sol.chi.assign(nc, 0.0);
  sol.omega.assign(nc, std::vector<double>(n, 0.0));
  for (std::size_t c = 0; c < nc; ++c) {
    const SlotConstraint& sc = model.constraints[c].c;
    for (std::size_t i = 0; i < n; ++i) sol.r[c][i] = std::max(R * tau * res.z(rvar(c, i)), sc.r_min()[i]);
    double cv = sc.eval(sol.r[c]);
    if (cv > 0.0) {
      double used = 0.0;
      for (std::size_t i = 0; i < n; ++i) used += (sol.r[c][i] - sc.r_min()[i]) / sc.peaks()[i];
      double scale = std::max(sc.residual_share(), 0.0) / used;
      for (std::size_t i = 0; i < n; ++i) sol.r[c][i] = sc.r_min()[i] + scale * (sol.r[c][i] - sc.r_min()[i]);
    }
    const double pc = model.constraints[c].prob;
    sol.chi[c] = std::max(res.lambda(row_slot[c]), 0.0) * tau / (kf * pc);
    for (std::size_t i = 0; i < n; ++i)
      sol.omega[c][i] = std::max(res.lambda(row_floor[c][i]), 0.0) / (kf * R * pc);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const ClientModel& cm = model.clients[i];
    const Preferences& pf = prefs[i];
    OracleClient& oc = sol.clients[i];
    const int J = static_cast<int>(cm.entries.size());
    for (int j = 0; j < J; ++j) {
      auto [lo, hi] = domain(cm.entries[j], pf);
      oc.q.push_back(std::clamp(pf.q_max * res.z(qoff[i] + j), lo, hi));
      double scale = kf * pf.q_max * wts[i][j];
      oc.gamma.push_back(std::max(res.lambda(row_lo[i][j]), 0.0) / scale);
      oc.gamma_bar.push_back(std::max(res.lambda(row_hi[i][j]), 0.0) / scale);
    }
    oc.b = std::max(res.lambda(row_reb[i]), 0.0) / (R * kf);
    oc.d = row_cost[i] >= 0 ? std::max(res.lambda(row_cost[i]), 0.0) / kf : 0.0;
    Stats st = stats_of(cm, oc.q, u[i]);
    oc.m = st.m;
    oc.mu = st.mu;
    oc.v = st.v;
    oc.e = st.e;
    oc.sigma = st.sigma;
    oc.lambda = st.lambda;
    for (std::size_t c = 0; c < nc; ++c) oc.rho += model.constraints[c].prob * sol.r[c][i];
    sol.value += u[i].ue.value(st.e);
  }
  KktReport rep = verify_kkt_optstat(sol, model, prefs, u);
  sol.kkt_residual = rep.max();
  if (sol.kkt_residual > opt.accept) {
    std::ostringstream os;
    os << "stationary program stopped after " << res.iterations << " iterations with KKT residual "
       << sol.kkt_residual;
    throw Error(Errc::NoConvergence, os.str());
  }
  return sol;
}

double optstat_dual_bound(const StationaryModel& model, const std::vector<Preferences>& prefs,
                          const std::vector<UtilitySpec>& u, const std::vector<double>& b,
                          const std::vector<double>& d) {
  validate_model(model);
  check_sizes(model, prefs, u);
  const std::size_t n = model.clients.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (u[i].ue.kind != UeSpec::Kind::Identity || u[i].uv.kind != UvSpec::Kind::Linear)
      throw Error(Errc::InvalidArgument, "dual bound needs identity U^E and linear U^V");
    const ClientModel& cm = model.clients[i];
    auto w = entry_weights(cm, nullptr);
    UtilitySpec lin = u[i];
    lin.hb = HbSpec::linear(1.0, 1.0);
    lin.hd = HdSpec{1.0, 0.0};
    ClientParams p;
    p.pref = prefs[i];
    p.b = b[i];
    p.d = d[i];
    p.mu = 0.0;
    p.v = 0.0;
    const double eta = u[i].uv.eta;
    auto inner = [&](double m, double* dm) {
      p.m = m;
      double val = 0.0, slope = 0.0;
      for (std::size_t j = 0; j < w.size(); ++j) {
        double q = solve_qnova(p, lin, *cm.entries[j].f).q;
        val += w[j] * phi_q(q, p, lin, *cm.entries[j].f);
        slope += w[j] * 2.0 * eta * (q - m);
      }
      if (dm) *dm = slope;
      return val;
    };
    double lo = 0.0, hi = prefs[i].q_max;
    for (int k = 0; k < 100; ++k) {
      double mid = 0.5 * (lo + hi), s;
      inner(mid, &s);
      (s > 0.0 ? lo : hi) = mid;
    }
    total += inner(0.5 * (lo + hi), nullptr);
    if (prefs[i].cost_constrained()) total += d[i];
  }
  for (const auto& ce : model.constraints) total += ce.prob * solve_rnova_linear(b, ce.c).objective / model.tau_slot;
  return total;
}

EmpiricalModel empirical_model(const OfflineInstance& inst) {
  if (inst.slots.empty()) throw Error(Errc::InvalidArgument, "instance without slots");
  EmpiricalModel em;
  em.model.tau_slot = inst.tau_slot;
  const double K = static_cast<double>(inst.slots.size());
  for (const auto& sc : inst.slots) {
    std::size_t k = 0;
    for (; k < em.model.constraints.size(); ++k)
      if (em.model.constraints[k].c == sc) break;
    if (k == em.model.constraints.size()) em.model.constraints.push_back({sc, 0.0});
    em.model.constraints[k].prob += 1.0 / K;
    em.slot_entry.push_back(k);
  }
  for (const auto& v : inst.videos) {
    validate_trace(v);
    ClientModel cm;
    std::vector<std::size_t> map;
    const double S = static_cast<double>(v.segments.size());
    for (const auto& seg : v.segments) {
      std::size_t k = 0;
      for (; k < cm.entries.size(); ++k) {
        const FlEntry& e = cm.entries[k];
        if (e.length == seg.length && (e.f == seg.tradeoff || *e.f == *seg.tradeoff)) break;
      }
      if (k == cm.entries.size()) cm.entries.push_back({seg.tradeoff, seg.length, 0.0, seg.available_q});
      cm.entries[k].prob += 1.0 / S;
      map.push_back(k);
    }
    em.model.clients.push_back(std::move(cm));
    em.segment_entry.push_back(std::move(map));
  }
  // absorb round-off so probabilities sum to 1
  auto renorm = [](auto& items) {
    double t = 0.0;
    for (auto& x : items) t += x.prob;
    for (auto& x : items) x.prob /= t;
  };
  renorm(em.model.constraints);
  for (auto& c : em.model.clients) renorm(c.entries);
  return em;
}

OfflineSolution solve_opt_s(const OfflineInstance& inst, const std::vector<Preferences>& prefs,
                            const std::vector<UtilitySpec>& u, const OptstatOptions& opt) {
  EmpiricalModel em = empirical_model(inst);
  OfflineSolution out;
  out.grouped = solve_optstat(em.model, prefs, u, opt);
  std::vector<QualitySeries> series;
  for (std::size_t i = 0; i < inst.videos.size(); ++i) {
    QualitySeries s;
    s.client = static_cast<int>(i);
    std::vector<double> q;
    for (std::size_t k = 0; k < inst.videos[i].segments.size(); ++k) {
      double qi = out.grouped.clients[i].q[em.segment_entry[i][k]];
      q.push_back(qi);
      s.q.push_back(qi);
      s.l.push_back(inst.videos[i].segments[k].length);
    }
    out.q.push_back(std::move(q));
    series.push_back(std::move(s));
  }
  for (std::size_t k = 0; k < inst.slots.size(); ++k) out.r.push_back(out.grouped.r[em.slot_entry[k]]);
  out.value = phi_total(series, u);
  return out;
}

DiscreteSolution brute_force_discrete(const OfflineInstance& inst, const std::vector<Preferences>& prefs,
                                      const std::vector<UtilitySpec>& u, double max_combinations) {
  const std::size_t n = inst.videos.size();
  if (prefs.size() != n || u.size() != n) throw Error(Errc::InvalidArgument, "one preference and utility set per client required");
  double combos = 1.0;
  for (const auto& v : inst.videos)
    for (const auto& seg : v.segments) {
      if (seg.available_q.empty()) throw Error(Errc::EmptyChoiceSet, "segment without choices");
      combos *= static_cast<double>(seg.available_q.size());
    }
  if (combos > max_combinations) throw Error(Errc::TooLarge, "enumeration exceeds the combination limit");
  EmpiricalModel em = empirical_model(inst);

  struct Option {
    double value, need;
    std::vector<double> q;
  };
  std::vector<std::vector<Option>> fronts(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& segs = inst.videos[i].segments;
    const Preferences& pf = prefs[i];
    std::vector<std::size_t> idx(segs.size(), 0);
    std::vector<Option> all;
    while (true) {
      QualitySeries s;
      double bits = 0.0, secs = 0.0;
      for (std::size_t k = 0; k < segs.size(); ++k) {
        double q = segs[k].available_q[idx[k]];
        s.q.push_back(q);
        s.l.push_back(segs[k].length);
        bits += segs[k].length * segs[k].tradeoff->rate(q);
        secs += segs[k].length;
      }
      bool cost_ok = !pf.cost_constrained() || pf.p_d * bits / secs <= pf.p_bar * (1.0 + 1e-12);
      if (cost_ok) {
        double need = inst.tau_slot * bits / secs / (1.0 + pf.beta_bar);
        all.push_back({u[i].ue.value(qoe(s, u[i])), need, s.q});
      }
      std::size_t k = 0;
      while (k < idx.size() && ++idx[k] == segs[k].available_q.size()) idx[k++] = 0;
      if (k == idx.size()) break;
    }
    std::stable_sort(all.begin(), all.end(), [](const Option& a, const Option& b) {
      return a.need < b.need || (a.need == b.need && a.value > b.value);
    });
    double best = -std::numeric_limits<double>::infinity();
    for (auto& o : all)
      if (o.value > best) {
        best = o.value;
        fronts[i].push_back(std::move(o));
      }
    if (fronts[i].empty()) throw Error(Errc::InfeasibleModel, "cost cap excludes every choice of client " + std::to_string(i));
  }

  std::vector<double> best_rest(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) best_rest[i] = best_rest[i + 1] + fronts[i].back().value;
  DiscreteSolution out;
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> pick(n, 0), best_pick;
  std::vector<double> need(n);
  std::function<void(std::size_t, double)> dfs = [&](std::size_t i, double acc) {
    if (acc + best_rest[i] <= best) return;
    if (i == n) {
      if (allocation_feasible(em.model.constraints, need)) {
        best = acc;
        best_pick = pick;
      }
      return;
    }
    // highest value first
    for (std::size_t k = fronts[i].size(); k-- > 0;) {
      pick[i] = k;
      need[i] = fronts[i][k].need;
      dfs(i + 1, acc + fronts[i][k].value);
    }
  };
  dfs(0, 0.0);
  if (best_pick.empty()) throw Error(Errc::InfeasibleModel, "no assignment is feasible");
  out.value = best;
  for (std::size_t i = 0; i < n; ++i) out.q.push_back(fronts[i][best_pick[i]].q);
  return out;
}

}  // namespace nova
