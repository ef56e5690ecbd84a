#include "nova/lp.hpp"

#include <cmath>
#include <limits>

#include "nova/error.hpp"

namespace nova {

namespace {

constexpr double kEps = 1e-11;

// Tableau rows 0..m-1 are constraints, row m is the objective (reduced costs,
// maximization: entering column has a negative entry).
struct Tableau {
  int m, n;  // constraints, columns excluding rhs
  std::vector<std::vector<double>> t;
  std::vector<int> basis;

  double& rhs(int i) { return t[i][n]; }

  void pivot(int r, int c) {
    double pv = t[r][c];
    for (double& x : t[r]) x /= pv;
    for (int i = 0; i <= m; ++i) {
      if (i == r) continue;
      double f = t[i][c];
      if (f == 0.0) continue;
      for (int j = 0; j <= n; ++j) t[i][j] -= f * t[r][j];
    }
    basis[r] = c;
  }

  // Returns false when unbounded.
  bool run(int allowed_cols) {
    for (int guard = 0; guard < 100000; ++guard) {
      int enter = -1;
      for (int j = 0; j < allowed_cols; ++j)
        if (t[m][j] < -kEps) {
          enter = j;
          break;
        }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        if (t[i][enter] > kEps) {
          double ratio = t[i][n] / t[i][enter];
          if (ratio < best - kEps || (std::abs(ratio - best) <= kEps && leave >= 0 && basis[i] < basis[leave])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    throw Error(Errc::NoConvergence, "simplex iteration limit");
  }
};

}  // namespace

LpResult lp_maximize(const std::vector<double>& c, const std::vector<std::vector<double>>& A,
                     const std::vector<double>& b) {
  const int m = static_cast<int>(A.size());
  const int nx = static_cast<int>(c.size());
  if (static_cast<int>(b.size()) != m) throw Error(Errc::InvalidArgument, "LP dimension mismatch");
  // columns: x (nx), slacks (m), artificials (m)
  Tableau T;
  T.m = m;
  T.n = nx + 2 * m;
  T.t.assign(m + 1, std::vector<double>(T.n + 1, 0.0));
  T.basis.assign(m, 0);
  for (int i = 0; i < m; ++i) {
    if (static_cast<int>(A[i].size()) != nx) throw Error(Errc::InvalidArgument, "LP row has wrong width");
    double sgn = b[i] < 0.0 ? -1.0 : 1.0;
    for (int j = 0; j < nx; ++j) T.t[i][j] = sgn * A[i][j];
    T.t[i][nx + i] = sgn;
    T.t[i][nx + m + i] = 1.0;
    T.t[i][T.n] = sgn * b[i];
    T.basis[i] = nx + m + i;
  }
  // phase 1: maximize -sum(artificials)
  for (int i = 0; i < m; ++i)
    for (int j = 0; j <= T.n; ++j)
      if (j < nx + m || j == T.n) T.t[m][j] -= T.t[i][j];
  T.run(nx + m);
  LpResult out;
  if (-T.t[m][T.n] > 1e-9) {
    out.status = LpStatus::Infeasible;
    return out;
  }
  // drive remaining artificials out of the basis
  for (int i = 0; i < m; ++i) {
    if (T.basis[i] < nx + m) continue;
    for (int j = 0; j < nx + m; ++j)
      if (std::abs(T.t[i][j]) > kEps) {
        T.pivot(i, j);
        break;
      }
  }
  // phase 2
  std::fill(T.t[m].begin(), T.t[m].end(), 0.0);
  for (int j = 0; j < nx; ++j) T.t[m][j] = -c[j];
  for (int i = 0; i < m; ++i) {
    int bj = T.basis[i];
    if (bj < nx && c[bj] != 0.0) {
      double f = T.t[m][bj];
      for (int j = 0; j <= T.n; ++j) T.t[m][j] -= f * T.t[i][j];
    }
  }
  if (!T.run(nx + m)) {
    out.status = LpStatus::Unbounded;
    return out;
  }
  out.status = LpStatus::Optimal;
  out.x.assign(nx, 0.0);
  for (int i = 0; i < m; ++i)
    if (T.basis[i] < nx) out.x[T.basis[i]] = T.t[i][T.n];
  for (int j = 0; j < nx; ++j) out.value += c[j] * out.x[j];
  return out;
}

}  // namespace nova
