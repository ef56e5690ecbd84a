#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace nova::cvx {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Value plus optional gradient/Hessian outputs (either may be null).
using SmoothFn = std::function<double(const Vec& z, Vec* grad, Mat* hess)>;

// maximize F(z)  s.t.  A z <= b,  g_j(z) <= 0
// with F concave and every g_j convex, all twice differentiable.
struct Program {
  int n = 0;
  SmoothFn objective;
  Mat A;
  Vec b;
  std::vector<SmoothFn> nonlinear;
};

struct Options {
  double tol = 1e-11;
  int max_iter = 300;
};

struct Result {
  Vec z;
  Vec lambda;            // linear rows first, then nonlinear constraints
  double objective = 0.0;
  double complementarity = 0.0;  // s'lambda / m at exit
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Primal-dual interior point method (Mehrotra predictor-corrector) on the
// slack formulation. z0 need not be feasible.
Result maximize(const Program& p, const Vec& z0, const Options& opt = {});

}  // namespace nova::cvx
