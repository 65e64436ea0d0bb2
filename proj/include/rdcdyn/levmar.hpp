#pragma once

#include <Eigen/Dense>

#include <functional>

namespace rdcdyn {

/// Damped Gauss-Newton (Levenberg-Marquardt) for small dense problems, with
/// an optional projection applied to every trial point so box/simplex
/// constraints stay exactly satisfied. The Jacobian comes from central
/// differences with per-parameter steps.
struct LmOptions {
  int max_iterations = 200;
  double cost_tol = 1e-16;   // relative cost reduction per accepted step
  double step_tol = 1e-13;   // infinity norm of the accepted step
  double cost_floor = 1e-30; // absolute cost treated as an exact fit
  double lambda_init = 1e-3;
  double lambda_max = 1e12;
  Eigen::VectorXd diff_steps;  // required, one entry per parameter
};

struct LmResult {
  Eigen::VectorXd x;
  double cost = 0.0;  // sum of squared residuals
  int iterations = 0;
  bool converged = false;
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using ProjectFn = std::function<void(Eigen::VectorXd&)>;

LmResult levenberg_marquardt(const ResidualFn& residuals, Eigen::VectorXd x0,
                             const LmOptions& options,
                             const ProjectFn& project = nullptr);

}  // namespace rdcdyn
