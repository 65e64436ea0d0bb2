#include "rdcdyn/levmar.hpp"

#include <cmath>
#include <stdexcept>

namespace rdcdyn {

namespace {

Eigen::MatrixXd central_jacobian(const ResidualFn& f, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& steps,
                                 Eigen::Index m) {
  Eigen::MatrixXd j(m, x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double h = steps[k];
    probe[k] = x[k] + h;
    const Eigen::VectorXd hi = f(probe);
    probe[k] = x[k] - h;
    const Eigen::VectorXd lo = f(probe);
    probe[k] = x[k];
    j.col(k) = (hi - lo) / (2.0 * h);
  }
  return j;
}

}  // namespace

LmResult levenberg_marquardt(const ResidualFn& residuals, Eigen::VectorXd x0,
                             const LmOptions& options,
                             const ProjectFn& project) {
  if (options.diff_steps.size() != x0.size())
    throw std::invalid_argument("diff_steps must match the parameter count");

  if (project) project(x0);
  LmResult res;
  res.x = x0;
  Eigen::VectorXd r = residuals(res.x);
  res.cost = r.squaredNorm();

  double lambda = options.lambda_init;
  for (res.iterations = 0; res.iterations < options.max_iterations;
       ++res.iterations) {
    if (res.cost < options.cost_floor) {
      res.converged = true;
      break;
    }
    const Eigen::MatrixXd j =
        central_jacobian(residuals, res.x, options.diff_steps, r.size());
    const Eigen::MatrixXd h = j.transpose() * j;
    const Eigen::VectorXd g = j.transpose() * r;

    // Marquardt scaling keeps the damping meaningful across parameters of
    // very different magnitudes (degrees vs occupancy fractions).
    Eigen::VectorXd diag = h.diagonal();
    const double diag_floor = std::max(diag.maxCoeff(), 1e-300) * 1e-12;
    for (Eigen::Index i = 0; i < diag.size(); ++i)
      diag[i] = std::max(diag[i], diag_floor);

    bool accepted = false;
    while (lambda <= options.lambda_max) {
      Eigen::MatrixXd damped = h;
      damped.diagonal() += lambda * diag;
      const Eigen::VectorXd delta = damped.ldlt().solve(-g);
      Eigen::VectorXd x_try = res.x + delta;
      if (project) project(x_try);
      const Eigen::VectorXd r_try = residuals(x_try);
      const double cost_try = r_try.squaredNorm();
      if (cost_try < res.cost) {
        const double reduction = res.cost - cost_try;
        const double step_norm = (x_try - res.x).lpNorm<Eigen::Infinity>();
        res.x = x_try;
        r = r_try;
        res.cost = cost_try;
        lambda = std::max(lambda * 0.3, 1e-12);
        accepted = true;
        if (reduction < options.cost_tol * std::max(res.cost, 1e-300) ||
            step_norm < options.step_tol)
          res.converged = true;
        break;
      }
      lambda *= 4.0;
    }
    if (!accepted) {
      // No downhill direction survives maximal damping: local minimum.
      res.converged = true;
      break;
    }
    if (res.converged) break;
  }
  return res;
}

}  // namespace rdcdyn
