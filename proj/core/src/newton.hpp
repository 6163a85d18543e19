#pragma once

#include <functional>

#include <Eigen/Dense>

namespace l1lab::detail {

struct NewtonOptions {
  double tolerance = 1e-11;  // max-norm of the residual
  int max_iterations = 200;
  double fd_step = 1e-7;
  int max_halvings = 30;
};

struct NewtonResult {
  Eigen::VectorXd x;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Damped Newton with a forward-difference Jacobian and a halving line search
// on the max-norm of the residual. Residual evaluations that throw l1lab::Error
// count as rejected trial points.
NewtonResult damped_newton(const ResidualFn& f, Eigen::VectorXd x0,
                           const NewtonOptions& opt = {});

}  // namespace l1lab::detail
