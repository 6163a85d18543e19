#pragma once

#include <string>

#include <Eigen/Dense>

#include "l1lab/dictionary.hpp"

namespace l1lab {

enum class BpStatus { optimal, max_iter, numerical_failure };

std::string to_string(BpStatus status);

struct BpOptions {
  double tolerance = 1e-9;
  int max_iterations = 100;
  double step_fraction = 0.99;
};

struct BpSolution {
  Eigen::VectorXd xhat;
  double l1_value = 0.0;
  int iterations = 0;
  double feasibility_gap = 0.0;  ///< |D xhat - y|_inf
  double duality_gap = 0.0;      ///< primal minus dual objective
  BpStatus status = BpStatus::numerical_failure;
};

/// min |x|_1 subject to D x = y.
///
/// Solved as the standard-form LP min 1^T z, [D -D] z = y, z >= 0 with
/// x = z_+ - z_-, by Mehrotra's predictor-corrector interior-point method.
/// The normal equations collapse to the M x M system D diag(d_+ + d_-) D^T,
/// factored by Cholesky. Optimal means |D x - y|_inf, the dual residual and
/// the gap relative to 1 + |x|_1 are all <= tolerance.
/// D must have full row rank.
BpSolution solve_bp(const Eigen::MatrixXd& D, const Eigen::VectorXd& y,
                    const BpOptions& opt = {});

inline BpSolution solve_bp(const Dictionary& D, const Eigen::VectorXd& y,
                           const BpOptions& opt = {}) {
  return solve_bp(D.matrix, y, opt);
}

/// |x0 - xhat|_1 < 1e-6.
bool recovery_success(const Eigen::VectorXd& x0, const Eigen::VectorXd& xhat);

}  // namespace l1lab
