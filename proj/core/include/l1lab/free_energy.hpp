#pragma once

// Large-M exponent F({v_t}) of the probability that T independent isotropic
// M-vectors with squared norms M v_t close into a loop, together with its
// extremising multipliers and first and second derivatives.

#include <initializer_list>

#include <Eigen/Dense>

namespace l1lab {

/// Per-block squared-norm densities v_t = |u_t|^2 / M. Holds T >= 2 strictly
/// positive finite entries; loop-closure feasibility is checked separately.
class NormVector {
 public:
  explicit NormVector(Eigen::VectorXd values);
  NormVector(std::initializer_list<double> values);

  const Eigen::VectorXd& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }
  double operator[](Eigen::Index t) const { return values_[t]; }

 private:
  Eigen::VectorXd values_;
};

/// True when F is finite at v: v_1 == v_2 (relative 1e-12) for T = 2, and
/// max_t v_t < sum_{s != t} v_s for T >= 3.
bool is_feasible(const NormVector& v);

struct LambdaSolution {
  Eigen::VectorXd lambda;  ///< extremising multipliers Lambda_t
  Eigen::VectorXd r;       ///< R_t = Lambda_t^{-1} / sum_s Lambda_s^{-1}
  double f_value = 0.0;    ///< F({v_t})
  double inverse_sum = 0.0;  ///< sum_t Lambda_t^{-1}
};

/// Extremises -1/2 ln(sum 1/Lambda) - 1/2 sum ln Lambda + 1/2 sum Lambda v
/// over Lambda and subtracts the spherical normalisation 1/2 sum ln v + T/2.
///
/// Stationarity gives v_t Lambda_t = 1 - R_t, equivalently
/// R_t (1 - R_t) = v_t / S with S = sum 1/Lambda, so the T coupled equations
/// collapse onto a monotone scalar equation sum_t R_t(S) = 1. At most one
/// block (the largest v_t) can sit on the R_t > 1/2 branch.
///
/// T = 2 is the constrained case v_1 = v_2 = v with Lambda = 1/(2v),
/// R = (1/2, 1/2) and F = -ln(v)/2 - 1/2.
///
/// Throws InfeasibleNorms when the loop cannot close.
LambdaSolution solve_lambda(const NormVector& v);

/// dF/dv_t = (Lambda_t - 1/v_t) / 2, so that -2 dF/dv_t = R_t / v_t.
Eigen::VectorXd grad_F(const NormVector& v);

/// 2 d^2F / dv_t dv_s = dLambda_s/dv_t + delta_ts / v_t^2.
///
/// The Jacobian of v(Lambda) is -(J + K) with J = diag((1-2R)/Lambda^2) and
/// K = (R/Lambda)(R/Lambda)^T, whose inverse is T (I + M)^{-1} T with
/// T = diag(Lambda / sqrt(1-2R)) and the rank-one M = w w^T,
/// w_t = R_t / sqrt(1 - 2 R_t). Sherman-Morrison gives (I+M)^{-1} in closed
/// form, and the diagonal 1/v^2 - T^2 simplifies to -w^2 / v^2.
///
/// Needs T >= 3 and every R_t < 1/2; throws DegenerateHessian otherwise.
Eigen::MatrixXd hess_F(const NormVector& v);

/// The same closed form without the R_t < 1/2 restriction. Sherman-Morrison on
/// the diagonal J stays valid when the largest block sits on the upper branch;
/// throws DegenerateHessian only when some 1 - 2R_t or the rank-one
/// denominator vanishes to working precision.
Eigen::MatrixXd hess_F_any_branch(const NormVector& v);

/// (I + M)^{-1} for M_mn = R_m R_n / sqrt((1-2R_m)(1-2R_n)). Every R_t must be
/// in (0, 1/2); throws DegenerateHessian otherwise.
Eigen::MatrixXd identity_plus_m_inverse(const Eigen::VectorXd& r);

}  // namespace l1lab
