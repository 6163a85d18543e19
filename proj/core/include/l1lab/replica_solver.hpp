#pragma once

// Replica-symmetric saddle point of l1 recovery with a concatenation of
// Haar-orthogonal blocks, the critical-density equations it reduces to at the
// edge of the success phase, and the local AT stability of that edge.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "l1lab/density_profile.hpp"

namespace l1lab {

/// Order parameters and their conjugates, one entry per block.
struct SaddleState {
  Eigen::VectorXd Q, chi, m;
  Eigen::VectorXd Qhat, chihat, mhat;
  Eigen::VectorXd mse;          ///< Q_t - 2 m_t + rho_t, evaluated stably
  std::optional<double> eta;    ///< T = 2 multiplier enforcing chi_1 = chi_2
  int iterations = 0;
  double last_update = 0.0;     ///< max-norm of the final (Q, chi, m) update
};

struct RsOptions {
  double damping = 0.5;
  double tolerance = 1e-9;
  int max_iterations = 200000;
};

/// Damped iteration of the saddle-point equations at mean density mu.
///
/// Given chi: (Lambda, R) from the loop-closure exponent, Qhat = mhat = R/chi,
/// chihat = (2 d^2F) applied to the per-block mse (floored at 1e-300), then
/// (Q, chi, m) from the Bernoulli-Gaussian prior. T = 2 replaces the Hessian
/// step by chihat_t = mse_t / (2 chi^2) +/- eta with eta chosen so that the
/// updated chi_1 and chi_2 agree.
///
/// mu = 0 returns the exact all-zero state (Q = m = chi = 0, infinite hats).
/// Throws NonConvergence when the update does not fall below tolerance.
SaddleState rs_fixed_point(const DensityProfile& profile, double mu,
                           const std::optional<SaddleState>& init = std::nullopt,
                           const RsOptions& opt = {});

struct CriticalPoint {
  int T = 0;
  double mu_star = 0.0;
  double rho_c = 0.0;           ///< T^{-1} sum_t rho_t(mu_star)
  Eigen::VectorXd chihat;
  Eigen::VectorXd r;
  std::optional<double> eta;
  std::optional<double> at_eigen_gap;
  double residual = 0.0;
  int newton_steps = 0;
  std::vector<std::string> diagnostics;
};

/// Critical point of the rotationally invariant ensemble at compression rate
/// alpha: the pair
///   chihat = alpha^{-1} [2(1-rho) G(chihat) + rho (chihat + 1)],
///   alpha  = 2(1-rho) Q(chihat^{-1/2}) + rho.
/// rho is eliminated from the second equation and the first is bracketed on a
/// log grid. alpha = 1 returns rho_c = 1 with chihat = +inf.
/// Throws DomainError unless 0 < alpha <= 1, NonConvergence if no root is found.
CriticalPoint critical_point_uniform(double alpha);

/// T >= 3: Newton on the 2T+1 unknowns (mu, chihat_t, R_t)
///   sum_t R_t = 1,
///   chihat_t = g_t / R_t^2 - sum_s (S (I+M)^{-1} S)_ts (1-R_s)^2 g_s,
///   R_t = 2(1-rho_t) Q(chihat_t^{-1/2}) + rho_t,
/// with g_t = 2(1-rho_t) G(chihat_t) + rho_t (chihat_t + 1) and
/// S = diag(1 / (R sqrt(1-2R))). Starts from the uniform solution and follows
/// ten homotopy steps toward the target profile.
CriticalPoint critical_point_general(const DensityProfile& profile);

/// T = 2: R_1 = R_2 = 1/2 are fixed and the unknowns are (mu, chihat_1,
/// chihat_2, eta):
///   chihat_1 = 2 g_1 + eta,   chihat_2 = 2 g_2 - eta,
///   2(1-rho_t) Q(chihat_t^{-1/2}) + rho_t = 1/2.
CriticalPoint critical_point_T2(const DensityProfile& profile);

/// Dispatches on T: uniform-kind profiles of any T agree with
/// critical_point_uniform(1/T); this picks T2 or general.
CriticalPoint critical_point(const DensityProfile& profile);

struct AtReport {
  double det = 0.0;          ///< det(I - H Hhat)
  double eigen_gap = 0.0;    ///< |H Hhat v1 - v1| / |v1|, v1 ∝ 1/(1-R_t)
  double closest_eigenvalue = 0.0;  ///< real part of the eigenvalue nearest 1
};

/// Evaluates H Hhat at the critical point,
///   (H Hhat)_ts = delta_ts P_t / R_t^2
///               - (I+M)^{-1}_ts (1-R_s)^2 P_s / (R_t R_s sqrt(1-2R_t) sqrt(1-2R_s)),
/// with P_t = 2(1-rho_t) Q(chihat_t^{-1/2}) + rho_t and rho = profile(mu).
/// mu defaults to cp.mu_star, where P = R and v1 is an exact unit eigenvector.
/// T = 2 uses the scalar lambda = c (P_1 + P_2), c = 2 v^2 d^2F(v,v)/dv^2 by
/// Richardson-extrapolated finite differences along the constrained line.
/// Stores the gap in cp.at_eigen_gap when mu is not overridden.
AtReport at_stability(CriticalPoint& cp, const DensityProfile& profile,
                      std::optional<double> mu = std::nullopt);

}  // namespace l1lab
