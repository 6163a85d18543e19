#pragma once

// Scalar special functions and Gaussian expectations used by the replica
// equations. Everything here is pure and reentrant.

namespace l1lab {

/// Upper Gaussian tail Q(x) = P(Z > x), Z ~ N(0,1).
double q_tail(double x);

/// Standard normal density.
double gauss_density(double x);

/// G(x) = (x+1) Q(x^{-1/2}) - sqrt(x) exp(-1/(2x)) / sqrt(2 pi), G(0) = 0.
///
/// Equals E[(|h|-1)_+^2] / 2 for h ~ N(0, x). Throws DomainError for x < 0.
double g_func(double x);

/// Soft threshold X(h; qhat): the minimiser of qhat x^2/2 - h x + |x|.
/// Returns 0 on the closed interval |h| <= 1. Throws DomainError if qhat <= 0.
double soft_threshold(double h, double qhat);

/// phi(h; qhat) = min_x { qhat x^2/2 - h x + |x| } = -(|h|-1)_+^2 / (2 qhat).
double phi_min(double h, double qhat);

/// Law of the nonzero entries of a block. Only the standard Gaussian ships.
enum class NonzeroLaw { standard_gaussian };

/// Bernoulli-Gaussian prior (1-rho) delta(x) + rho N(0,1) of one block.
struct BlockPrior {
  double rho = 0.0;
  NonzeroLaw law = NonzeroLaw::standard_gaussian;

  BlockPrior() = default;
  /// Throws DomainError unless rho is in [0,1].
  explicit BlockPrior(double rho_, NonzeroLaw law_ = NonzeroLaw::standard_gaussian);
};

/// Which right-hand side of the (Q, chi, m) saddle-point equations to return.
enum class Moment { Q, chi, m };

/// Average over z ~ N(0,1) and x0 ~ prior of, respectively,
///   Q:   X(h)^2
///   chi: dX/dh
///   m:   x0 X(h)
/// with h = sqrt(chihat) z + mhat x0 and X = soft_threshold(., qhat).
///
/// Closed form. Requires chihat >= 0 and qhat > 0 (DomainError otherwise).
double prior_expectation(const BlockPrior& block, double chihat, double mhat,
                         double qhat, Moment which);

/// E[(X(h) - x0)^2] = Q - 2m + rho evaluated without the cancellation the
/// three-term difference suffers once qhat is large.
double prior_mse(const BlockPrior& block, double chihat, double mhat,
                 double qhat);

/// P(|h| > 1) under the prior, i.e. qhat times the chi moment.
double prior_active_fraction(const BlockPrior& block, double chihat,
                             double mhat);

}  // namespace l1lab
