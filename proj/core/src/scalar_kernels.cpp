#include "l1lab/scalar_kernels.hpp"

#include <cmath>
#include <string>

#include "l1lab/errors.hpp"

namespace l1lab {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

void require_positive_qhat(double qhat) {
  if (!(qhat > 0.0)) {
    throw DomainError("soft threshold needs qhat > 0, got " + std::to_string(qhat));
  }
}

// P(|h| > 1) for h ~ N(0, var).
double outside_unit(double var) {
  if (var <= 0.0) return 0.0;
  return 2.0 * q_tail(1.0 / std::sqrt(var));
}

// E[Z^2 ; |Z| <= tau] for Z ~ N(0,1). The closed form erf - 2 tau phi
// cancels badly for small tau, where the odd power series is used instead.
double truncated_second_moment(double tau) {
  if (tau < 1.0) {
    const double t2 = tau * tau;
    double term = tau * t2;  // (-1/2)^k tau^{2k+3} / k!
    double sum = 0.0;
    for (int k = 0; k < 40; ++k) {
      const double piece = term / (2.0 * k + 3.0);
      sum += piece;
      if (std::abs(piece) < 1e-18 * std::abs(sum)) break;
      term *= -0.5 * t2 / (k + 1.0);
    }
    return 2.0 * kInvSqrt2Pi * sum;
  }
  return std::erf(tau * kInvSqrt2) - 2.0 * tau * gauss_density(tau);
}

// E[(X(h) - x0)^2] for x0 ~ N(0,1), h = sqrt(chihat) z + mhat x0.
// Conditioning on h: x0 | h ~ N(c h, chihat / s) with s = chihat + mhat^2 and
// c = mhat / s, so the error splits into chihat/s plus E_h[(X(h) - c h)^2].
double gaussian_block_mse(double chihat, double mhat, double qhat) {
  const double s = chihat + mhat * mhat;
  if (s <= 0.0) return 1.0;
  const double sigma = std::sqrt(s);
  const double tau = 1.0 / sigma;
  const double c = mhat / s;
  const double b = 1.0 / qhat;
  // a = 1/qhat - mhat/s, written to stay accurate when qhat == mhat >> 1.
  const double a = (chihat + mhat * (mhat - qhat)) / (qhat * s);
  const double q = q_tail(tau);
  const double pdf = gauss_density(tau);
  // E[(a h - b)^2 ; h > 1], doubled for the mirror branch h < -1.
  const double branch =
      a * a * s * (tau * pdf + q) - 2.0 * a * b * sigma * pdf + b * b * q;
  const double dead_zone = c * c * s * truncated_second_moment(tau);
  return chihat / s + 2.0 * branch + dead_zone;
}

}  // namespace

double q_tail(double x) {
  // x / sqrt(2) is rounded before erfc sees it; for large x that rounding
  // alone costs x^2 ulps, so feed the residual back in to first order.
  constexpr double kInvSqrt2Lo = -4.8336466567264565e-17;
  const double u = x * kInvSqrt2;
  const double du = std::fma(x, kInvSqrt2, -u) + x * kInvSqrt2Lo;
  return 0.5 * (std::erfc(u) - du * M_2_SQRTPI * std::exp(-u * u));
}

double gauss_density(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double g_func(double x) {
  if (!(x >= 0.0)) {
    throw DomainError("g_func needs x >= 0, got " + std::to_string(x));
  }
  if (x == 0.0) return 0.0;
  const double inv_root = 1.0 / std::sqrt(x);
  if (x < 0.25) {
    // The closed form cancels to O(x^2) relative here. Use
    // G = x phi(t) int_0^inf u^2 exp(-t u - u^2/2) du, t = x^{-1/2}, with the
    // moment ratios r_n = I_n / I_{n-1} = n / (t + r_{n+1}) run backwards.
    const double t = inv_root;
    double r = 0.0;
    double r1 = 0.0, r2 = 0.0;
    for (int n = 400; n >= 1; --n) {
      r = n / (t + r);
      if (n == 2) r2 = r;
      if (n == 1) r1 = r;
    }
    return x * kInvSqrt2Pi * std::exp(-0.5 * t * t) * r1 * r2 / (t + r1);
  }
  return (x + 1.0) * q_tail(inv_root) -
         std::sqrt(x) * std::exp(-0.5 / x) * kInvSqrt2Pi;
}

double soft_threshold(double h, double qhat) {
  require_positive_qhat(qhat);
  if (h > 1.0) return (h - 1.0) / qhat;
  if (h < -1.0) return (h + 1.0) / qhat;
  return 0.0;
}

double phi_min(double h, double qhat) {
  require_positive_qhat(qhat);
  const double excess = std::abs(h) - 1.0;
  return excess > 0.0 ? -excess * excess / (2.0 * qhat) : 0.0;
}

BlockPrior::BlockPrior(double rho_, NonzeroLaw law_) : rho(rho_), law(law_) {
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw DomainError("block density must lie in [0,1], got " + std::to_string(rho));
  }
}

double prior_expectation(const BlockPrior& block, double chihat, double mhat,
                         double qhat, Moment which) {
  require_positive_qhat(qhat);
  if (!(chihat >= 0.0)) {
    throw DomainError("prior_expectation needs chihat >= 0, got " + std::to_string(chihat));
  }
  const double rho = block.rho;
  const double signal_var = chihat + mhat * mhat;
  switch (which) {
    case Moment::Q:
      return ((1.0 - rho) * 2.0 * g_func(chihat) + rho * 2.0 * g_func(signal_var)) /
             (qhat * qhat);
    case Moment::chi:
      return ((1.0 - rho) * outside_unit(chihat) + rho * outside_unit(signal_var)) / qhat;
    case Moment::m:
      // Stein's lemma: E[x0 f(h)] = mhat E[f'(h)] for Gaussian x0.
      return rho * mhat * outside_unit(signal_var) / qhat;
  }
  return 0.0;
}

double prior_mse(const BlockPrior& block, double chihat, double mhat,
                 double qhat) {
  require_positive_qhat(qhat);
  if (!(chihat >= 0.0)) {
    throw DomainError("prior_mse needs chihat >= 0, got " + std::to_string(chihat));
  }
  const double zero_part = 2.0 * g_func(chihat) / (qhat * qhat);
  if (block.rho == 0.0) return zero_part;
  return (1.0 - block.rho) * zero_part +
         block.rho * gaussian_block_mse(chihat, mhat, qhat);
}

double prior_active_fraction(const BlockPrior& block, double chihat,
                             double mhat) {
  return (1.0 - block.rho) * outside_unit(chihat) +
         block.rho * outside_unit(chihat + mhat * mhat);
}

}  // namespace l1lab
