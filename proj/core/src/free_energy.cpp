#include "l1lab/free_energy.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "l1lab/errors.hpp"

namespace l1lab {

namespace {

constexpr double kT2EqualityTol = 1e-12;

struct Branch {
  double r;
  double one_minus_r;
};

// Roots of R (1 - R) = x, written without cancellation.
Branch lower_root(double x) {
  const double d = std::sqrt(std::max(0.0, 1.0 - 4.0 * x));
  const double small = 2.0 * x / (1.0 + d);
  return {small, 1.0 - small};
}

Branch upper_root(double x) {
  const double d = std::sqrt(std::max(0.0, 1.0 - 4.0 * x));
  const double small = 2.0 * x / (1.0 + d);
  return {1.0 - small, small};
}

double branch_sum(const Eigen::VectorXd& v, double s, Eigen::Index upper) {
  double sum = 0.0;
  for (Eigen::Index t = 0; t < v.size(); ++t) {
    sum += (t == upper ? upper_root(v[t] / s) : lower_root(v[t] / s)).r;
  }
  return sum;
}

// Bisection on a bracket [lo, hi] where sign(f(lo)) != sign(f(hi)).
template <class F>
double bisect(F&& f, double lo, double hi) {
  const bool increasing = f(hi) > f(lo);
  for (int it = 0; it < 2000; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double value = f(mid);
    if ((value > 0.0) == increasing) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return lo + 0.5 * (hi - lo);
}

LambdaSolution assemble(const Eigen::VectorXd& v, const Eigen::VectorXd& r_raw,
                        double s) {
  const Eigen::Index T = v.size();
  LambdaSolution out;
  out.lambda.resize(T);
  for (Eigen::Index t = 0; t < T; ++t) out.lambda[t] = 1.0 / (s * r_raw[t]);
  const Eigen::VectorXd inv = out.lambda.cwiseInverse();
  out.inverse_sum = inv.sum();
  out.r = inv / out.inverse_sum;

  double value = -0.5 * std::log(out.inverse_sum);
  for (Eigen::Index t = 0; t < T; ++t) {
    value += -0.5 * std::log(out.lambda[t]) + 0.5 * out.lambda[t] * v[t] -
             0.5 * std::log(v[t]);
  }
  out.f_value = value - 0.5 * static_cast<double>(T);
  return out;
}

}  // namespace

NormVector::NormVector(Eigen::VectorXd values) : values_(std::move(values)) {
  if (values_.size() < 2) {
    throw DomainError("norm vector needs at least two blocks");
  }
  for (Eigen::Index t = 0; t < values_.size(); ++t) {
    if (!(values_[t] > 0.0) || !std::isfinite(values_[t])) {
      throw DomainError("norm densities must be positive and finite (block " +
                        std::to_string(t) + ")");
    }
  }
}

NormVector::NormVector(std::initializer_list<double> values)
    : NormVector(Eigen::Map<const Eigen::VectorXd>(
          values.begin(), static_cast<Eigen::Index>(values.size()))) {}

bool is_feasible(const NormVector& v) {
  const auto& x = v.values();
  if (x.size() == 2) {
    return std::abs(x[0] - x[1]) <= kT2EqualityTol * x.maxCoeff();
  }
  Eigen::Index arg = 0;
  const double largest = x.maxCoeff(&arg);
  return largest < x.sum() - largest;
}

LambdaSolution solve_lambda(const NormVector& norms) {
  const auto& v = norms.values();
  const Eigen::Index T = v.size();

  if (!is_feasible(norms)) {
    throw InfeasibleNorms(T == 2 ? "T = 2 requires v_1 == v_2"
                                 : "loop closure needs every v_t < sum of the others");
  }

  if (T == 2) {
    const double mean = 0.5 * (v[0] + v[1]);
    Eigen::VectorXd r = Eigen::VectorXd::Constant(2, 0.5);
    // S = 4 v gives Lambda = 1/(2v).
    return assemble(Eigen::VectorXd::Constant(2, mean), r, 4.0 * mean);
  }

  Eigen::Index argmax = 0;
  const double vmax = v.maxCoeff(&argmax);
  const double s_min = 4.0 * vmax;

  // All blocks on the lower branch when sum_t R_t(S) reaches 1 by S = 4 vmax.
  Eigen::Index upper = -1;
  double s_root = 0.0;
  if (branch_sum(v, s_min, -1) >= 1.0) {
    // R_t <= 2 v_t / S on the lower branch, so S = 2 sum v brackets the root.
    const double s_max = std::max(s_min, 2.0 * v.sum());
    s_root = bisect([&](double s) { return branch_sum(v, s, -1) - 1.0; }, s_min, s_max);
  } else {
    upper = argmax;
    auto f = [&](double s) { return branch_sum(v, s, upper) - 1.0; };
    double s_max = 2.0 * s_min;
    int doublings = 0;
    while (!(f(s_max) > 0.0)) {
      if (++doublings > 2000 || !std::isfinite(s_max)) {
        throw InfeasibleNorms("norms lie on the loop-closure boundary to working precision");
      }
      s_max *= 2.0;
    }
    s_root = bisect(f, s_min, s_max);
  }

  Eigen::VectorXd r(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    r[t] = (t == upper ? upper_root(v[t] / s_root) : lower_root(v[t] / s_root)).r;
  }
  LambdaSolution out = assemble(v, r, s_root);
  for (Eigen::Index t = 0; t < T; ++t) {
    if (!(out.r[t] > 0.0 && out.r[t] < 1.0)) {
      throw InfeasibleNorms("R_t left (0,1) at block " + std::to_string(t));
    }
  }
  return out;
}

Eigen::VectorXd grad_F(const NormVector& v) {
  const LambdaSolution sol = solve_lambda(v);
  return 0.5 * (sol.lambda - v.values().cwiseInverse());
}

Eigen::MatrixXd identity_plus_m_inverse(const Eigen::VectorXd& r) {
  const Eigen::Index T = r.size();
  Eigen::VectorXd w(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    const double gap = 1.0 - 2.0 * r[t];
    if (!(gap > 0.0) || !(r[t] > 0.0)) {
      throw DegenerateHessian("R_" + std::to_string(t) + " = " + std::to_string(r[t]) +
                              " is outside (0, 1/2)");
    }
    w[t] = r[t] / std::sqrt(gap);
  }
  const double denom = 1.0 + w.squaredNorm();
  Eigen::MatrixXd inv = -(w * w.transpose()) / denom;
  inv.diagonal().array() += 1.0;
  return inv;
}

namespace {

Eigen::MatrixXd loop_hessian(const NormVector& norms, bool lower_branch_only) {
  const auto& v = norms.values();
  const Eigen::Index T = v.size();
  if (T < 3) {
    throw DegenerateHessian("T = 2 forces R_t = 1/2; use the constrained curvature");
  }
  const LambdaSolution sol = solve_lambda(norms);

  Eigen::VectorXd w2(T);
  Eigen::VectorXd u(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    const double gap = 1.0 - 2.0 * sol.r[t];
    if (lower_branch_only ? !(gap > 0.0) : !(std::abs(gap) > 1e-14)) {
      throw DegenerateHessian("R_" + std::to_string(t) + " = " + std::to_string(sol.r[t]) +
                              (lower_branch_only ? " >= 1/2" : " == 1/2"));
    }
    w2[t] = sol.r[t] * sol.r[t] / gap;
    u[t] = sol.lambda[t] * sol.r[t] / gap;
  }
  const double denom = 1.0 + w2.sum();
  if (!(std::abs(denom) > 1e-14 * (1.0 + w2.cwiseAbs().sum()))) {
    throw DegenerateHessian("rank-one update is singular");
  }

  Eigen::MatrixXd h(T, T);
  for (Eigen::Index t = 0; t < T; ++t) {
    h(t, t) = -w2[t] / (v[t] * v[t]) + u[t] * u[t] / denom;
    for (Eigen::Index s = t + 1; s < T; ++s) {
      h(t, s) = u[t] * u[s] / denom;
      h(s, t) = h(t, s);
    }
  }
  return h;
}

}  // namespace

Eigen::MatrixXd hess_F(const NormVector& norms) { return loop_hessian(norms, true); }

Eigen::MatrixXd hess_F_any_branch(const NormVector& norms) {
  return loop_hessian(norms, false);
}

}  // namespace l1lab
