#include "newton.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "l1lab/errors.hpp"

namespace l1lab::detail {

namespace {

std::optional<Eigen::VectorXd> try_eval(const ResidualFn& f, const Eigen::VectorXd& x) {
  try {
    Eigen::VectorXd r = f(x);
    if (!r.allFinite()) return std::nullopt;
    return r;
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

NewtonResult damped_newton(const ResidualFn& f, Eigen::VectorXd x0,
                           const NewtonOptions& opt) {
  NewtonResult out;
  out.x = std::move(x0);
  auto first = try_eval(f, out.x);
  if (!first) throw NonConvergence("Newton start point is outside the residual domain");
  Eigen::VectorXd r = *first;
  out.residual = r.lpNorm<Eigen::Infinity>();

  const Eigen::Index n = out.x.size();
  Eigen::MatrixXd jac(r.size(), n);
  while (out.residual > opt.tolerance && out.iterations < opt.max_iterations) {
    ++out.iterations;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double h = opt.fd_step * std::max(1.0, std::abs(out.x[j]));
      Eigen::VectorXd xp = out.x;
      xp[j] += h;
      auto rp = try_eval(f, xp);
      if (!rp) {
        // Step backwards when the forward point leaves the domain.
        xp[j] = out.x[j] - h;
        rp = try_eval(f, xp);
        if (!rp) throw NonConvergence("Jacobian column " + std::to_string(j) + " undefined");
        jac.col(j) = (r - *rp) / h;
      } else {
        jac.col(j) = (*rp - r) / h;
      }
    }
    const Eigen::VectorXd step = jac.colPivHouseholderQr().solve(-r);
    if (!step.allFinite()) break;

    double scale = 1.0;
    bool accepted = false;
    for (int k = 0; k <= opt.max_halvings; ++k, scale *= 0.5) {
      const Eigen::VectorXd trial = out.x + scale * step;
      auto rt = try_eval(f, trial);
      if (!rt) continue;
      const double norm = rt->lpNorm<Eigen::Infinity>();
      if (norm < out.residual) {
        out.x = trial;
        r = *rt;
        out.residual = norm;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  out.converged = out.residual <= opt.tolerance;
  return out;
}

}  // namespace l1lab::detail
