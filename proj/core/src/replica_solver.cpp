#include "l1lab/replica_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "l1lab/errors.hpp"
#include "l1lab/free_energy.hpp"
#include "l1lab/scalar_kernels.hpp"
#include "newton.hpp"

namespace l1lab {

namespace {

constexpr double kChihatFloor = 1e-300;
constexpr int kHomotopySteps = 10;
constexpr int kMaxSubdivisions = 8;

double g_term(double rho, double chihat) {
  return 2.0 * (1.0 - rho) * g_func(chihat) + rho * (chihat + 1.0);
}

// 2(1-rho) Q(chihat^{-1/2}) + rho: the fraction of active components.
double active(double rho, double chihat) {
  return 2.0 * (1.0 - rho) * q_tail(1.0 / std::sqrt(std::max(chihat, kChihatFloor))) + rho;
}

template <class F>
double bisect_root(F&& f, double lo, double hi) {
  const double flo = f(lo);
  for (int it = 0; it < 400; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if ((f(mid) > 0.0) == (flo > 0.0)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo + 0.5 * (hi - lo);
}

// ---------------------------------------------------------------------------
// Saddle-point iteration

struct Hats {
  Eigen::VectorXd qhat;
  Eigen::VectorXd chihat;
  std::optional<double> eta;
};

double updated_chi(double rho, double chihat, double qhat) {
  return prior_expectation(BlockPrior(rho), chihat, qhat, qhat, Moment::chi);
}

Hats conjugates_t2(const Eigen::VectorXd& rho, const Eigen::VectorXd& chi,
                   const Eigen::VectorXd& mse) {
  const double c = 0.5 * (chi[0] + chi[1]);
  Hats h;
  h.qhat = Eigen::VectorXd::Constant(2, 0.5 / c);
  const double base1 = std::max(mse[0], 0.0) / (2.0 * c * c);
  const double base2 = std::max(mse[1], 0.0) / (2.0 * c * c);
  auto chihat_at = [&](double eta) {
    Eigen::VectorXd out(2);
    out << std::max(base1 + eta, kChihatFloor), std::max(base2 - eta, kChihatFloor);
    return out;
  };
  auto diff = [&](double eta) {
    const Eigen::VectorXd ch = chihat_at(eta);
    return updated_chi(rho[0], ch[0], h.qhat[0]) - updated_chi(rho[1], ch[1], h.qhat[1]);
  };
  const double lo = -base1;
  const double hi = base2;
  const double dlo = diff(lo);
  const double dhi = diff(hi);
  double eta = 0.0;
  if (dlo >= 0.0) {
    eta = lo;
  } else if (dhi <= 0.0) {
    eta = hi;
  } else {
    eta = bisect_root(diff, lo, hi);
  }
  h.chihat = chihat_at(eta);
  h.eta = eta;
  return h;
}

Hats conjugates(const Eigen::VectorXd& rho, const Eigen::VectorXd& chi,
                const Eigen::VectorXd& mse) {
  if (chi.size() == 2) return conjugates_t2(rho, chi, mse);
  const NormVector v(chi);
  const LambdaSolution sol = solve_lambda(v);
  Hats h;
  h.qhat = sol.r.cwiseQuotient(chi);
  h.chihat = (hess_F_any_branch(v) * mse).cwiseMax(kChihatFloor);
  return h;
}

SaddleState zero_signal_state(int T) {
  SaddleState s;
  const double inf = std::numeric_limits<double>::infinity();
  s.Q = s.chi = s.m = s.chihat = s.mse = Eigen::VectorXd::Zero(T);
  s.Qhat = s.mhat = Eigen::VectorXd::Constant(T, inf);
  if (T == 2) s.eta = 0.0;
  return s;
}

// ---------------------------------------------------------------------------
// Critical-point residuals

Eigen::VectorXd general_residual(const DensityProfile& profile, const Eigen::VectorXd& x) {
  const Eigen::Index T = profile.blocks();
  const double mu = x[0];
  const Eigen::VectorXd chihat = x.segment(1, T);
  const Eigen::VectorXd r = x.segment(T + 1, T);
  if (!(chihat.minCoeff() > 0.0)) throw DomainError("chihat left (0, inf)");
  const Eigen::VectorXd rho = profile(mu);

  const Eigen::MatrixXd inv = identity_plus_m_inverse(r);
  Eigen::VectorXd s(T), g(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    s[t] = 1.0 / (r[t] * std::sqrt(1.0 - 2.0 * r[t]));
    g[t] = g_term(rho[t], chihat[t]);
  }
  Eigen::VectorXd weighted(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    weighted[t] = s[t] * (1.0 - r[t]) * (1.0 - r[t]) * g[t];
  }
  const Eigen::VectorXd coupling = s.cwiseProduct(inv * weighted);

  Eigen::VectorXd out(2 * T + 1);
  out[0] = r.sum() - 1.0;
  for (Eigen::Index t = 0; t < T; ++t) {
    out[1 + t] = chihat[t] - (g[t] / (r[t] * r[t]) - coupling[t]);
    out[1 + T + t] = r[t] - active(rho[t], chihat[t]);
  }
  return out;
}

Eigen::VectorXd t2_residual(const DensityProfile& profile, const Eigen::VectorXd& x) {
  const double mu = x[0];
  const double c1 = x[1];
  const double c2 = x[2];
  const double eta = x[3];
  if (!(c1 > 0.0 && c2 > 0.0)) throw DomainError("chihat left (0, inf)");
  const Eigen::VectorXd rho = profile(mu);
  Eigen::VectorXd out(4);
  out[0] = c1 - (2.0 * g_term(rho[0], c1) + eta);
  out[1] = c2 - (2.0 * g_term(rho[1], c2) - eta);
  out[2] = active(rho[0], c1) - 0.5;
  out[3] = active(rho[1], c2) - 0.5;
  return out;
}

using ProfileResidual = Eigen::VectorXd (*)(const DensityProfile&, const Eigen::VectorXd&);

// Follows the root from the uniform profile (lambda = 0) to the target
// (lambda = 1), subdividing a homotopy step whenever Newton fails on it.
detail::NewtonResult continue_from_uniform(const DensityProfile& target, ProfileResidual residual,
                                           Eigen::VectorXd x, CriticalPoint& cp) {
  int steps = 0;
  auto solve_at = [&](double lambda, const Eigen::VectorXd& start) {
    const DensityProfile p = blend_from_uniform(target, lambda);
    detail::NewtonResult res = detail::damped_newton(
        [&](const Eigen::VectorXd& y) { return residual(p, y); }, start);
    steps += res.iterations;
    return res;
  };

  detail::NewtonResult res;
  if (target.kind() == ProfileKind::uniform) {
    res = solve_at(0.0, x);
  } else {
    double lambda = 0.0;
    double step = 1.0 / kHomotopySteps;
    int subdivisions = 0;
    while (lambda < 1.0) {
      const double next = std::min(1.0, lambda + step);
      res = solve_at(next, x);
      if (res.converged) {
        x = res.x;
        lambda = next;
        continue;
      }
      if (++subdivisions > kMaxSubdivisions) break;
      step *= 0.5;
      cp.diagnostics.push_back("homotopy step halved to " + std::to_string(step) +
                               " at lambda = " + std::to_string(lambda));
    }
  }
  cp.newton_steps = steps;
  if (!res.converged) {
    throw NonConvergence("critical point of '" + target.name() + "' (T = " +
                         std::to_string(target.blocks()) + ") stalled at residual " +
                         std::to_string(res.residual));
  }
  return res;
}

}  // namespace

SaddleState rs_fixed_point(const DensityProfile& profile, double mu,
                           const std::optional<SaddleState>& init, const RsOptions& opt) {
  const int T = profile.blocks();
  if (T < 2) throw DomainError("rs_fixed_point needs T >= 2");
  const Eigen::VectorXd rho = profile(mu);
  if (rho.maxCoeff() == 0.0) return zero_signal_state(T);

  SaddleState s;
  if (init) {
    s.Q = init->Q;
    s.chi = init->chi;
    s.m = init->m;
  } else {
    s.Q = Eigen::VectorXd::Constant(T, 0.5);
    s.chi = Eigen::VectorXd::Ones(T);
    s.m = 0.5 * rho;
  }
  if (s.Q.size() != T || s.chi.size() != T || s.m.size() != T) {
    throw DomainError("initial state has the wrong number of blocks");
  }
  s.mse = s.Q - 2.0 * s.m + rho;

  const double d = opt.damping;
  Hats h;
  for (int k = 0; k < opt.max_iterations; ++k) {
    h = conjugates(rho, s.chi, s.mse);
    Eigen::VectorXd qn(T), cn(T), mn(T), en(T);
    for (int t = 0; t < T; ++t) {
      const BlockPrior block(rho[t]);
      qn[t] = prior_expectation(block, h.chihat[t], h.qhat[t], h.qhat[t], Moment::Q);
      cn[t] = prior_expectation(block, h.chihat[t], h.qhat[t], h.qhat[t], Moment::chi);
      mn[t] = prior_expectation(block, h.chihat[t], h.qhat[t], h.qhat[t], Moment::m);
      en[t] = prior_mse(block, h.chihat[t], h.qhat[t], h.qhat[t]);
    }
    s.last_update = std::max({(qn - s.Q).lpNorm<Eigen::Infinity>(),
                              (cn - s.chi).lpNorm<Eigen::Infinity>(),
                              (mn - s.m).lpNorm<Eigen::Infinity>()});
    s.Q = (1.0 - d) * s.Q + d * qn;
    s.chi = (1.0 - d) * s.chi + d * cn;
    s.m = (1.0 - d) * s.m + d * mn;
    s.mse = (1.0 - d) * s.mse + d * en;
    s.iterations = k + 1;
    if (s.last_update < opt.tolerance) {
      h = conjugates(rho, s.chi, s.mse);
      s.Qhat = h.qhat;
      s.mhat = h.qhat;
      s.chihat = h.chihat;
      s.eta = h.eta;
      return s;
    }
  }
  throw NonConvergence("saddle-point iteration at mu = " + std::to_string(mu) +
                       " stopped with update " + std::to_string(s.last_update));
}

CriticalPoint critical_point_uniform(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw DomainError("compression rate must lie in (0, 1], got " + std::to_string(alpha));
  }
  CriticalPoint cp;
  const double blocks = 1.0 / alpha;
  const long rounded = std::lround(blocks);
  cp.T = std::abs(blocks - static_cast<double>(rounded)) < 1e-9 ? static_cast<int>(rounded) : 0;
  const Eigen::Index width = std::max(cp.T, 1);
  cp.r = Eigen::VectorXd::Constant(width, alpha);

  if (alpha == 1.0) {
    cp.mu_star = cp.rho_c = 1.0;
    cp.chihat = Eigen::VectorXd::Constant(width, std::numeric_limits<double>::infinity());
    cp.diagnostics.push_back("alpha = 1: determined system, every density recovers");
    return cp;
  }

  auto rho_of = [alpha](double ch) {
    const double q2 = 2.0 * q_tail(1.0 / std::sqrt(ch));
    return (alpha - q2) / (1.0 - q2);
  };
  auto h = [&](double log_ch) {
    const double ch = std::exp(log_ch);
    return ch - g_term(rho_of(ch), ch) / alpha;
  };
  // rho_of falls from alpha (chihat -> 0) to 0 where 2 Q(chihat^{-1/2}) = alpha.
  const double log_max = bisect_root(
      [&](double lc) { return 2.0 * q_tail(std::exp(-0.5 * lc)) - alpha; }, std::log(1e-12),
      std::log(1e12));

  constexpr int kGrid = 4000;
  const double log_min = std::log(1e-10);
  std::vector<double> roots;
  double prev_x = log_min;
  double prev_f = h(prev_x);
  for (int i = 1; i <= kGrid; ++i) {
    const double x = log_min + (log_max - log_min) * i / kGrid;
    const double f = h(x);
    if ((f > 0.0) != (prev_f > 0.0)) roots.push_back(bisect_root(h, prev_x, x));
    prev_x = x;
    prev_f = f;
  }
  if (roots.empty()) {
    throw NonConvergence("no critical point for alpha = " + std::to_string(alpha));
  }
  for (std::size_t i = 1; i < roots.size(); ++i) {
    cp.diagnostics.push_back("additional root at chihat = " + std::to_string(std::exp(roots[i])));
  }
  const double ch = std::exp(roots.front());
  cp.mu_star = cp.rho_c = rho_of(ch);
  cp.chihat = Eigen::VectorXd::Constant(width, ch);
  cp.residual = std::abs(h(roots.front()));
  return cp;
}

CriticalPoint critical_point_general(const DensityProfile& profile) {
  const int T = profile.blocks();
  if (T < 3) throw DomainError("critical_point_general needs T >= 3");
  const CriticalPoint start = critical_point_uniform(1.0 / T);

  CriticalPoint cp;
  cp.T = T;
  Eigen::VectorXd x(2 * T + 1);
  x[0] = start.mu_star;
  x.segment(1, T) = start.chihat;
  x.segment(T + 1, T).setConstant(1.0 / T);

  const detail::NewtonResult res = continue_from_uniform(profile, general_residual, x, cp);
  cp.mu_star = res.x[0];
  cp.chihat = res.x.segment(1, T);
  cp.r = res.x.segment(T + 1, T);
  cp.rho_c = profile.mean_density(cp.mu_star);
  cp.residual = res.residual;
  return cp;
}

CriticalPoint critical_point_T2(const DensityProfile& profile) {
  if (profile.blocks() != 2) throw DomainError("critical_point_T2 needs T = 2");
  const CriticalPoint start = critical_point_uniform(0.5);

  CriticalPoint cp;
  cp.T = 2;
  Eigen::VectorXd x(4);
  x << start.mu_star, start.chihat[0], start.chihat[0], 0.0;

  const detail::NewtonResult res = continue_from_uniform(profile, t2_residual, x, cp);
  cp.mu_star = res.x[0];
  cp.chihat = res.x.segment(1, 2);
  cp.eta = res.x[3];
  cp.r = Eigen::VectorXd::Constant(2, 0.5);
  cp.rho_c = profile.mean_density(cp.mu_star);
  cp.residual = res.residual;
  return cp;
}

CriticalPoint critical_point(const DensityProfile& profile) {
  if (profile.blocks() < 2) throw DomainError("critical points need T >= 2");
  return profile.blocks() == 2 ? critical_point_T2(profile) : critical_point_general(profile);
}

AtReport at_stability(CriticalPoint& cp, const DensityProfile& profile,
                      std::optional<double> mu) {
  const int T = profile.blocks();
  if (cp.chihat.size() != T || cp.r.size() != T) {
    throw DomainError("critical point and profile disagree on T");
  }
  const Eigen::VectorXd rho = profile(mu.value_or(cp.mu_star));
  Eigen::VectorXd p(T);
  for (int t = 0; t < T; ++t) p[t] = active(rho[t], cp.chihat[t]);

  AtReport report;
  if (T == 2) {
    auto f = [](double v) { return solve_lambda(NormVector{v, v}).f_value; };
    constexpr double v0 = 1.0;
    constexpr double step = 1e-2;
    auto second = [&](double hh) { return (f(v0 + hh) - 2.0 * f(v0) + f(v0 - hh)) / (hh * hh); };
    const double curvature = (4.0 * second(0.5 * step) - second(step)) / 3.0;
    const double lambda = 2.0 * v0 * v0 * curvature * p.sum();
    report.det = 1.0 - lambda;
    report.eigen_gap = std::abs(lambda - 1.0);
    report.closest_eigenvalue = lambda;
  } else {
    const Eigen::VectorXd& r = cp.r;
    const Eigen::MatrixXd inv = identity_plus_m_inverse(r);
    Eigen::MatrixXd hh(T, T);
    for (int t = 0; t < T; ++t) {
      for (int s = 0; s < T; ++s) {
        const double coupling = inv(t, s) * (1.0 - r[s]) * (1.0 - r[s]) * p[s] /
                                (r[t] * r[s] * std::sqrt(1.0 - 2.0 * r[t]) *
                                 std::sqrt(1.0 - 2.0 * r[s]));
        hh(t, s) = (t == s ? p[t] / (r[t] * r[t]) : 0.0) - coupling;
      }
    }
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(T, T);
    report.det = (id - hh).determinant();
    const Eigen::VectorXd v1 = (Eigen::VectorXd::Ones(T) - r).cwiseInverse();
    report.eigen_gap = (hh * v1 - v1).norm() / v1.norm();

    const Eigen::VectorXcd eig = Eigen::EigenSolver<Eigen::MatrixXd>(hh, false).eigenvalues();
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < eig.size(); ++i) {
      if (std::abs(eig[i] - 1.0) < best) {
        best = std::abs(eig[i] - 1.0);
        report.closest_eigenvalue = eig[i].real();
      }
    }
  }
  if (!mu) cp.at_eigen_gap = report.eigen_gap;
  return report;
}

}  // namespace l1lab
