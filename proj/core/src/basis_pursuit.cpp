#include "l1lab/basis_pursuit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "l1lab/errors.hpp"

namespace l1lab {

namespace {

// Largest a > 0 with v + a dv >= 0 (infinite when dv >= 0).
double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double a = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
  }
  return a;
}

std::optional<Eigen::LLT<Eigen::MatrixXd>> factor(Eigen::MatrixXd m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) return llt;
  const double shift = 1e-14 * std::max(1.0, m.diagonal().cwiseAbs().maxCoeff());
  m.diagonal().array() += shift;
  llt.compute(m);
  if (llt.info() == Eigen::Success) return llt;
  return std::nullopt;
}

// Sign-split standard form: z = (p, q) >= 0, A = [D, -D], c = 1.
class SplitLp {
 public:
  explicit SplitLp(const Eigen::MatrixXd& d) : d_(d), n_(d.cols()) {}

  Eigen::VectorXd apply(const Eigen::VectorXd& z) const {
    return d_ * (z.head(n_) - z.tail(n_));
  }
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& lambda) const {
    const Eigen::VectorXd half = d_.transpose() * lambda;
    Eigen::VectorXd out(2 * n_);
    out << half, -half;
    return out;
  }
  // A diag(w) A^T
  Eigen::MatrixXd normal_matrix(const Eigen::VectorXd& w) const {
    const Eigen::VectorXd folded = w.head(n_) + w.tail(n_);
    return d_ * folded.asDiagonal() * d_.transpose();
  }

 private:
  const Eigen::MatrixXd& d_;
  Eigen::Index n_;
};

}  // namespace

std::string to_string(BpStatus status) {
  switch (status) {
    case BpStatus::optimal:
      return "optimal";
    case BpStatus::max_iter:
      return "max_iter";
    case BpStatus::numerical_failure:
      return "numerical_failure";
  }
  return "unknown";
}

BpSolution solve_bp(const Eigen::MatrixXd& D, const Eigen::VectorXd& y, const BpOptions& opt) {
  if (D.rows() != y.size()) throw DomainError("solve_bp: D and y disagree on M");
  const Eigen::Index N = D.cols();
  BpSolution out;
  out.xhat = Eigen::VectorXd::Zero(N);

  if (y.lpNorm<Eigen::Infinity>() == 0.0) {
    out.status = BpStatus::optimal;
    return out;
  }

  const SplitLp lp(D);
  const Eigen::Index n2 = 2 * N;

  // Optimality is certified on the original problem: a primal point with
  // D x = y, lambda with |D^T lambda|_inf <= 1, and the gap |x|_1 - y^T lambda.
  struct Certificate {
    Eigen::VectorXd x;
    double feasibility = 0.0;
    double dual_infeasibility = 0.0;
    double gap = 0.0;
    bool ok(double tol) const {
      return feasibility <= tol && dual_infeasibility <= tol &&
             std::abs(gap) <= tol * (1.0 + x.lpNorm<1>());
    }
    double merit() const {
      return std::max({feasibility, dual_infeasibility, std::abs(gap) / (1.0 + x.lpNorm<1>())});
    }
  };
  auto certify = [&](Eigen::VectorXd x, const Eigen::VectorXd& lambda) {
    Certificate c;
    c.feasibility = (D * x - y).lpNorm<Eigen::Infinity>();
    c.dual_infeasibility =
        std::max(0.0, (D.transpose() * lambda).lpNorm<Eigen::Infinity>() - 1.0);
    c.gap = x.lpNorm<1>() - y.dot(lambda);
    c.x = std::move(x);
    return c;
  };
  // Near the optimum the normal matrix is too ill-conditioned for the last
  // digits, so the iterate is also tried as a support: coordinates where p or
  // q dominates its slack are re-solved exactly by least squares.
  auto polish = [&](const Eigen::VectorXd& z, const Eigen::VectorXd& sl,
                    const Eigen::VectorXd& lambda) -> std::optional<Certificate> {
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < N; ++i) {
      if (z[i] > sl[i] || z[N + i] > sl[N + i]) support.push_back(i);
    }
    if (support.empty() || static_cast<Eigen::Index>(support.size()) > D.rows()) {
      return std::nullopt;
    }
    Eigen::MatrixXd sub(D.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t k = 0; k < support.size(); ++k) sub.col(k) = D.col(support[k]);
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
    if (qr.rank() < sub.cols()) return std::nullopt;
    const Eigen::VectorXd xs = qr.solve(y);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(N);
    for (std::size_t k = 0; k < support.size(); ++k) x[support[k]] = xs[k];
    return certify(std::move(x), lambda);
  };
  auto finish = [&](const Certificate& c, BpStatus status) {
    out.xhat = c.x;
    out.l1_value = c.x.lpNorm<1>();
    out.feasibility_gap = c.feasibility;
    out.duality_gap = c.gap;
    out.status = status;
    return out;
  };

  // Mehrotra's starting point. A A^T = 2 D D^T and A c = 0, so the
  // least-squares dual is zero and s starts at c.
  const auto gram = factor(lp.normal_matrix(Eigen::VectorXd::Ones(n2)));
  if (!gram) {
    return finish(certify(Eigen::VectorXd::Zero(N), Eigen::VectorXd::Zero(D.rows())),
                  BpStatus::numerical_failure);
  }
  Eigen::VectorXd z = lp.apply_transpose(gram->solve(y));
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(D.rows());
  Eigen::VectorXd s = Eigen::VectorXd::Ones(n2);
  z.array() += std::max(-1.5 * z.minCoeff(), 0.0);
  s.array() += std::max(-1.5 * s.minCoeff(), 0.0);
  {
    const double xs = z.dot(s);
    const double dz = 0.5 * xs / s.sum();
    const double ds = 0.5 * xs / z.sum();
    z.array() += dz;
    s.array() += ds;
  }

  const Eigen::VectorXd c = Eigen::VectorXd::Ones(n2);
  Certificate best = certify(z.head(N) - z.tail(N), lambda);
  int since_best = 0;
  for (int it = 0; it < opt.max_iterations; ++it) {
    out.iterations = it;
    Certificate cert = certify(z.head(N) - z.tail(N), lambda);
    if (!cert.ok(opt.tolerance) && cert.merit() < 1e-6) {
      if (auto polished = polish(z, s, lambda); polished && polished->merit() < cert.merit()) {
        cert = std::move(*polished);
      }
    }
    if (cert.ok(opt.tolerance)) return finish(cert, BpStatus::optimal);
    if (cert.merit() < best.merit()) {
      best = std::move(cert);
      since_best = 0;
    } else if (++since_best > 10) {
      // Iterates stopped improving; more steps only amplify round-off.
      return finish(best, BpStatus::numerical_failure);
    }

    const Eigen::VectorXd rp = y - lp.apply(z);
    const Eigen::VectorXd rd = c - lp.apply_transpose(lambda) - s;
    const Eigen::VectorXd scale = z.cwiseQuotient(s);
    const auto llt = factor(lp.normal_matrix(scale));
    if (!llt) return finish(best, BpStatus::numerical_failure);

    // Solves A dz = rp, A^T dl + ds = rd, S dz + Z ds = rxs.
    struct Direction {
      Eigen::VectorXd dz, dl, ds;
    };
    auto direction = [&](const Eigen::VectorXd& rxs) {
      Direction d;
      const Eigen::VectorXd rhs =
          rp - lp.apply(rxs.cwiseQuotient(s)) + lp.apply(scale.cwiseProduct(rd));
      d.dl = llt->solve(rhs);
      d.ds = rd - lp.apply_transpose(d.dl);
      d.dz = (rxs - z.cwiseProduct(d.ds)).cwiseQuotient(s);
      return d;
    };

    const double mu = z.dot(s) / static_cast<double>(n2);
    const Direction aff = direction(-z.cwiseProduct(s));
    const double ap_aff = std::min(1.0, max_step(z, aff.dz));
    const double ad_aff = std::min(1.0, max_step(s, aff.ds));
    const double mu_aff =
        (z + ap_aff * aff.dz).dot(s + ad_aff * aff.ds) / static_cast<double>(n2);
    const double sigma = std::pow(mu_aff / mu, 3);

    Eigen::VectorXd rxs = -z.cwiseProduct(s) - aff.dz.cwiseProduct(aff.ds);
    rxs.array() += sigma * mu;
    const Direction step = direction(rxs);
    if (!step.dz.allFinite() || !step.dl.allFinite() || !step.ds.allFinite()) {
      return finish(best, BpStatus::numerical_failure);
    }
    const double ap = std::min(1.0, opt.step_fraction * max_step(z, step.dz));
    const double ad = std::min(1.0, opt.step_fraction * max_step(s, step.ds));
    z += ap * step.dz;
    lambda += ad * step.dl;
    s += ad * step.ds;
  }
  Certificate last = certify(z.head(N) - z.tail(N), lambda);
  out.iterations = opt.max_iterations;
  if (last.ok(opt.tolerance)) return finish(last, BpStatus::optimal);
  return finish(last.merit() < best.merit() ? last : best, BpStatus::max_iter);
}

bool recovery_success(const Eigen::VectorXd& x0, const Eigen::VectorXd& xhat) {
  if (x0.size() != xhat.size()) throw DomainError("recovery_success: length mismatch");
  return (x0 - xhat).lpNorm<1>() < 1e-6;
}

}  // namespace l1lab
