#include "l1lab/density_profile.hpp"

#include <string>
#include <utility>

#include "l1lab/errors.hpp"

namespace l1lab {

DensityProfile::DensityProfile(ProfileKind kind, int T, Map map, std::string name,
                               double mu_max)
    : kind_(kind), blocks_(T), map_(std::move(map)), name_(std::move(name)), mu_max_(mu_max) {
  if (T < 1) throw InvalidProfile("profile needs T >= 1, got " + std::to_string(T));
  if (!map_) throw InvalidProfile("profile map is empty");
  if (!(mu_max_ > 0.0 && mu_max_ <= 1.0)) throw InvalidProfile("mu_max must lie in (0,1]");
}

DensityProfile DensityProfile::uniform(int T) {
  return DensityProfile(
      ProfileKind::uniform, T,
      [T](double mu) { return Eigen::VectorXd::Constant(T, mu).eval(); }, "uniform", 1.0);
}

DensityProfile DensityProfile::localized(int T) {
  return DensityProfile(
      ProfileKind::localized, T,
      [T](double mu) {
        Eigen::VectorXd rho = Eigen::VectorXd::Zero(T);
        rho[0] = T * mu;
        return rho;
      },
      "localized", 1.0 / T);
}

DensityProfile DensityProfile::custom(int T, Map rho_of_mu, std::string name, double mu_max) {
  return DensityProfile(ProfileKind::custom, T, std::move(rho_of_mu), std::move(name), mu_max);
}

Eigen::VectorXd DensityProfile::operator()(double mu) const {
  Eigen::VectorXd rho = map_(mu);
  if (rho.size() != blocks_) {
    throw InvalidProfile("profile '" + name_ + "' returned " + std::to_string(rho.size()) +
                         " densities for T = " + std::to_string(blocks_));
  }
  for (Eigen::Index t = 0; t < rho.size(); ++t) {
    if (!(rho[t] >= 0.0 && rho[t] <= 1.0)) {
      throw InvalidProfile("profile '" + name_ + "' gives rho_" + std::to_string(t + 1) +
                           " = " + std::to_string(rho[t]) + " at mu = " + std::to_string(mu));
    }
  }
  return rho;
}

double DensityProfile::mean_density(double mu) const { return (*this)(mu).mean(); }

Eigen::VectorXd DensityProfile::selection_weights() const {
  const Eigen::VectorXd rho = (*this)(0.5 * mu_max_);
  const double total = rho.sum();
  if (!(total > 0.0)) throw InvalidProfile("profile '" + name_ + "' has no nonzero block");
  return rho / total;
}

DensityProfile blend_from_uniform(const DensityProfile& target, double lambda) {
  const int T = target.blocks();
  const double mu_max = lambda == 0.0 ? 1.0 : target.mu_max();
  return DensityProfile::custom(
      T,
      [target, lambda, T](double mu) {
        Eigen::VectorXd rho = (1.0 - lambda) * Eigen::VectorXd::Constant(T, mu);
        if (lambda != 0.0) rho += lambda * target(mu);
        return rho;
      },
      target.name() + "@" + std::to_string(lambda), mu_max);
}

DensityProfile profile_by_name(const std::string& name, int T) {
  if (name == "uniform") return DensityProfile::uniform(T);
  if (name == "localized") return DensityProfile::localized(T);
  throw InvalidProfile("unknown profile '" + name + "' (expected uniform or localized)");
}

}  // namespace l1lab
