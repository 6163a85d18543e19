#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

namespace l1lab {

enum class ProfileKind { uniform, localized, custom };

/// Per-block nonzero densities rho_t(mu) parametrised by the mean density mu,
/// so that T^{-1} sum_t rho_t(mu) = mu for the built-in kinds.
class DensityProfile {
 public:
  using Map = std::function<Eigen::VectorXd(double)>;

  /// rho_t(mu) = mu for every block.
  static DensityProfile uniform(int T);
  /// rho_1(mu) = T mu, rho_t(mu) = 0 for t >= 2; valid for mu <= 1/T.
  static DensityProfile localized(int T);
  /// Arbitrary continuous, componentwise nondecreasing map.
  static DensityProfile custom(int T, Map rho_of_mu, std::string name = "custom",
                               double mu_max = 1.0);

  /// Throws InvalidProfile if some rho_t(mu) leaves [0,1].
  Eigen::VectorXd operator()(double mu) const;

  /// T^{-1} sum_t rho_t(mu).
  double mean_density(double mu) const;

  /// Relative weights rho_t / sum_s rho_s used to pick the block of the next
  /// nonzero in the insertion experiment. Evaluated at mu_max / 2.
  Eigen::VectorXd selection_weights() const;

  ProfileKind kind() const { return kind_; }
  int blocks() const { return blocks_; }
  double mu_max() const { return mu_max_; }
  const std::string& name() const { return name_; }

 private:
  DensityProfile(ProfileKind kind, int T, Map map, std::string name, double mu_max);

  ProfileKind kind_;
  int blocks_;
  Map map_;
  std::string name_;
  double mu_max_;
};

/// (1 - lambda) uniform(T) + lambda target, the path used to continue critical
/// points away from the symmetric solution.
DensityProfile blend_from_uniform(const DensityProfile& target, double lambda);

/// Parses "uniform" or "localized". Throws InvalidProfile otherwise.
DensityProfile profile_by_name(const std::string& name, int T);

}  // namespace l1lab
