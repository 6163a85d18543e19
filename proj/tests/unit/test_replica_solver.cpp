#include <doctest.h>

#include <cmath>

#include "l1lab/density_profile.hpp"
#include "l1lab/errors.hpp"
#include "l1lab/replica_solver.hpp"
#include "oracles.hpp"

using namespace l1lab;

TEST_SUITE("replica_solver") {

TEST_CASE("rs_fixed_point below and above threshold") {
  const DensityProfile u3 = DensityProfile::uniform(3);
  const SaddleState low = rs_fixed_point(u3, 0.02);
  CHECK(low.mse.maxCoeff() < 1e-6);
  CHECK(low.chi.maxCoeff() < 1e-6);
  CHECK((low.Qhat.array() == low.mhat.array()).all());

  const SaddleState high = rs_fixed_point(u3, 0.2);
  CHECK(high.mse.minCoeff() > 1e-3);
  CHECK((high.Qhat.array() == high.mhat.array()).all());
  for (Eigen::Index t = 0; t < 3; ++t) {
    CHECK(high.mse[t] == doctest::Approx(high.Q[t] - 2.0 * high.m[t] + 0.2).epsilon(1e-8));
  }

  const SaddleState zero = rs_fixed_point(u3, 0.0);
  CHECK(zero.Q.isZero());
  CHECK(zero.m.isZero());
  CHECK(zero.chi.isZero());
}

TEST_CASE("rs_fixed_point with T = 2") {
  const SaddleState s = rs_fixed_point(DensityProfile::localized(2), 0.25);
  REQUIRE(s.eta.has_value());
  CHECK(std::abs(s.chi[0] - s.chi[1]) <= 1e-8 * std::max(1.0, s.chi[0]));
  CHECK(s.mse.maxCoeff() > 1e-3);
  const SaddleState ok = rs_fixed_point(DensityProfile::localized(2), 0.1);
  CHECK(ok.mse.maxCoeff() < 1e-6);
}

TEST_CASE("the RS phase boundary brackets the critical point") {
  // Independent route: iterate the full saddle-point equations just below and
  // just above the critical density.
  for (const DensityProfile& p : {DensityProfile::uniform(3), DensityProfile::localized(3),
                                  DensityProfile::localized(2)}) {
    const CriticalPoint cp = critical_point(p);
    CAPTURE(p.name());
    CHECK(rs_fixed_point(p, 0.98 * cp.mu_star).mse.maxCoeff() < 1e-6);
    CHECK(rs_fixed_point(p, 1.02 * cp.mu_star).mse.maxCoeff() > 1e-5);
  }
}

TEST_CASE("critical_point_uniform against the state-evolution threshold") {
  for (double alpha : {0.5, 1.0 / 3.0, 0.25, 0.2, 1.0 / 6.0, 1.0 / 7.0, 0.125, 0.05, 0.9}) {
    CAPTURE(alpha);
    CHECK(critical_point_uniform(alpha).rho_c ==
          doctest::Approx(oracle::state_evolution_threshold(alpha)).epsilon(1e-9));
  }
  CHECK(critical_point_uniform(1.0).rho_c == 1.0);
  CHECK(critical_point_uniform(0.999).rho_c > 0.95);
  CHECK_THROWS_AS(critical_point_uniform(0.0), DomainError);
  CHECK_THROWS_AS(critical_point_uniform(1.5), DomainError);

  double prev = 0.0;
  for (double alpha = 0.05; alpha < 0.951; alpha += 0.05) {
    const double r = critical_point_uniform(alpha).rho_c;
    CHECK(r > prev);
    prev = r;
  }
}

TEST_CASE("table values that the equations reproduce") {
  const struct {
    int T;
    bool localized;
    double value;
  } table[] = {{2, false, 0.1928}, {3, false, 0.1021}, {4, false, 0.0668}, {5, false, 0.0487},
               {6, false, 0.0378}, {2, true, 0.2267},  {4, true, 0.0780},  {5, true, 0.0566},
               {6, true, 0.0438},  {7, true, 0.0354}};
  for (const auto& row : table) {
    const DensityProfile p =
        row.localized ? DensityProfile::localized(row.T) : DensityProfile::uniform(row.T);
    CAPTURE(row.T);
    CAPTURE(row.localized);
    CHECK(std::abs(critical_point(p).rho_c - row.value) <= 5e-5);
  }
}

TEST_CASE("uniform profile reduces to the rotationally invariant pair") {
  for (int T = 3; T <= 8; ++T) {
    const CriticalPoint g = critical_point_general(DensityProfile::uniform(T));
    const CriticalPoint u = critical_point_uniform(1.0 / T);
    CAPTURE(T);
    CHECK(std::abs(g.rho_c - u.rho_c) <= 1e-8);
    CHECK(g.r.minCoeff() == doctest::Approx(1.0 / T).epsilon(1e-9));
    CHECK(g.r.maxCoeff() == doctest::Approx(1.0 / T).epsilon(1e-9));
    CHECK(g.chihat.maxCoeff() - g.chihat.minCoeff() <= 1e-8 * g.chihat.maxCoeff());
  }
  const CriticalPoint t2 = critical_point_T2(DensityProfile::uniform(2));
  CHECK(std::abs(t2.rho_c - critical_point_uniform(0.5).rho_c) <= 1e-8);
  REQUIRE(t2.eta.has_value());
  CHECK(std::abs(*t2.eta) <= 1e-9);
}

TEST_CASE("T = 2 block relabelling") {
  const auto swapped = DensityProfile::custom(
      2,
      [](double mu) {
        Eigen::VectorXd r(2);
        r << 0.0, 2.0 * mu;
        return r;
      },
      "localized_second", 0.5);
  const CriticalPoint a = critical_point_T2(DensityProfile::localized(2));
  const CriticalPoint b = critical_point_T2(swapped);
  CHECK(a.rho_c == doctest::Approx(b.rho_c).epsilon(1e-10));
  REQUIRE(a.eta.has_value());
  REQUIRE(b.eta.has_value());
  CHECK(*a.eta == doctest::Approx(-*b.eta).epsilon(1e-8));
}

TEST_CASE("orderings and normalisation") {
  double prev_u = 1.0, prev_l = 1.0;
  for (int T = 2; T <= 8; ++T) {
    const CriticalPoint u = critical_point(DensityProfile::uniform(T));
    const CriticalPoint l = critical_point(DensityProfile::localized(T));
    CAPTURE(T);
    CHECK(u.rho_c < prev_u);
    CHECK(l.rho_c < prev_l);
    CHECK(l.rho_c > u.rho_c);
    CHECK(std::abs(u.r.sum() - 1.0) <= 1e-10);
    CHECK(std::abs(l.r.sum() - 1.0) <= 1e-10);
    prev_u = u.rho_c;
    prev_l = l.rho_c;
  }
}

TEST_CASE("AT stability at and away from criticality") {
  for (const DensityProfile& p :
       {DensityProfile::localized(3), DensityProfile::uniform(5), DensityProfile::localized(6)}) {
    CriticalPoint cp = critical_point(p);
    const AtReport at = at_stability(cp, p);
    CAPTURE(p.name());
    CAPTURE(p.blocks());
    CHECK(at.eigen_gap < 1e-8);
    CHECK(std::abs(at.det) < 1e-8);
    REQUIRE(cp.at_eigen_gap.has_value());
    CHECK(*cp.at_eigen_gap == at.eigen_gap);

    const AtReport off = at_stability(cp, p, 0.9 * cp.mu_star);
    CHECK(std::abs(off.det) > 1e-4);
  }
  CriticalPoint t2 = critical_point(DensityProfile::localized(2));
  CHECK(at_stability(t2, DensityProfile::localized(2)).eigen_gap < 1e-6);
}

TEST_CASE("critical solvers reject mismatched input") {
  CHECK_THROWS_AS(critical_point_general(DensityProfile::uniform(2)), DomainError);
  CHECK_THROWS_AS(critical_point_T2(DensityProfile::uniform(3)), DomainError);
}

}  // TEST_SUITE
