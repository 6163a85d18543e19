#include <doctest.h>

#include <cmath>

#include "l1lab/dictionary.hpp"
#include "l1lab/errors.hpp"
#include "oracles.hpp"

using namespace l1lab;

TEST_SUITE("dictionary") {

TEST_CASE("haar_orthogonal is orthogonal and reproducible") {
  for (int M : {1, 2, 5, 17, 40}) {
    Rng a(99), b(99);
    const Eigen::MatrixXd Q = haar_orthogonal(M, a);
    CHECK((Q.transpose() * Q - Eigen::MatrixXd::Identity(M, M)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(Q == haar_orthogonal(M, b));
  }
}

TEST_CASE("haar_orthogonal on O(1) takes both signs") {
  int plus = 0;
  const int n = 4000;
  Rng rng(5);
  for (int i = 0; i < n; ++i) {
    const double q = haar_orthogonal(1, rng)(0, 0);
    CHECK(std::abs(q) == 1.0);
    plus += q > 0.0;
  }
  // Binomial(n, 1/2): 4 standard deviations.
  CHECK(std::abs(plus - n / 2) < 4.0 * std::sqrt(n / 4.0));
}

TEST_CASE("haar_orthogonal O(2) moments") {
  const int n = 100000;
  Rng rng(2024);
  double s1 = 0.0, s2 = 0.0, s4 = 0.0, det_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXd Q = haar_orthogonal(2, rng);
    const double q = Q(0, 0);
    s1 += q;
    s2 += q * q;
    s4 += q * q * q * q;
    det_sum += Q.determinant();
  }
  const double m1 = oracle::haar_o2_moment(1), m2 = oracle::haar_o2_moment(2),
               m4 = oracle::haar_o2_moment(4);
  CHECK(m1 == doctest::Approx(0.0).scale(1.0));
  CHECK(m2 == doctest::Approx(0.5));
  const double sd1 = std::sqrt(m2 / n);
  const double sd2 = std::sqrt((m4 - m2 * m2) / n);
  CHECK(std::abs(s1 / n - m1) < 3.0 * sd1);
  CHECK(std::abs(s2 / n - m2) < 3.0 * sd2);
  // Rotations and reflections are equally likely.
  CHECK(std::abs(det_sum / n) < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("build_dictionary shapes") {
  const Dictionary sq = build_dictionary(DictionaryKind::concat_orthogonal, 1, 5, 3);
  CHECK(sq.N() == 5);
  CHECK((sq.matrix.transpose() * sq.matrix - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() <
        1e-12);

  const Dictionary d = build_dictionary(DictionaryKind::concat_orthogonal, 2, 3, 4);
  CHECK(d.matrix.rows() == 3);
  CHECK(d.matrix.cols() == 6);
  for (int t = 0; t < 2; ++t) {
    const Eigen::MatrixXd B = d.block(t);
    CHECK((B.transpose() * B - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK((d.block(0) - d.block(1)).cwiseAbs().maxCoeff() > 1e-3);

  const Dictionary g = build_dictionary(DictionaryKind::iid_gaussian, 2, 3, 4);
  CHECK(g.matrix.rows() == 3);
  CHECK(g.matrix.cols() == 6);
  CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(g.matrix).rank() == 3);

  CHECK(build_dictionary(DictionaryKind::iid_gaussian, 3, 4, 8).matrix ==
        build_dictionary(DictionaryKind::iid_gaussian, 3, 4, 8).matrix);
  CHECK(build_dictionary(DictionaryKind::concat_orthogonal, 3, 4, 8).matrix !=
        build_dictionary(DictionaryKind::concat_orthogonal, 3, 4, 9).matrix);
  CHECK_THROWS_AS(build_dictionary(DictionaryKind::concat_orthogonal, 0, 4, 1), DomainError);
  CHECK_THROWS_AS(build_dictionary(DictionaryKind::concat_orthogonal, 2, 0, 1), DomainError);
}

TEST_CASE("dictionary kind names") {
  CHECK(parse_dictionary_kind("concat") == DictionaryKind::concat_orthogonal);
  CHECK(parse_dictionary_kind("iid_gaussian") == DictionaryKind::iid_gaussian);
  CHECK(to_string(DictionaryKind::concat_orthogonal) == "concat_orthogonal");
  CHECK_THROWS_AS(parse_dictionary_kind("dct"), DomainError);
}

TEST_CASE("make_instance") {
  const Dictionary d = build_dictionary(DictionaryKind::concat_orthogonal, 3, 4, 1);
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(12);
  x0[1] = 0.5;
  x0[9] = -2.0;
  x0[10] = 1.0;
  const SparseInstance inst = make_instance(d, x0);
  CHECK(inst.support == std::vector<int>{1, 9, 10});
  CHECK(inst.block_counts == std::vector<int>{1, 0, 2});
  CHECK((inst.y - d.matrix * x0).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(make_instance(d, Eigen::VectorXd::Zero(11)), DomainError);
}

}  // TEST_SUITE
