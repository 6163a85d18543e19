#include "l1lab/dictionary.hpp"

#include <string>

#include "l1lab/errors.hpp"

namespace l1lab {

std::string to_string(DictionaryKind kind) {
  return kind == DictionaryKind::concat_orthogonal ? "concat_orthogonal" : "iid_gaussian";
}

DictionaryKind parse_dictionary_kind(const std::string& name) {
  if (name == "concat_orthogonal" || name == "concat") return DictionaryKind::concat_orthogonal;
  if (name == "iid_gaussian" || name == "gaussian") return DictionaryKind::iid_gaussian;
  throw DomainError("unknown dictionary kind '" + name + "'");
}

Eigen::MatrixXd haar_orthogonal(int M, Rng& rng) {
  if (M < 1) throw DomainError("haar_orthogonal needs M >= 1");
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(M, M);
  // Column-major fill keeps the draw order fixed.
  for (Eigen::Index j = 0; j < M; ++j) {
    for (Eigen::Index i = 0; i < M; ++i) g(i, j) = normal(rng);
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const auto& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < M; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

Dictionary build_dictionary(DictionaryKind kind, int T, int M, std::uint64_t seed) {
  if (T < 1 || M < 1) throw DomainError("dictionary needs T >= 1 and M >= 1");
  Dictionary d;
  d.kind = kind;
  d.T = T;
  d.M = M;
  d.seed = seed;
  d.matrix.resize(M, static_cast<Eigen::Index>(T) * M);
  Rng rng(seed);
  if (kind == DictionaryKind::concat_orthogonal) {
    for (int t = 0; t < T; ++t) {
      d.matrix.middleCols(static_cast<Eigen::Index>(t) * M, M) = haar_orthogonal(M, rng);
    }
  } else {
    std::normal_distribution<double> normal;
    for (Eigen::Index j = 0; j < d.matrix.cols(); ++j) {
      for (Eigen::Index i = 0; i < M; ++i) d.matrix(i, j) = normal(rng);
    }
  }
  return d;
}

SparseInstance make_instance(const Dictionary& dict, Eigen::VectorXd x0) {
  if (x0.size() != dict.N()) {
    throw DomainError("signal length " + std::to_string(x0.size()) + " != N = " +
                      std::to_string(dict.N()));
  }
  SparseInstance inst;
  inst.block_counts.assign(dict.T, 0);
  for (Eigen::Index i = 0; i < x0.size(); ++i) {
    if (x0[i] != 0.0) {
      inst.support.push_back(static_cast<int>(i));
      ++inst.block_counts[i / dict.M];
    }
  }
  inst.y = dict.matrix * x0;
  inst.x0 = std::move(x0);
  return inst;
}

}  // namespace l1lab
