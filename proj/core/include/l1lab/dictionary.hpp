#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace l1lab {

using Rng = std::mt19937_64;

enum class DictionaryKind { concat_orthogonal, iid_gaussian };

std::string to_string(DictionaryKind kind);
/// Accepts "concat_orthogonal" / "concat" and "iid_gaussian" / "gaussian".
DictionaryKind parse_dictionary_kind(const std::string& name);

/// M x N sensing matrix, N = T M. For concat_orthogonal the columns
/// [t M, (t+1) M) hold the t-th Haar-orthogonal block.
struct Dictionary {
  DictionaryKind kind = DictionaryKind::concat_orthogonal;
  int T = 0;
  int M = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd matrix;

  int N() const { return T * M; }
  auto block(int t) const { return matrix.middleCols(static_cast<Eigen::Index>(t) * M, M); }
};

/// Haar-distributed M x M orthogonal matrix: QR of an i.i.d. standard Gaussian
/// matrix with column j of Q multiplied by sign(R_jj).
Eigen::MatrixXd haar_orthogonal(int M, Rng& rng);

/// Concatenation of T independent Haar blocks, or an M x TM i.i.d. standard
/// Gaussian matrix. Same seed gives the same matrix bit for bit.
Dictionary build_dictionary(DictionaryKind kind, int T, int M, std::uint64_t seed);

struct SparseInstance {
  Eigen::VectorXd x0;
  std::vector<int> support;       ///< sorted indices with x0 != 0
  std::vector<int> block_counts;  ///< K_t, one per block of M columns
  Eigen::VectorXd y;              ///< D x0
};

/// Completes an instance from its signal: support, per-block counts and y.
SparseInstance make_instance(const Dictionary& dict, Eigen::VectorXd x0);

}  // namespace l1lab
