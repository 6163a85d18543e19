#include "l1lab/binary_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "l1lab/errors.hpp"

namespace l1lab {

namespace {

constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kMaxDim = 1u << 20;

template <class U>
void put(std::ostream& out, U value) {
  std::array<char, sizeof(U)> bytes{};
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xffu);
  }
  out.write(bytes.data(), bytes.size());
}

void put_f64(std::ostream& out, double value) { put(out, std::bit_cast<std::uint64_t>(value)); }

template <class U>
U get(std::istream& in) {
  std::array<unsigned char, sizeof(U)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw FormatError("truncated binary payload");
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get<std::uint64_t>(in)); }

void expect_magic(std::istream& in, const char* magic) {
  char got[4] = {};
  in.read(got, 4);
  if (!in || std::memcmp(got, magic, 4) != 0) {
    throw FormatError(std::string("bad magic, expected ") + std::string(magic, 4));
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) throw FormatError("unsupported version " + std::to_string(version));
}

std::uint32_t checked_dim(std::istream& in, const char* what) {
  const auto v = get<std::uint32_t>(in);
  if (v == 0 || v > kMaxDim) throw FormatError(std::string("implausible ") + what);
  return v;
}

}  // namespace

void write_dictionary(std::ostream& out, const Dictionary& dict) {
  out.write("L1LD", 4);
  put(out, kVersion);
  put(out, static_cast<std::uint32_t>(dict.kind == DictionaryKind::concat_orthogonal ? 0 : 1));
  put(out, static_cast<std::uint32_t>(dict.T));
  put(out, static_cast<std::uint32_t>(dict.M));
  put(out, dict.seed);
  for (Eigen::Index i = 0; i < dict.matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < dict.matrix.cols(); ++j) put_f64(out, dict.matrix(i, j));
  }
}

Dictionary read_dictionary(std::istream& in) {
  expect_magic(in, "L1LD");
  Dictionary d;
  const auto kind = get<std::uint32_t>(in);
  if (kind > 1) throw FormatError("unknown dictionary kind " + std::to_string(kind));
  d.kind = kind == 0 ? DictionaryKind::concat_orthogonal : DictionaryKind::iid_gaussian;
  d.T = static_cast<int>(checked_dim(in, "T"));
  d.M = static_cast<int>(checked_dim(in, "M"));
  d.seed = get<std::uint64_t>(in);
  d.matrix.resize(d.M, static_cast<Eigen::Index>(d.T) * d.M);
  for (Eigen::Index i = 0; i < d.matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.matrix.cols(); ++j) d.matrix(i, j) = get_f64(in);
  }
  return d;
}

void write_instance(std::ostream& out, const SparseInstance& inst, int T, int M) {
  if (inst.x0.size() != static_cast<Eigen::Index>(T) * M || inst.y.size() != M) {
    throw DomainError("instance does not match T, M");
  }
  out.write("L1LI", 4);
  put(out, kVersion);
  put(out, static_cast<std::uint32_t>(T));
  put(out, static_cast<std::uint32_t>(M));
  for (Eigen::Index i = 0; i < inst.x0.size(); ++i) put_f64(out, inst.x0[i]);
  for (Eigen::Index i = 0; i < inst.y.size(); ++i) put_f64(out, inst.y[i]);
}

SparseInstance read_instance(std::istream& in, int* T_out, int* M_out) {
  expect_magic(in, "L1LI");
  const int T = static_cast<int>(checked_dim(in, "T"));
  const int M = static_cast<int>(checked_dim(in, "M"));
  SparseInstance inst;
  inst.x0.resize(static_cast<Eigen::Index>(T) * M);
  for (Eigen::Index i = 0; i < inst.x0.size(); ++i) inst.x0[i] = get_f64(in);
  inst.y.resize(M);
  for (Eigen::Index i = 0; i < M; ++i) inst.y[i] = get_f64(in);
  inst.block_counts.assign(T, 0);
  for (Eigen::Index i = 0; i < inst.x0.size(); ++i) {
    if (inst.x0[i] != 0.0) {
      inst.support.push_back(static_cast<int>(i));
      ++inst.block_counts[i / M];
    }
  }
  if (T_out) *T_out = T;
  if (M_out) *M_out = M;
  return inst;
}

void save_dictionary(const std::filesystem::path& path, const Dictionary& dict) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_dictionary(out, dict);
}

Dictionary load_dictionary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_dictionary(in);
}

}  // namespace l1lab
