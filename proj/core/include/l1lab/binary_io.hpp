#pragma once

// Little-endian binary layout for exchanging dictionaries and instances.
//
// Dictionary:  "L1LD" | u32 version (1) | u32 kind (0 concat, 1 gaussian)
//              | u32 T | u32 M | u64 seed | M*T*M f64, row-major
// Instance:    "L1LI" | u32 version (1) | u32 T | u32 M | f64[T*M] x0 | f64[M] y
//
// Support and block counts of an instance are recomputed from x0 on read.

#include <filesystem>
#include <iosfwd>

#include "l1lab/dictionary.hpp"

namespace l1lab {

void write_dictionary(std::ostream& out, const Dictionary& dict);
Dictionary read_dictionary(std::istream& in);

void write_instance(std::ostream& out, const SparseInstance& inst, int T, int M);
/// Throws FormatError on a bad magic, version or truncated payload.
SparseInstance read_instance(std::istream& in, int* T = nullptr, int* M = nullptr);

void save_dictionary(const std::filesystem::path& path, const Dictionary& dict);
Dictionary load_dictionary(const std::filesystem::path& path);

}  // namespace l1lab
