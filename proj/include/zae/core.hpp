#pragma once

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace zae {

/// Dense sample matrix: rows are samples, columns are dimensions.
using DataMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Malformed or truncated input data (files, records).
class parse_error : public std::runtime_error {
 public:
  explicit parse_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Non-finite values or singular systems encountered during computation.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// ---------------------------------------------------------------------------
// Seeded randomness.
//
// Every random choice in the library flows from a caller-supplied 64-bit seed
// through named substreams, so independent components (weight init, batch
// shuffling, input corruption, CV splits) never share a stream.
// ---------------------------------------------------------------------------

/// splitmix64 finalizer; used to decorrelate derived seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Derive the seed of a named substream ("init", "shuffle", "corruption",
/// "cv-split", ...) from a master seed.
inline std::uint64_t substream_seed(std::uint64_t seed, std::string_view name) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a over the name
  for (char ch : name) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ull;
  }
  return mix64(seed ^ h);
}

/// Counter-based variant for per-(epoch, batch) streams.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return mix64(mix64(seed ^ mix64(a)) ^ b);
}

/// Deterministic RNG. The generator is xoshiro-free on purpose: mt19937_64 is
/// fully specified by the standard, and the uniform/normal transforms below
/// avoid std::*_distribution, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform index in [0, n). Modulo bias is below 1e-15 for any n here.
  std::size_t uniform_index(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

  /// Standard normal via Box-Muller (no cached spare, two draws per call).
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  /// In-place Fisher-Yates; std::shuffle is not reproducible across stdlibs.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_index(i)]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

// ---------------------------------------------------------------------------
// Little-endian binary primitives shared by all file formats.
// ---------------------------------------------------------------------------

inline void write_u8(std::ostream& os, std::uint8_t v) {
  os.put(static_cast<char>(v));
}

inline void write_u32_le(std::ostream& os, std::uint32_t v) {
  char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(buf, 4);
}

inline void write_u64_le(std::ostream& os, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(buf, 8);
}

inline void write_f64_le(std::ostream& os, double v) {
  write_u64_le(os, std::bit_cast<std::uint64_t>(v));
}

inline std::uint8_t read_u8(std::istream& is, const char* what) {
  int ch = is.get();
  if (ch == EOF) throw parse_error(std::string("unexpected end of file reading ") + what);
  return static_cast<std::uint8_t>(ch);
}

inline std::uint32_t read_u32_le(std::istream& is, const char* what) {
  char buf[4];
  if (!is.read(buf, 4)) throw parse_error(std::string("unexpected end of file reading ") + what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  return v;
}

inline std::uint64_t read_u64_le(std::istream& is, const char* what) {
  char buf[8];
  if (!is.read(buf, 8)) throw parse_error(std::string("unexpected end of file reading ") + what);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  return v;
}

inline double read_f64_le(std::istream& is, const char* what) {
  return std::bit_cast<double>(read_u64_le(is, what));
}

inline void write_magic(std::ostream& os, const char (&magic)[5]) {
  os.write(magic, 4);
}

inline void expect_magic(std::istream& is, const char (&magic)[5], const std::string& path) {
  char buf[4];
  if (!is.read(buf, 4) || std::string_view(buf, 4) != std::string_view(magic, 4)) {
    throw parse_error(path + ": bad magic, expected " + magic);
  }
}

// ---------------------------------------------------------------------------
// ZMAT: the on-disk matrix format.
// Layout: "ZMAT", u32 version=1, u64 rows, u64 cols, row-major f64, all LE.
// ---------------------------------------------------------------------------

inline void write_matrix(std::ostream& os, const DataMatrix& m) {
  write_magic(os, "ZMAT");
  write_u32_le(os, 1);
  write_u64_le(os, static_cast<std::uint64_t>(m.rows()));
  write_u64_le(os, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) write_f64_le(os, m(i, j));
}

inline void save_matrix(const std::filesystem::path& path, const DataMatrix& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw parse_error("cannot open for writing: " + path.string());
  write_matrix(os, m);
  if (!os) throw parse_error("write failed: " + path.string());
}

inline DataMatrix read_matrix(std::istream& is, const std::string& path) {
  expect_magic(is, "ZMAT", path);
  std::uint32_t version = read_u32_le(is, "version");
  if (version != 1) throw parse_error(path + ": unsupported ZMAT version " + std::to_string(version));
  std::uint64_t rows = read_u64_le(is, "rows");
  std::uint64_t cols = read_u64_le(is, "cols");
  DataMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::uint64_t i = 0; i < rows; ++i)
    for (std::uint64_t j = 0; j < cols; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = read_f64_le(is, "matrix entry");
  return m;
}

inline DataMatrix load_matrix(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw parse_error("cannot open: " + path.string());
  return read_matrix(is, path.string());
}

/// FNV-1a over a file's bytes; used for input fingerprints in run manifests.
inline std::string fnv1a_file_hex(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw parse_error("cannot open: " + path.string());
  std::uint64_t h = 1469598103934665603ull;
  char buf[1 << 16];
  while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
    for (std::streamsize i = 0; i < is.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
    if (!is) break;
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return std::string(out);
}

}  // namespace zae
