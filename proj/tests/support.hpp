#pragma once

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "doctest.h"
#include "roomgroup/errors.hpp"
#include "roomgroup/linalg.hpp"
#include "roomgroup/overlap.hpp"
#include "roomgroup/rng.hpp"

namespace testing {

using namespace roomgroup;

template <class F>
std::optional<ErrorKind> error_kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

template <class F>
std::string error_message_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

#define CHECK_ERROR_KIND(expr, kind_) \
  CHECK(::testing::error_kind_of([&] { (void)(expr); }) == std::optional(kind_))

inline std::vector<std::string> numbered_ids(std::size_t n, const std::string& prefix = "i") {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i));
  return ids;
}

// Block matrix with in-block scores drawn from [in_lo, in_hi] and cross-block
// scores from [out_lo, out_hi]. Ids are numbered block by block.
inline OverlapMatrix planted_blocks(const std::vector<std::size_t>& sizes, Rng& rng,
                                    double in_lo, double in_hi, double out_lo, double out_hi,
                                    std::vector<int>* labels = nullptr) {
  std::vector<int> block;
  for (std::size_t b = 0; b < sizes.size(); ++b)
    for (std::size_t i = 0; i < sizes[b]; ++i) block.push_back(static_cast<int>(b));
  const std::size_t n = block.size();
  Matrix m(n, n, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = block[i] == block[j] ? rng.uniform(in_lo, in_hi) : rng.uniform(out_lo, out_hi);
      m(i, j) = m(j, i) = v;
    }
  if (labels != nullptr) *labels = block;
  return OverlapMatrix(numbered_ids(n), m);
}

inline Matrix random_symmetric(std::size_t n, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) m(i, j) = m(j, i) = rng.uniform(lo, hi);
  return m;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) {
    path = std::filesystem::temp_directory_path() /
           (name + "-" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

}  // namespace testing
