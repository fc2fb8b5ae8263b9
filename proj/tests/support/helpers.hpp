#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "earncast/matrix.hpp"
#include "oracles.hpp"

namespace testutil {

inline earncast::Matrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  earncast::Matrix m(rows, cols);
  // mix scales so the spectrum is spread out
  std::vector<double> scale(cols);
  for (auto& s : scale) s = 0.2 + 3.0 * std::uniform_real_distribution<double>(0.0, 1.0)(gen);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = scale[c] * n(gen) + (c > 0 ? 0.3 * m(r, c - 1) : 0.0);
  return m;
}

inline oracle::Dense to_dense(const earncast::Matrix& m) {
  oracle::Dense out(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  return out;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("earncast_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Rows of Gaussian features with labels from a noisy nonlinear rule, for
/// boosting fixtures.
struct ClassFixture {
  earncast::Matrix x;
  std::vector<int> y;
};

inline ClassFixture class_fixture(std::size_t rows, std::size_t cols, int n_classes, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  ClassFixture f{earncast::Matrix(rows, cols), std::vector<int>(rows)};
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) f.x(r, c) = n(gen);
    double s = f.x(r, 0) + 0.5 * f.x(r, 1 % cols) * f.x(r, 2 % cols) + 0.5 * n(gen);
    int k = static_cast<int>(std::floor((s + 1.5) / 3.0 * n_classes));
    f.y[r] = std::clamp(k, 0, n_classes - 1);
  }
  return f;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testutil
