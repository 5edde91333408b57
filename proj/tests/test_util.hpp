#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "tilescope/raw_store.hpp"

namespace tilescope::testing {

// Removes its directory on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("tilescope-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::filesystem::path write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f << content;
  return p;
}

inline bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// Rows of `columns` numbers; column 0/1 are the axes, all values uniform in
// [lo, hi) with two decimals. Returns the values exactly as written.
inline std::vector<std::vector<double>> write_uniform_csv(const std::filesystem::path& p, std::size_t rows,
                                                          std::size_t columns, std::uint64_t seed,
                                                          double lo = 0.0, double hi = 100.0) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> cents(static_cast<long>(lo * 100), static_cast<long>(hi * 100) - 1);
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  for (std::size_t c = 0; c < columns; ++c) f << (c ? "," : "") << "c" << c;
  f << '\n';
  std::vector<std::vector<double>> data(rows, std::vector<double>(columns));
  for (auto& row : data) {
    for (std::size_t c = 0; c < columns; ++c) {
      const long v = cents(rng);
      row[c] = static_cast<double>(v) / 100.0;
      f << (c ? "," : "") << v / 100 << '.' << (v % 100 < 10 ? "0" : "") << v % 100;
    }
    f << '\n';
  }
  return data;
}

}  // namespace tilescope::testing
