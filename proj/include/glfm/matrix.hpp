#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace glfm {

/// Dense row-major matrix of doubles; the carrier for feature blocks.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * cols, cols};
  }
  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  bool empty() const { return rows == 0; }

  void append_row(std::span<const double> r) {
    data.insert(data.end(), r.begin(), r.end());
    ++rows;
  }
};

/// Squared Euclidean distance, accumulated in ascending dimension order so
/// that independent call sites round identically.
inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace glfm
