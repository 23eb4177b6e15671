#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "glfm/geometry.hpp"
#include "glfm/matrix.hpp"

namespace glfm {

struct Neighbor {
  std::size_t index;  // position in the build input
  double distance;    // Euclidean
};

/// Exact k-nearest-neighbor index over fixed-dimension vectors.
///
/// Distance ties resolve to the smaller original index, so query results are
/// fully deterministic. The index is immutable after build and queries are
/// const, so concurrent reads from many threads are safe. Dimensions above
/// kMaxTreeDim skip the k-d tree and scan linearly; the contract is the same.
class NnIndex {
 public:
  static constexpr std::size_t kMaxTreeDim = 20;

  static NnIndex build(const Matrix& vectors);
  static NnIndex build(std::span<const Vec3> points);

  std::size_t size() const { return count_; }
  std::size_t dimension() const { return dim_; }

  /// k smallest Euclidean distances, ascending (distance, index).
  /// Throws std::invalid_argument on k == 0, k > size, dimension mismatch.
  std::vector<Neighbor> knn(std::span<const double> query, std::size_t k) const;
  std::vector<Neighbor> knn(const Vec3& query, std::size_t k) const;

  /// All entries with distance <= radius, ascending (distance, index).
  std::vector<Neighbor> radius_search(std::span<const double> query, double radius) const;
  std::vector<Neighbor> radius_search(const Vec3& query, double radius) const;

 private:
  struct Node {
    int split_dim = -1;    // -1 marks a leaf
    double split_val = 0.0;
    std::size_t left = 0, right = 0;   // child node ids (internal)
    std::size_t begin = 0, end = 0;    // order_ range (leaf)
  };

  std::span<const double> entry(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }

  std::size_t build_node(std::size_t begin, std::size_t end);

  std::size_t dim_ = 0;
  std::size_t count_ = 0;
  std::vector<double> data_;          // row-major, original order
  std::vector<std::size_t> order_;    // permutation referenced by leaves
  std::vector<Node> nodes_;
  std::size_t root_ = 0;
  bool use_tree_ = false;
};

}  // namespace glfm
