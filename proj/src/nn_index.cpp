#include "glfm/nn_index.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace glfm {

namespace {

constexpr std::size_t kLeafSize = 16;

// Worse = lexicographically larger (squared distance, index); the heap keeps
// the worst candidate on top so ties resolve to the smaller original index.
struct Candidate {
  double d2;
  std::size_t index;
  bool operator<(const Candidate& o) const {
    return d2 < o.d2 || (d2 == o.d2 && index < o.index);
  }
};

class BestK {
 public:
  explicit BestK(std::size_t k) : k_(k) { heap_.reserve(k); }

  bool full() const { return heap_.size() == k_; }
  const Candidate& worst() const { return heap_.front(); }

  void offer(double d2, std::size_t index) {
    Candidate c{d2, index};
    if (!full()) {
      heap_.push_back(c);
      std::push_heap(heap_.begin(), heap_.end());
    } else if (c < heap_.front()) {
      std::pop_heap(heap_.begin(), heap_.end());
      heap_.back() = c;
      std::push_heap(heap_.begin(), heap_.end());
    }
  }

  std::vector<Neighbor> sorted() {
    std::sort(heap_.begin(), heap_.end());
    std::vector<Neighbor> out;
    out.reserve(heap_.size());
    for (const Candidate& c : heap_) out.push_back({c.index, std::sqrt(c.d2)});
    return out;
  }

 private:
  std::size_t k_;
  std::vector<Candidate> heap_;
};

}  // namespace

NnIndex NnIndex::build(const Matrix& vectors) {
  if (vectors.rows == 0) throw std::invalid_argument("NnIndex: empty input");
  if (vectors.cols == 0) throw std::invalid_argument("NnIndex: zero dimension");
  NnIndex idx;
  idx.dim_ = vectors.cols;
  idx.count_ = vectors.rows;
  idx.data_ = vectors.data;
  idx.use_tree_ = idx.dim_ <= kMaxTreeDim;
  if (idx.use_tree_) {
    idx.order_.resize(idx.count_);
    std::iota(idx.order_.begin(), idx.order_.end(), std::size_t{0});
    idx.nodes_.reserve(2 * idx.count_ / kLeafSize + 2);
    idx.root_ = idx.build_node(0, idx.count_);
  }
  return idx;
}

NnIndex NnIndex::build(std::span<const Vec3> points) {
  Matrix m(points.size(), 3);
  for (std::size_t i = 0; i < points.size(); ++i) {
    m.at(i, 0) = points[i].x;
    m.at(i, 1) = points[i].y;
    m.at(i, 2) = points[i].z;
  }
  return build(m);
}

std::size_t NnIndex::build_node(std::size_t begin, std::size_t end) {
  std::size_t id = nodes_.size();
  nodes_.emplace_back();
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  if (end - begin <= kLeafSize) return id;

  // Split along the widest dimension; ties go to the lower dimension.
  int split_dim = 0;
  double best_extent = -1.0;
  for (std::size_t d = 0; d < dim_; ++d) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = begin; i < end; ++i) {
      double v = data_[order_[i] * dim_ + d];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    double extent = hi - lo;
    if (extent > best_extent) {
      best_extent = extent;
      split_dim = static_cast<int>(d);
    }
  }
  if (best_extent <= 0.0) return id;  // all points coincide: keep as leaf

  std::size_t mid = begin + (end - begin) / 2;
  auto cmp = [&](std::size_t a, std::size_t b) {
    double va = data_[a * dim_ + split_dim];
    double vb = data_[b * dim_ + split_dim];
    return va < vb || (va == vb && a < b);  // total order -> deterministic tree
  };
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, cmp);

  std::size_t left = build_node(begin, mid);
  std::size_t right = build_node(mid, end);
  nodes_[id].split_dim = split_dim;
  nodes_[id].split_val = data_[order_[mid] * dim_ + split_dim];
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

namespace {

double squared_distance_to(std::span<const double> q, std::span<const double> p) {
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    double d = q[i] - p[i];
    s += d * d;
  }
  return s;
}

}  // namespace

std::vector<Neighbor> NnIndex::knn(std::span<const double> query, std::size_t k) const {
  if (query.size() != dim_) {
    throw std::invalid_argument("NnIndex::knn: query dimension " +
                                std::to_string(query.size()) + " != index dimension " +
                                std::to_string(dim_));
  }
  if (k == 0) throw std::invalid_argument("NnIndex::knn: k must be positive");
  if (k > count_) {
    throw std::invalid_argument("NnIndex::knn: k = " + std::to_string(k) + " > size " +
                                std::to_string(count_));
  }

  BestK best(k);
  if (!use_tree_) {
    for (std::size_t i = 0; i < count_; ++i) {
      best.offer(squared_distance_to(query, entry(i)), i);
    }
    return best.sorted();
  }

  // Iterative depth-first traversal, near child first. A far subtree is
  // visited unless it is strictly farther than the current worst candidate
  // (an equal plane distance can still hold an equal-distance, smaller index).
  struct Visit {
    std::size_t node;
    double bound2;  // squared distance from query to the subtree's slab
  };
  std::vector<Visit> stack;
  stack.push_back({root_, 0.0});
  while (!stack.empty()) {
    Visit v = stack.back();
    stack.pop_back();
    if (best.full() && v.bound2 > best.worst().d2) continue;
    const Node& node = nodes_[v.node];
    if (node.split_dim < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        std::size_t pi = order_[i];
        best.offer(squared_distance_to(query, entry(pi)), pi);
      }
      continue;
    }
    double diff = query[static_cast<std::size_t>(node.split_dim)] - node.split_val;
    std::size_t near = diff < 0.0 ? node.left : node.right;
    std::size_t far = diff < 0.0 ? node.right : node.left;
    stack.push_back({far, diff * diff});
    stack.push_back({near, v.bound2});
  }
  return best.sorted();
}

std::vector<Neighbor> NnIndex::knn(const Vec3& query, std::size_t k) const {
  const double q[3] = {query.x, query.y, query.z};
  return knn(std::span<const double>(q, 3), k);
}

std::vector<Neighbor> NnIndex::radius_search(std::span<const double> query,
                                             double radius) const {
  if (query.size() != dim_) {
    throw std::invalid_argument("NnIndex::radius_search: dimension mismatch");
  }
  if (radius < 0.0) throw std::invalid_argument("NnIndex::radius_search: negative radius");
  double r2 = radius * radius;
  std::vector<Neighbor> out;

  auto scan = [&](std::size_t i) {
    double d2 = squared_distance_to(query, entry(i));
    if (d2 <= r2) out.push_back({i, std::sqrt(d2)});
  };

  if (!use_tree_) {
    for (std::size_t i = 0; i < count_; ++i) scan(i);
  } else {
    std::vector<std::size_t> stack;
    stack.push_back(root_);
    while (!stack.empty()) {
      const Node& node = nodes_[stack.back()];
      stack.pop_back();
      if (node.split_dim < 0) {
        for (std::size_t i = node.begin; i < node.end; ++i) scan(order_[i]);
        continue;
      }
      double diff = query[static_cast<std::size_t>(node.split_dim)] - node.split_val;
      std::size_t near = diff < 0.0 ? node.left : node.right;
      std::size_t far = diff < 0.0 ? node.right : node.left;
      if (diff * diff <= r2) stack.push_back(far);
      stack.push_back(near);
    }
  }
  std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
  });
  return out;
}

std::vector<Neighbor> NnIndex::radius_search(const Vec3& query, double radius) const {
  const double q[3] = {query.x, query.y, query.z};
  return radius_search(std::span<const double>(q, 3), radius);
}

}  // namespace glfm
