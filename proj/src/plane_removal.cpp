#include "glfm/plane_removal.hpp"

#include <cmath>
#include <cstdlib>
#include <vector>

namespace glfm {

namespace {

constexpr int kRansacIterations = 256;

struct Plane {
  Vec3 normal;   // unit
  double offset; // signed distance of origin: n . p + offset = 0 on the plane
};

bool plane_through(const Vec3& a, const Vec3& b, const Vec3& c, Plane& out) {
  Vec3 n = (b - a).cross(c - a);
  double len = n.norm();
  if (len <= 0.0) return false;  // collinear sample
  out.normal = n * (1.0 / len);
  out.offset = -out.normal.dot(a);
  return true;
}

}  // namespace

PointCloud remove_dominant_plane(const PointCloud& cloud, double dist_threshold,
                                 double min_inlier_frac, SeededRng& rng) {
  const std::size_t n = cloud.size();
  if (n < 3) return cloud;

  Plane best{};
  std::size_t best_inliers = 0;
  for (int iter = 0; iter < kRansacIterations; ++iter) {
    std::size_t i = rng.uniform_u64(n);
    std::size_t j = rng.uniform_u64(n);
    std::size_t k = rng.uniform_u64(n);
    if (i == j || j == k || i == k) continue;
    Plane candidate;
    if (!plane_through(cloud.points[i], cloud.points[j], cloud.points[k], candidate)) continue;
    std::size_t inliers = 0;
    for (const Vec3& p : cloud.points) {
      if (std::abs(candidate.normal.dot(p) + candidate.offset) <= dist_threshold) ++inliers;
    }
    if (inliers > best_inliers) {
      best_inliers = inliers;
      best = candidate;
    }
  }

  if (best_inliers == 0 ||
      best_inliers < static_cast<std::size_t>(std::ceil(min_inlier_frac * static_cast<double>(n)))) {
    return cloud;
  }

  PointCloud out;
  out.id = cloud.id;
  out.points.reserve(n - best_inliers);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(best.normal.dot(cloud.points[i]) + best.offset) > dist_threshold) {
      out.points.push_back(cloud.points[i]);
      if (cloud.has_mask()) out.mask.push_back(cloud.mask[i]);
    }
  }
  return out;
}

}  // namespace glfm
