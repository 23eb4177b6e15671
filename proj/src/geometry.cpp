#include "glfm/geometry.hpp"

#include <cmath>

namespace glfm {

Vec3 PointCloud::centroid() const {
  Vec3 c;
  if (points.empty()) return c;
  for (const Vec3& p : points) c += p;
  return c * (1.0 / static_cast<double>(points.size()));
}

void PointCloud::validate() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3& p = points[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw std::invalid_argument("cloud '" + id + "': non-finite coordinate at point " +
                                  std::to_string(i));
    }
  }
  if (!mask.empty()) {
    if (mask.size() != points.size()) {
      throw std::invalid_argument("cloud '" + id + "': mask length " +
                                  std::to_string(mask.size()) + " != point count " +
                                  std::to_string(points.size()));
    }
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (mask[i] > 1) {
        throw std::invalid_argument("cloud '" + id + "': mask value at " + std::to_string(i) +
                                    " is not 0/1");
      }
    }
  }
}

}  // namespace glfm
