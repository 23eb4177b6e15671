#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace glfm {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double squared_norm() const { return dot(*this); }
  double norm() const { return std::sqrt(squared_norm()); }
  Vec3 normalized() const {
    double n = norm();
    return n > 0.0 ? Vec3{x / n, y / n, z / n} : Vec3{0.0, 0.0, 0.0};
  }
  bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }
};

/// Ordered 3D points with an optional per-point {0,1} anomaly mask.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<std::uint8_t> mask;  // empty, or one {0,1} entry per point
  std::string id;

  std::size_t size() const { return points.size(); }
  bool has_mask() const { return !mask.empty(); }

  Vec3 centroid() const;

  // Throws std::invalid_argument when a coordinate is non-finite or the
  // mask length/values are inconsistent.
  void validate() const;
};

}  // namespace glfm
