#pragma once

#include "glfm/geometry.hpp"
#include "glfm/rng.hpp"

namespace glfm {

/// RANSAC background-plane removal with a fixed 256-iteration budget.
/// If a plane holds at least min_inlier_frac of the points within
/// dist_threshold, those inliers are dropped (original order preserved);
/// otherwise the cloud is returned unchanged. Degenerate clouds (< 3 points)
/// are returned unchanged.
PointCloud remove_dominant_plane(const PointCloud& cloud, double dist_threshold,
                                 double min_inlier_frac, SeededRng& rng);

}  // namespace glfm
