#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "glfm/geometry.hpp"
#include "glfm/matrix.hpp"
#include "glfm/rng.hpp"

namespace glfm {

/// Per-patch local features with their centers plus one pooled global vector.
/// Invariant: global is the column-wise mean of local.
struct FeatureSet {
  std::vector<Vec3> centers;           // M patch centers
  Matrix local;                        // M x D
  std::vector<double> global;          // D
  std::string extractor_id;
  std::vector<std::string> layer_tags; // optional per-column provenance

  void validate() const;
};

struct ExtractorConfig {
  enum class Kind { fpfh, external };
  enum class Normalize { none, zscore };

  Kind kind = Kind::fpfh;
  std::size_t patch_count = 0;   // 0 -> min(1024, n/8), at least 1
  double fpfh_radius = 0.0;      // <= 0 -> 5 x median 1-NN spacing
  Normalize normalize = Normalize::none;  // fitted on the training set, stored in the model
};

/// Arithmetic column mean of the local rows.
std::vector<double> pool_global(const Matrix& local);

/// Farthest point sampling. First center is the point nearest the centroid,
/// each following center maximizes its minimum distance to the chosen set,
/// all ties broken by smaller index. Deterministic; the rng parameter is
/// accepted for interface uniformity and never drawn from.
std::vector<std::size_t> sample_patch_centers(const PointCloud& cloud, std::size_t m,
                                              SeededRng& rng);

/// 33-bin FPFH rows (three 11-bin angle histograms) at sampled patch centers.
/// Pair angles are folded to be normal-sign invariant, so no consistent
/// normal orientation is required and descriptors are rigid-motion invariant.
FeatureSet extract_local_features(const PointCloud& cloud, const ExtractorConfig& cfg,
                                  SeededRng& rng);

/// GLFM-FEAT binary file: magic "GFT1", u32 M, u32 D, M*D float32 local rows,
/// 3*M float32 centers. Loading recomputes global as the row mean.
FeatureSet load_external_features(const std::filesystem::path& path);
void save_features(const FeatureSet& features, const std::filesystem::path& path);

/// Median nearest-neighbor spacing of the cloud (distance to the closest
/// other point, median over points).
double median_nn_spacing(const PointCloud& cloud);

inline constexpr std::size_t kFpfhDim = 33;
inline constexpr const char* kFpfhExtractorId = "fpfh33";
inline constexpr const char* kExternalExtractorId = "external";

}  // namespace glfm
