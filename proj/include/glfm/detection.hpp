#pragma once

#include <optional>
#include <span>
#include <vector>

#include "glfm/adaptation.hpp"
#include "glfm/bank.hpp"
#include "glfm/features.hpp"
#include "glfm/geometry.hpp"
#include "glfm/nn_index.hpp"

namespace glfm {

enum class Smoothing { nearest, gauss3 };

struct AnomalyResult {
  std::string id;
  std::vector<double> point_scores;          // anomaly map A, one per point
  double object_score = 0.0;                 // xi = max(point_scores)
  std::size_t routed_idx = 0;                // chosen cluster
  std::vector<double> patch_scores;          // raw nearest-bank distances
  std::optional<std::vector<double>> fused_scores;
};

/// Score fusion with the adaptation head: patch score becomes
/// (1-lambda) * z(distance) + lambda * z(head logit), z-scored against the
/// training statistics stored in the model.
struct FusionConfig {
  const SegHead* head = nullptr;
  double lambda = 0.0;
};

/// Per-bank nearest-neighbor indexes, built once per model and shared by
/// concurrent detect calls.
class DetectContext {
 public:
  explicit DetectContext(const GlfmModel& model);
  const GlfmModel& model() const { return *model_; }
  const NnIndex& bank_index(std::size_t idx) const { return bank_indexes_[idx]; }

 private:
  const GlfmModel* model_;
  std::vector<NnIndex> bank_indexes_;
};

/// Stage-III inference on pre-extracted features: route by global feature,
/// score each patch by the distance to the nearest vector in the routed bank,
/// propagate patch scores to points, reduce to the object score by max.
/// The model's normalizer, when present, is applied to a copy of features.
AnomalyResult detect(const PointCloud& cloud, const DetectContext& ctx,
                     const FeatureSet& features,
                     std::optional<FusionConfig> fusion = std::nullopt,
                     Smoothing smoothing = Smoothing::nearest);

/// Convenience overload that extracts features with cfg first.
AnomalyResult detect(const PointCloud& cloud, const DetectContext& ctx,
                     const ExtractorConfig& cfg,
                     std::optional<FusionConfig> fusion = std::nullopt,
                     Smoothing smoothing = Smoothing::nearest);

/// nearest: each point takes the score of its closest patch center.
/// gauss3: weighted mean of the 3 nearest centers, weights exp(-d^2/2s^2)
/// with s the median center spacing.
std::vector<double> propagate_to_points(std::span<const double> patch_scores,
                                        std::span<const Vec3> centers,
                                        const PointCloud& cloud, Smoothing smoothing);

}  // namespace glfm
