#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "glfm/features.hpp"
#include "glfm/matrix.hpp"
#include "glfm/rng.hpp"

namespace glfm {

/// Per-patch anomaly-probability predictor: D -> hidden -> 1 with tanh on the
/// hidden layer and a logistic output. hidden == 0 degenerates to a plain
/// linear-logistic model.
struct SegHead {
  std::size_t input_dim = 0;
  std::size_t hidden = 0;
  std::vector<double> w1;  // hidden x input_dim (row-major); 1 x input_dim when hidden == 0
  std::vector<double> b1;  // hidden; scalar bias when hidden == 0
  std::vector<double> w2;  // 1 x hidden; unused when hidden == 0
  std::vector<double> b2;  // 1; unused when hidden == 0

  /// Pre-sigmoid output for one feature row.
  double logit(std::span<const double> features) const;
};

struct TrainConfig {
  double learning_rate = 0.05;
  std::size_t iterations = 4000;
  std::size_t batch_size = 256;
  double focal_gamma = 2.0;
  double focal_alpha = 0.25;
  double momentum = 0.9;
  std::size_t hidden = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d prob, per patch
};

/// Mean focal loss -alpha * (1-p_t)^gamma * log(p_t) with p_t = p for
/// positive labels and 1-p otherwise. Probabilities are clamped to
/// [1e-7, 1 - 1e-7] before evaluation. With gamma = 0, alpha = 1 this is
/// exactly mean binary cross-entropy.
LossGrad focal_loss(std::span<const double> probs, std::span<const std::uint8_t> labels,
                    double gamma, double alpha);

/// Soft IoU loss 1 - sum(p*y) / sum(p + y - p*y). Throws when no label is
/// positive (undefined IoU); callers skip such batches.
LossGrad soft_iou_loss(std::span<const double> probs, std::span<const std::uint8_t> labels);

struct TrainResult {
  SegHead head;
  std::vector<std::pair<std::size_t, double>> loss_trace;  // (iteration, full-set loss)
};

/// Mini-batch gradient descent with momentum on IoU + Focal. Batches without
/// a positive label are skipped (the iteration still counts). Deterministic
/// given cfg.seed. Throws on divergence (non-finite loss), naming the
/// iteration.
TrainResult train_seg_head(const Matrix& patch_features,
                           const std::vector<std::uint8_t>& labels, const TrainConfig& cfg);

/// Convenience over a feature-set list; rows are concatenated in order.
TrainResult train_seg_head(const std::vector<FeatureSet>& features,
                           const std::vector<std::vector<std::uint8_t>>& patch_labels,
                           const TrainConfig& cfg);

std::vector<double> predict_patch_probs(const SegHead& head, const FeatureSet& features);

/// Patch labels from a point-wise mask: each point joins its nearest patch
/// center, and a patch is positive when at least half of its member points
/// are positive (ties positive). Patches with no member points are negative.
std::vector<std::uint8_t> derive_patch_labels(const PointCloud& cloud,
                                              const std::vector<Vec3>& centers);

/// Head weights as flat float32 with a JSON shape sidecar (path + ".json").
void save_seg_head(const SegHead& head, const std::filesystem::path& path,
                   std::uint64_t config_hash, std::uint64_t seed);
SegHead load_seg_head(const std::filesystem::path& path);

}  // namespace glfm
