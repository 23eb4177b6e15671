#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "glfm/geometry.hpp"

namespace glfm {

/// Exact AUROC via sorting: P(score_pos > score_neg) + 0.5 * P(tie).
/// Throws when either class is absent.
double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Connected components of mask-positive points under a fixed connection
/// radius. Returns one id per point: dense ids from 0 in order of first
/// appearance for positives, -1 for the rest.
std::vector<int> connected_regions(const PointCloud& cloud,
                                   std::span<const std::uint8_t> mask, double radius);

struct ProCurve {
  std::vector<double> fpr;
  std::vector<double> pro;
};

/// Area under the per-region-overlap curve, integrated over
/// FPR in [0, fpr_limit] by trapezoid and normalized by fpr_limit.
/// region_ids follow the connected_regions convention (-1 = not in a region).
/// Throws when there are no regions or no negative points.
double aupro(std::span<const double> point_scores, std::span<const int> region_ids,
             std::span<const std::uint8_t> labels, double fpr_limit,
             ProCurve* curve = nullptr);

struct ClassMetrics {
  std::string name;
  double o_roc = -1.0;   // -1 marks "n/a" (single-class input)
  double p_roc = -1.0;
  double p_pro = -1.0;
  std::size_t test_samples = 0;
};

struct EvalReport {
  double o_roc = -1.0;   // pooled over all samples
  double p_roc = -1.0;   // pooled over all points
  double p_pro = -1.0;   // regions and negatives pooled over all samples
  double fpr_limit = 0.3;
  std::vector<ClassMetrics> per_class;
  ProCurve pro_curve;                 // pooled PRO curve samples
  std::vector<double> roc_fpr, roc_tpr;  // pooled point-wise ROC samples
};

/// One evaluated sample: object score, per-point scores, ground truth.
struct SampleEval {
  std::string id;
  std::string class_name;
  double object_score = 0.0;
  std::uint8_t object_label = 0;
  std::vector<double> point_scores;
  std::vector<std::uint8_t> point_labels;
  std::vector<int> region_ids;  // from connected_regions on the ground truth
};

EvalReport evaluate(const std::vector<SampleEval>& samples, double fpr_limit);

/// CSV dump of (class, normalized score, label) with per-class min-max
/// normalization; a zero score range normalizes to 0.
void score_distribution_dump(const std::vector<SampleEval>& samples,
                             const std::filesystem::path& path,
                             const std::string& comment = "");

}  // namespace glfm
