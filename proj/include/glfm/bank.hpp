#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "glfm/features.hpp"
#include "glfm/matrix.hpp"
#include "glfm/rng.hpp"

namespace glfm {

struct Normalizer {
  std::vector<double> mean;
  std::vector<double> stddev;  // strictly positive per dimension

  void apply(Matrix& rows) const;
  void apply(std::vector<double>& vec) const;
};

/// Training statistics used by optional score fusion at detect time.
struct FusionStats {
  double dist_mean = 0.0;
  double dist_std = 1.0;
  double logit_mean = 0.0;
  double logit_std = 1.0;
};

/// Persisted Stage-II artifact: K global cluster centers, K local coreset
/// banks, and normalization metadata.
struct GlfmModel {
  Matrix centers;                       // K x D
  std::vector<Matrix> banks;            // K banks, each non-empty
  std::optional<Normalizer> normalizer;
  std::string extractor_id;
  double coreset_fraction = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::optional<FusionStats> fusion;
  std::vector<std::uint32_t> bank_source_counts;  // routed rows before coreset
  std::uint32_t train_sample_count = 0;

  std::size_t k() const { return centers.rows; }
  std::size_t dim() const { return centers.cols; }
  void validate() const;
};

struct KmeansResult {
  Matrix centers;                    // K x D
  std::vector<std::size_t> assignment;
  std::vector<double> sse_trace;     // within-cluster SSE after each iteration
};

/// Lloyd's algorithm with k-means++ seeding from the rng. Runs until the
/// assignment reaches a fixpoint or max_iters. Empty clusters are refilled
/// with the point farthest from its assigned center. The SSE trace is
/// non-increasing; a violation beyond rounding slack throws.
KmeansResult kmeans(const Matrix& points, std::size_t k, std::size_t max_iters,
                    SeededRng& rng);

/// Index of the nearest center (Euclidean), ties to the smaller index.
std::size_t assign_cluster(std::span<const double> global, const Matrix& centers);

/// Greedy farthest-first (k-center) selection. First pick is the vector
/// farthest from the set centroid; each next pick maximizes the distance to
/// the nearest picked vector; ties to the smaller index. Returns picks in
/// selection order.
std::vector<std::size_t> build_coreset(const Matrix& vectors, std::size_t target_size);

/// Full Stage-II build: optional z-score normalizer fit on all local rows,
/// k-means over global vectors, routing of each sample's local rows to its
/// cluster bank, and per-bank coreset reduction to ceil(fraction * size).
GlfmModel build_model(const std::vector<FeatureSet>& train_features, std::size_t k,
                      double coreset_fraction, bool normalize, std::uint64_t seed);

/// Model file: magic "GMD1", u32 JSON header length, JSON header, then
/// float32 blocks for centers and each bank.
void save_model(const GlfmModel& model, const std::filesystem::path& path);
GlfmModel load_model(const std::filesystem::path& path);

}  // namespace glfm
