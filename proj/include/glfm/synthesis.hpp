#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "glfm/geometry.hpp"
#include "glfm/rng.hpp"

namespace glfm {

struct SynthesisConfig {
  enum class Ramp { literal, inverted };

  int k_normal = 16;                 // neighbor count for normal estimation
  double c_frac_lo = 0.01;           // C ~ U(c_frac_lo * n, c_frac_hi * n)
  double c_frac_hi = 0.02;
  double axis_weight_lo = 0.8;       // dx, dy, dz ~ U(lo, hi)
  double axis_weight_hi = 1.2;
  double protrusion_prob = 0.5;      // P(dir = +1)
  int defects_per_cloud = 1;
  Ramp ramp = Ramp::literal;         // literal: offset ~ j/C; inverted: (C+1-j)/C

  void validate() const;
};

/// Everything needed to replay one defect bit-exactly.
struct DefectRecord {
  std::size_t ref_index = 0;
  std::size_t c = 0;                      // number of stretched points
  int dir = 1;                            // +1 protrusion, -1 depression
  std::array<double, 3> weights{};        // dx, dy, dz used for the search
  std::array<double, 3> normal{};         // oriented unit normal actually used
  bool degenerate_normal = false;
  double rho = 0.0;                       // local density (Euclidean)
  std::vector<std::size_t> displaced;     // point indices in rank order j=1..C
};

struct SyntheticSample {
  PointCloud cloud;                       // stretched; mask marks displaced points
  std::vector<DefectRecord> defects;
  std::uint64_t seed = 0;
};

struct NormalEstimate {
  Vec3 normal;        // unit length
  bool degenerate;    // rank < 2 neighborhood, +z fallback used
};

/// PCA normal of the k_normal nearest neighbors of the reference point
/// (reference excluded). The sign points away from the whole-cloud centroid;
/// when that projection is within 1e-9 of zero the sign falls back to
/// positive z, then y, then x component.
NormalEstimate estimate_normal(const PointCloud& cloud, std::size_t ref_index,
                               int k_normal);

/// Distance between the first and second nearest neighbors of the reference
/// point (as written in the source procedure, not from the reference itself),
/// ties broken by smaller index.
double local_density(const PointCloud& cloud, std::size_t ref_index);

/// Stretches defects_per_cloud anisotropic neighborhoods along estimated
/// normals. Defects apply sequentially on the already-modified cloud; the
/// mask is the union of displaced index sets.
SyntheticSample synthesize_anomaly(const PointCloud& cloud, const SynthesisConfig& config,
                                   SeededRng& rng);

/// Re-applies recorded defects to the source cloud. Bit-identical to the
/// original synthesis output when fed its own provenance.
PointCloud replay_defects(const PointCloud& source, const std::vector<DefectRecord>& defects,
                          SynthesisConfig::Ramp ramp);

}  // namespace glfm
