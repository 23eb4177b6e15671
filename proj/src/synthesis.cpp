#include "glfm/synthesis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "glfm/nn_index.hpp"

namespace glfm {

void SynthesisConfig::validate() const {
  if (k_normal < 3) throw std::invalid_argument("synthesis: k_normal must be >= 3");
  if (!(c_frac_lo > 0.0) || c_frac_hi < c_frac_lo) {
    throw std::invalid_argument("synthesis: need 0 < c_frac_lo <= c_frac_hi");
  }
  if (!(axis_weight_lo > 0.0) || axis_weight_hi < axis_weight_lo) {
    throw std::invalid_argument("synthesis: need 0 < axis_weight_lo <= axis_weight_hi");
  }
  if (protrusion_prob < 0.0 || protrusion_prob > 1.0) {
    throw std::invalid_argument("synthesis: protrusion_prob must be in [0,1]");
  }
  if (defects_per_cloud < 1) throw std::invalid_argument("synthesis: defects_per_cloud >= 1");
}

namespace {

// k nearest neighbors of the reference point, the reference itself removed.
std::vector<Neighbor> neighbors_of(const NnIndex& index, const PointCloud& cloud,
                                   std::size_t ref_index, std::size_t k) {
  auto hits = index.knn(cloud.points[ref_index], std::min(k + 1, index.size()));
  std::vector<Neighbor> out;
  out.reserve(k);
  for (const Neighbor& h : hits) {
    if (h.index == ref_index) continue;
    out.push_back(h);
    if (out.size() == k) break;
  }
  return out;
}

Vec3 oriented_sign(const Vec3& candidate, const Vec3& outward) {
  double d = candidate.dot(outward);
  if (std::abs(d) > 1e-9) return d >= 0.0 ? candidate : candidate * -1.0;
  // Projection indistinguishable from zero: fall back to a fixed component
  // sign cascade (z, then y, then x) so the choice stays deterministic.
  for (double comp : {candidate.z, candidate.y, candidate.x}) {
    if (std::abs(comp) > 1e-9) return comp > 0.0 ? candidate : candidate * -1.0;
  }
  return candidate;
}

NormalEstimate estimate_normal_indexed(const PointCloud& cloud, const NnIndex& index,
                                       std::size_t ref_index, int k_normal) {
  auto nbrs = neighbors_of(index, cloud, ref_index, static_cast<std::size_t>(k_normal));

  Vec3 mean;
  for (const Neighbor& nb : nbrs) mean += cloud.points[nb.index];
  mean = mean * (1.0 / static_cast<double>(nbrs.size()));

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const Neighbor& nb : nbrs) {
    Vec3 d = cloud.points[nb.index] - mean;
    Eigen::Vector3d v(d.x, d.y, d.z);
    cov += v * v.transpose();
  }

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  const auto& evals = solver.eigenvalues();  // ascending
  // Rank < 2 neighborhood (collinear or coincident): normal undefined.
  if (evals[2] <= 0.0 || evals[1] <= 1e-12 * evals[2]) {
    return NormalEstimate{{0.0, 0.0, 1.0}, true};
  }
  Eigen::Vector3d v = solver.eigenvectors().col(0);  // smallest eigenvalue
  Vec3 normal = Vec3{v.x(), v.y(), v.z()}.normalized();
  Vec3 outward = cloud.points[ref_index] - cloud.centroid();
  double len = outward.norm();
  if (len > 0.0) outward = outward * (1.0 / len);
  return NormalEstimate{oriented_sign(normal, outward), false};
}

double local_density_indexed(const PointCloud& cloud, const NnIndex& index,
                             std::size_t ref_index) {
  auto nbrs = neighbors_of(index, cloud, ref_index, 2);
  if (nbrs.size() < 2) throw std::invalid_argument("local_density: fewer than 2 neighbors");
  return (cloud.points[nbrs[0].index] - cloud.points[nbrs[1].index]).norm();
}

NnIndex build_weighted(const PointCloud& cloud, const std::array<double, 3>& w) {
  Matrix m(cloud.size(), 3);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    m.at(i, 0) = cloud.points[i].x * w[0];
    m.at(i, 1) = cloud.points[i].y * w[1];
    m.at(i, 2) = cloud.points[i].z * w[2];
  }
  return NnIndex::build(m);
}

double ramp_factor(SynthesisConfig::Ramp ramp, std::size_t rank, std::size_t c) {
  double j = static_cast<double>(rank);
  double cd = static_cast<double>(c);
  return ramp == SynthesisConfig::Ramp::literal ? j / cd : (cd + 1.0 - j) / cd;
}

}  // namespace

NormalEstimate estimate_normal(const PointCloud& cloud, std::size_t ref_index, int k_normal) {
  if (cloud.size() <= static_cast<std::size_t>(k_normal)) {
    throw std::invalid_argument("estimate_normal: cloud must have more than k_normal points");
  }
  NnIndex index = NnIndex::build(std::span<const Vec3>(cloud.points));
  return estimate_normal_indexed(cloud, index, ref_index, k_normal);
}

double local_density(const PointCloud& cloud, std::size_t ref_index) {
  if (cloud.size() < 3) throw std::invalid_argument("local_density: need at least 3 points");
  NnIndex index = NnIndex::build(std::span<const Vec3>(cloud.points));
  return local_density_indexed(cloud, index, ref_index);
}

SyntheticSample synthesize_anomaly(const PointCloud& cloud, const SynthesisConfig& config,
                                   SeededRng& rng) {
  config.validate();
  const std::size_t n = cloud.size();
  const double n_d = static_cast<double>(n);
  std::size_t c_upper = static_cast<std::size_t>(std::ceil(config.c_frac_hi * n_d));
  if (n < std::max<std::size_t>(static_cast<std::size_t>(config.k_normal) + 1, c_upper)) {
    throw std::invalid_argument("synthesize_anomaly: cloud too small for config");
  }

  SyntheticSample sample;
  sample.seed = rng.seed();
  sample.cloud = cloud;
  sample.cloud.mask.assign(n, 0);

  for (int defect = 0; defect < config.defects_per_cloud; ++defect) {
    DefectRecord rec;
    rec.ref_index = rng.uniform_u64(n);
    double c_raw = rng.uniform(config.c_frac_lo * n_d, config.c_frac_hi * n_d);
    rec.c = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(c_raw)));
    rec.weights = {rng.uniform(config.axis_weight_lo, config.axis_weight_hi),
                   rng.uniform(config.axis_weight_lo, config.axis_weight_hi),
                   rng.uniform(config.axis_weight_lo, config.axis_weight_hi)};
    rec.dir = rng.bernoulli(config.protrusion_prob) ? 1 : -1;

    // Normal and density come from the current (already stretched) geometry.
    NnIndex plain = NnIndex::build(std::span<const Vec3>(sample.cloud.points));
    NormalEstimate est = estimate_normal_indexed(sample.cloud, plain, rec.ref_index,
                                                 config.k_normal);
    rec.normal = {est.normal.x, est.normal.y, est.normal.z};
    rec.degenerate_normal = est.degenerate;
    rec.rho = local_density_indexed(sample.cloud, plain, rec.ref_index);

    // Neighbor ranks come from the axis-rescaled coordinates; the
    // displacement itself happens in original coordinates.
    NnIndex weighted = build_weighted(sample.cloud, rec.weights);
    Vec3 wq{sample.cloud.points[rec.ref_index].x * rec.weights[0],
            sample.cloud.points[rec.ref_index].y * rec.weights[1],
            sample.cloud.points[rec.ref_index].z * rec.weights[2]};
    auto hits = weighted.knn(wq, std::min(rec.c + 1, n));
    for (const Neighbor& h : hits) {
      if (h.index == rec.ref_index) continue;
      rec.displaced.push_back(h.index);
      if (rec.displaced.size() == rec.c) break;
    }

    double total = rec.rho * static_cast<double>(rec.c);
    Vec3 normal{rec.normal[0], rec.normal[1], rec.normal[2]};
    for (std::size_t j = 1; j <= rec.displaced.size(); ++j) {
      std::size_t pi = rec.displaced[j - 1];
      double offset = static_cast<double>(rec.dir) * total * ramp_factor(config.ramp, j, rec.c);
      sample.cloud.points[pi] += normal * offset;
      sample.cloud.mask[pi] = 1;
    }
    sample.defects.push_back(std::move(rec));
  }
  return sample;
}

PointCloud replay_defects(const PointCloud& source, const std::vector<DefectRecord>& defects,
                          SynthesisConfig::Ramp ramp) {
  PointCloud out = source;
  out.mask.assign(out.size(), 0);
  for (const DefectRecord& rec : defects) {
    double total = rec.rho * static_cast<double>(rec.c);
    Vec3 normal{rec.normal[0], rec.normal[1], rec.normal[2]};
    for (std::size_t j = 1; j <= rec.displaced.size(); ++j) {
      std::size_t pi = rec.displaced[j - 1];
      double offset = static_cast<double>(rec.dir) * total * ramp_factor(ramp, j, rec.c);
      out.points[pi] += normal * offset;
      out.mask[pi] = 1;
    }
  }
  return out;
}

}  // namespace glfm
