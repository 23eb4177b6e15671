#include "glfm/features.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "glfm/io_util.hpp"
#include "glfm/nn_index.hpp"
#include "glfm/parallel.hpp"

namespace glfm {

void FeatureSet::validate() const {
  if (local.rows == 0 || local.cols == 0) {
    throw std::invalid_argument("FeatureSet: empty local feature matrix");
  }
  if (centers.size() != local.rows) {
    throw std::invalid_argument("FeatureSet: center count != local row count");
  }
  if (global.size() != local.cols) {
    throw std::invalid_argument("FeatureSet: global dimension != local column count");
  }
  for (double v : local.data) {
    if (!std::isfinite(v)) throw std::invalid_argument("FeatureSet: non-finite local entry");
  }
  std::vector<double> mean = pool_global(local);
  for (std::size_t d = 0; d < mean.size(); ++d) {
    double scale = std::max({std::abs(mean[d]), std::abs(global[d]), 1e-30});
    if (std::abs(mean[d] - global[d]) > 1e-9 * scale) {
      throw std::invalid_argument("FeatureSet: global vector is not the mean of local rows");
    }
  }
}

std::vector<double> pool_global(const Matrix& local) {
  if (local.rows == 0) throw std::invalid_argument("pool_global: no rows");
  std::vector<double> mean(local.cols, 0.0);
  for (std::size_t i = 0; i < local.rows; ++i) {
    auto r = local.row(i);
    for (std::size_t d = 0; d < local.cols; ++d) mean[d] += r[d];
  }
  double inv = 1.0 / static_cast<double>(local.rows);
  for (double& v : mean) v *= inv;
  return mean;
}

std::vector<std::size_t> sample_patch_centers(const PointCloud& cloud, std::size_t m,
                                              SeededRng& rng) {
  (void)rng;  // selection is fully deterministic
  const std::size_t n = cloud.size();
  if (m == 0) throw std::invalid_argument("sample_patch_centers: m must be positive");
  if (m > n) {
    throw std::invalid_argument("sample_patch_centers: m = " + std::to_string(m) +
                                " > point count " + std::to_string(n));
  }

  Vec3 centroid = cloud.centroid();
  std::size_t first = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    double d2 = (cloud.points[i] - centroid).squared_norm();
    if (d2 < best) {
      best = d2;
      first = i;
    }
  }

  std::vector<std::size_t> picks;
  picks.reserve(m);
  picks.push_back(first);
  std::vector<double> min_d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    min_d2[i] = (cloud.points[i] - cloud.points[first]).squared_norm();
  }
  while (picks.size() < m) {
    std::size_t next = 0;
    double far = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (min_d2[i] > far) {  // strict: ties keep the smaller index
        far = min_d2[i];
        next = i;
      }
    }
    picks.push_back(next);
    for (std::size_t i = 0; i < n; ++i) {
      double d2 = (cloud.points[i] - cloud.points[next]).squared_norm();
      if (d2 < min_d2[i]) min_d2[i] = d2;
    }
  }
  return picks;
}

double median_nn_spacing(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  if (n < 2) throw std::invalid_argument("median_nn_spacing: need at least 2 points");
  NnIndex index = NnIndex::build(std::span<const Vec3>(cloud.points));
  std::vector<double> spacing(n);
  parallel_for(n, [&](std::size_t i) {
    auto hits = index.knn(cloud.points[i], 2);  // self plus nearest other
    spacing[i] = hits[0].index == i ? hits[1].distance : hits[0].distance;
  });
  std::sort(spacing.begin(), spacing.end());
  if (n % 2 == 1) return spacing[n / 2];
  return 0.5 * (spacing[n / 2 - 1] + spacing[n / 2]);
}

namespace {

constexpr std::size_t kBins = 11;  // per angle feature, 3 features -> 33

// Unoriented per-point PCA normals; the pair angles below fold out the sign,
// so no consistent orientation pass is needed.
std::vector<Vec3> batch_normals(const PointCloud& cloud, const NnIndex& index) {
  const std::size_t n = cloud.size();
  const std::size_t k = std::min<std::size_t>(16, n - 1);
  std::vector<Vec3> normals(n);
  parallel_for(n, [&](std::size_t i) {
    auto hits = index.knn(cloud.points[i], std::min(k + 1, n));
    Vec3 mean;
    std::size_t cnt = 0;
    for (const Neighbor& h : hits) {
      if (h.index == i) continue;
      mean += cloud.points[h.index];
      ++cnt;
    }
    if (cnt < 2) {
      normals[i] = {0.0, 0.0, 1.0};
      return;
    }
    mean = mean * (1.0 / static_cast<double>(cnt));
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const Neighbor& h : hits) {
      if (h.index == i) continue;
      Vec3 d = cloud.points[h.index] - mean;
      Eigen::Vector3d v(d.x, d.y, d.z);
      cov += v * v.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    if (solver.eigenvalues()[2] <= 0.0 ||
        solver.eigenvalues()[1] <= 1e-12 * solver.eigenvalues()[2]) {
      normals[i] = {0.0, 0.0, 1.0};
      return;
    }
    Eigen::Vector3d v = solver.eigenvectors().col(0);
    normals[i] = Vec3{v.x(), v.y(), v.z()}.normalized();
  });
  return normals;
}

std::size_t angle_bin(double v01) {
  double clamped = std::clamp(v01, 0.0, 1.0);
  auto bin = static_cast<std::size_t>(clamped * static_cast<double>(kBins));
  return std::min(bin, kBins - 1);
}

// Simplified point feature histogram over one neighborhood: three sign-folded
// Darboux angles, 11 bins each, every block normalized to unit mass.
void accumulate_spfh(const PointCloud& cloud, const std::vector<Vec3>& normals,
                     std::size_t center, std::span<const Neighbor> nbrs,
                     std::span<double> hist33) {
  std::fill(hist33.begin(), hist33.end(), 0.0);
  const Vec3& ps = cloud.points[center];
  const Vec3& ns = normals[center];
  std::size_t pairs = 0;
  for (const Neighbor& nb : nbrs) {
    if (nb.index == center || nb.distance <= 0.0) continue;
    Vec3 dhat = (cloud.points[nb.index] - ps) * (1.0 / nb.distance);
    const Vec3& nt = normals[nb.index];
    Vec3 v = dhat.cross(ns);
    double vlen = v.norm();
    if (vlen < 1e-12) continue;  // direction parallel to the source normal
    v = v * (1.0 / vlen);
    double phi = std::abs(ns.dot(dhat));
    double alpha = std::abs(v.dot(nt));
    double theta = std::abs(ns.dot(nt));
    hist33[angle_bin(phi)] += 1.0;
    hist33[kBins + angle_bin(alpha)] += 1.0;
    hist33[2 * kBins + angle_bin(theta)] += 1.0;
    ++pairs;
  }
  if (pairs > 0) {
    double inv = 1.0 / static_cast<double>(pairs);
    for (double& h : hist33) h *= inv;
  }
}

void normalize_blocks(std::span<double> hist33) {
  for (std::size_t b = 0; b < 3; ++b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < kBins; ++i) sum += hist33[b * kBins + i];
    if (sum > 0.0) {
      for (std::size_t i = 0; i < kBins; ++i) hist33[b * kBins + i] /= sum;
    }
  }
}

}  // namespace

FeatureSet extract_local_features(const PointCloud& cloud, const ExtractorConfig& cfg,
                                  SeededRng& rng) {
  if (cfg.kind != ExtractorConfig::Kind::fpfh) {
    throw std::invalid_argument("extract_local_features: external features are loaded, not extracted");
  }
  const std::size_t n = cloud.size();
  if (n < 2) throw std::invalid_argument("extract_local_features: need at least 2 points");

  std::size_t m = cfg.patch_count;
  if (m == 0) m = std::max<std::size_t>(1, std::min<std::size_t>(1024, n / 8));
  double radius = cfg.fpfh_radius > 0.0 ? cfg.fpfh_radius : 5.0 * median_nn_spacing(cloud);

  std::vector<std::size_t> centers = sample_patch_centers(cloud, m, rng);
  NnIndex index = NnIndex::build(std::span<const Vec3>(cloud.points));
  std::vector<Vec3> normals = batch_normals(cloud, index);

  // SPFH at every point; centers then pool their neighbors' histograms.
  std::vector<std::vector<Neighbor>> radius_nbrs(n);
  Matrix spfh(n, kFpfhDim);
  parallel_for(n, [&](std::size_t i) {
    radius_nbrs[i] = index.radius_search(cloud.points[i], radius);
    accumulate_spfh(cloud, normals, i, radius_nbrs[i], spfh.row(i));
  });

  FeatureSet out;
  out.extractor_id = kFpfhExtractorId;
  out.local = Matrix(m, kFpfhDim);
  out.centers.resize(m);
  std::vector<std::uint8_t> empty_center(m, 0);
  parallel_for(m, [&](std::size_t ci) {
    std::size_t pi = centers[ci];
    out.centers[ci] = cloud.points[pi];
    auto row = out.local.row(ci);
    std::copy(spfh.row(pi).begin(), spfh.row(pi).end(), row.begin());

    std::size_t k = 0;
    for (const Neighbor& nb : radius_nbrs[pi]) {
      if (nb.index != pi && nb.distance > 0.0) ++k;
    }
    if (k == 0) {
      empty_center[ci] = 1;
      return;
    }
    double invk = 1.0 / static_cast<double>(k);
    for (const Neighbor& nb : radius_nbrs[pi]) {
      if (nb.index == pi || nb.distance <= 0.0) continue;
      double w = invk / nb.distance;
      auto srow = spfh.row(nb.index);
      for (std::size_t d = 0; d < kFpfhDim; ++d) row[d] += w * srow[d];
    }
    normalize_blocks(row);
  });

  std::size_t empty = 0;
  for (std::uint8_t e : empty_center) empty += e;
  if (2 * empty > m) {
    throw std::runtime_error("extract_local_features: " + std::to_string(empty) + " of " +
                             std::to_string(m) + " patch centers have empty neighborhoods at radius " +
                             std::to_string(radius));
  }

  out.global = pool_global(out.local);
  return out;
}

namespace {
constexpr char kFeatMagic[4] = {'G', 'F', 'T', '1'};
}

void save_features(const FeatureSet& features, const std::filesystem::path& path) {
  const std::size_t m = features.local.rows;
  const std::size_t d = features.local.cols;
  if (features.centers.size() != m) {
    throw std::invalid_argument("save_features: center count mismatch");
  }
  std::string out;
  out.reserve(4 + 8 + 4 * (m * d + 3 * m));
  out.append(kFeatMagic, 4);
  put_u32le(out, static_cast<std::uint32_t>(m));
  put_u32le(out, static_cast<std::uint32_t>(d));
  for (double v : features.local.data) put_f32le(out, static_cast<float>(v));
  for (const Vec3& c : features.centers) {
    put_f32le(out, static_cast<float>(c.x));
    put_f32le(out, static_cast<float>(c.y));
    put_f32le(out, static_cast<float>(c.z));
  }
  write_file_bytes(path, out);
}

FeatureSet load_external_features(const std::filesystem::path& path) {
  std::string bytes = read_file_bytes(path);
  ByteReader r(bytes, path.string());
  std::string_view magic = r.raw(4);
  if (magic != std::string_view(kFeatMagic, 4)) {
    throw std::runtime_error(path.string() + ": bad magic (expected GFT1)");
  }
  std::uint32_t m = r.u32le();
  std::uint32_t d = r.u32le();
  if (m == 0 || d == 0) {
    throw std::runtime_error(path.string() + ": zero row or column count in header");
  }

  FeatureSet out;
  out.extractor_id = kExternalExtractorId;
  out.local = Matrix(m, d);
  for (std::size_t i = 0; i < static_cast<std::size_t>(m) * d; ++i) {
    double v = static_cast<double>(r.f32le());
    if (!std::isfinite(v)) {
      throw std::runtime_error(path.string() + ": non-finite feature at byte offset " +
                               std::to_string(r.offset() - 4));
    }
    out.local.data[i] = v;
  }
  out.centers.resize(m);
  for (std::uint32_t i = 0; i < m; ++i) {
    float x = r.f32le(), y = r.f32le(), z = r.f32le();
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
      throw std::runtime_error(path.string() + ": non-finite center at byte offset " +
                               std::to_string(r.offset() - 12));
    }
    out.centers[i] = {x, y, z};
  }
  if (!r.done()) {
    throw std::runtime_error(path.string() + ": trailing bytes after feature payload (offset " +
                             std::to_string(r.offset()) + ")");
  }
  // Stored globals, if any exporter added them, are not trusted: the global
  // vector is always the row mean.
  out.global = pool_global(out.local);
  return out;
}

}  // namespace glfm
