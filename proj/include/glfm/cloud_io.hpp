#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>

#include "glfm/geometry.hpp"

namespace glfm {

enum class CloudFormat { ply_ascii, ply_binary_le, xyz };

/// Malformed input; the message names the file and the line (ASCII) or byte
/// offset (binary) where parsing stopped.
class parse_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads vertex positions in file order. PLY properties other than x, y, z
/// are skipped; an integer property named "anomaly" populates the mask.
PointCloud read_cloud(const std::filesystem::path& path, CloudFormat format);

/// Format detected from the PLY header line or the file extension.
PointCloud read_cloud(const std::filesystem::path& path);

/// Binary-LE round-trips bit-exactly (double precision properties); ASCII
/// keeps 9 significant digits. An optional comment line is embedded in the
/// header (PLY "comment ...", XYZ "# ..." first line).
void write_cloud(const PointCloud& cloud, const std::filesystem::path& path,
                 CloudFormat format, const std::string& comment = "");

/// PLY with an extra float32 "score" vertex property; used by detect output.
void write_scored_cloud(const PointCloud& cloud, std::span<const float> scores,
                        const std::filesystem::path& path, CloudFormat format,
                        const std::string& comment = "");

}  // namespace glfm
