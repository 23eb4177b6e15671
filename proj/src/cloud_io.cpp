#include "glfm/cloud_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <optional>
#include <sstream>
#include <vector>

#include "glfm/io_util.hpp"

namespace glfm {

namespace {

enum class PropType { i8, u8, i16, u16, i32, u32, f32, f64 };

std::size_t prop_size(PropType t) {
  switch (t) {
    case PropType::i8:
    case PropType::u8:
      return 1;
    case PropType::i16:
    case PropType::u16:
      return 2;
    case PropType::i32:
    case PropType::u32:
    case PropType::f32:
      return 4;
    case PropType::f64:
      return 8;
  }
  return 0;
}

bool is_integer_type(PropType t) { return t != PropType::f32 && t != PropType::f64; }

std::optional<PropType> parse_prop_type(const std::string& s) {
  if (s == "char" || s == "int8") return PropType::i8;
  if (s == "uchar" || s == "uint8") return PropType::u8;
  if (s == "short" || s == "int16") return PropType::i16;
  if (s == "ushort" || s == "uint16") return PropType::u16;
  if (s == "int" || s == "int32") return PropType::i32;
  if (s == "uint" || s == "uint32") return PropType::u32;
  if (s == "float" || s == "float32") return PropType::f32;
  if (s == "double" || s == "float64") return PropType::f64;
  return std::nullopt;
}

struct PlyProperty {
  std::string name;
  PropType type = PropType::f32;
  bool is_list = false;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> props;

  bool fixed_size() const {
    return std::none_of(props.begin(), props.end(),
                        [](const PlyProperty& p) { return p.is_list; });
  }
  std::size_t row_bytes() const {
    std::size_t n = 0;
    for (const auto& p : props) n += prop_size(p.type);
    return n;
  }
};

struct PlyHeader {
  bool binary = false;
  std::vector<PlyElement> elements;
  std::size_t body_offset = 0;  // byte offset just past end_header newline
  std::size_t header_lines = 0;
};

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
  throw parse_error(path.string() + ": " + what);
}

std::vector<std::string> split_tokens(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

PlyHeader parse_ply_header(const std::string& bytes, const std::filesystem::path& path) {
  PlyHeader hdr;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool saw_format = false;
  bool done = false;

  auto next_line = [&]() -> std::string {
    if (pos >= bytes.size()) fail(path, "unexpected end of header at line " + std::to_string(line_no));
    std::size_t nl = bytes.find('\n', pos);
    std::size_t end = (nl == std::string::npos) ? bytes.size() : nl;
    std::string line = bytes.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = (nl == std::string::npos) ? bytes.size() : nl + 1;
    ++line_no;
    return line;
  };

  std::string magic = next_line();
  if (magic != "ply") fail(path, "line 1: not a PLY file (missing 'ply' magic)");

  while (!done) {
    std::string line = next_line();
    auto toks = split_tokens(line);
    if (toks.empty() || toks[0] == "comment" || toks[0] == "obj_info") continue;
    if (toks[0] == "format") {
      if (toks.size() < 2) fail(path, "line " + std::to_string(line_no) + ": malformed format line");
      if (toks[1] == "ascii") {
        hdr.binary = false;
      } else if (toks[1] == "binary_little_endian") {
        hdr.binary = true;
      } else {
        fail(path, "line " + std::to_string(line_no) + ": unsupported format '" + toks[1] + "'");
      }
      saw_format = true;
    } else if (toks[0] == "element") {
      if (toks.size() != 3) fail(path, "line " + std::to_string(line_no) + ": malformed element line");
      PlyElement el;
      el.name = toks[1];
      try {
        el.count = std::stoull(toks[2]);
      } catch (...) {
        fail(path, "line " + std::to_string(line_no) + ": bad element count '" + toks[2] + "'");
      }
      hdr.elements.push_back(std::move(el));
    } else if (toks[0] == "property") {
      if (hdr.elements.empty()) {
        fail(path, "line " + std::to_string(line_no) + ": property before any element");
      }
      PlyProperty prop;
      if (toks.size() >= 2 && toks[1] == "list") {
        if (toks.size() != 5) fail(path, "line " + std::to_string(line_no) + ": malformed list property");
        prop.is_list = true;
        prop.name = toks[4];
      } else {
        if (toks.size() != 3) fail(path, "line " + std::to_string(line_no) + ": malformed property line");
        auto t = parse_prop_type(toks[1]);
        if (!t) fail(path, "line " + std::to_string(line_no) + ": unknown property type '" + toks[1] + "'");
        prop.type = *t;
        prop.name = toks[2];
      }
      hdr.elements.back().props.push_back(std::move(prop));
    } else if (toks[0] == "end_header") {
      done = true;
    } else {
      fail(path, "line " + std::to_string(line_no) + ": unrecognized header keyword '" + toks[0] + "'");
    }
  }
  if (!saw_format) fail(path, "header has no format line");
  hdr.body_offset = pos;
  hdr.header_lines = line_no;
  return hdr;
}

double decode_scalar(ByteReader& r, PropType t) {
  switch (t) {
    case PropType::i8:
      return static_cast<double>(static_cast<std::int8_t>(r.u8()));
    case PropType::u8:
      return static_cast<double>(r.u8());
    case PropType::i16: {
      std::uint16_t v = static_cast<std::uint16_t>(r.u8()) |
                        (static_cast<std::uint16_t>(r.u8()) << 8);
      return static_cast<double>(static_cast<std::int16_t>(v));
    }
    case PropType::u16: {
      std::uint16_t v = static_cast<std::uint16_t>(r.u8()) |
                        (static_cast<std::uint16_t>(r.u8()) << 8);
      return static_cast<double>(v);
    }
    case PropType::i32:
      return static_cast<double>(static_cast<std::int32_t>(r.u32le()));
    case PropType::u32:
      return static_cast<double>(r.u32le());
    case PropType::f32:
      return static_cast<double>(r.f32le());
    case PropType::f64:
      return r.f64le();
  }
  return 0.0;
}

double parse_ascii_number(const std::string& tok, const std::filesystem::path& path,
                          std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    fail(path, "line " + std::to_string(line_no) + ": bad number '" + tok + "'");
  }
  return v;
}

PointCloud read_ply(const std::string& bytes, const std::filesystem::path& path) {
  PlyHeader hdr = parse_ply_header(bytes, path);

  std::size_t vertex_pos = hdr.elements.size();
  for (std::size_t i = 0; i < hdr.elements.size(); ++i) {
    if (hdr.elements[i].name == "vertex") {
      vertex_pos = i;
      break;
    }
  }
  if (vertex_pos == hdr.elements.size()) fail(path, "no vertex element in header");
  const PlyElement& vertex = hdr.elements[vertex_pos];

  int ix = -1, iy = -1, iz = -1, imask = -1;
  for (std::size_t p = 0; p < vertex.props.size(); ++p) {
    const PlyProperty& prop = vertex.props[p];
    if (prop.is_list) fail(path, "list property '" + prop.name + "' on vertex element is unsupported");
    if (prop.name == "x") ix = static_cast<int>(p);
    if (prop.name == "y") iy = static_cast<int>(p);
    if (prop.name == "z") iz = static_cast<int>(p);
    if (prop.name == "anomaly") {
      if (!is_integer_type(prop.type)) {
        fail(path, "vertex property 'anomaly' must be an integer type");
      }
      imask = static_cast<int>(p);
    }
  }
  if (ix < 0 || iy < 0 || iz < 0) fail(path, "vertex element lacks x/y/z properties");

  PointCloud cloud;
  cloud.points.reserve(vertex.count);
  if (imask >= 0) cloud.mask.reserve(vertex.count);

  auto check_finite = [&](const Vec3& p, const std::string& where) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      fail(path, where + ": non-finite coordinate");
    }
  };
  auto check_mask = [&](double m, const std::string& where) -> std::uint8_t {
    if (m != 0.0 && m != 1.0) fail(path, where + ": anomaly value must be 0 or 1");
    return static_cast<std::uint8_t>(m);
  };

  if (hdr.binary) {
    ByteReader r(std::string_view(bytes).substr(hdr.body_offset), path.string());
    // Elements ahead of vertex must be fixed-size to be skippable.
    for (std::size_t e = 0; e < vertex_pos; ++e) {
      const PlyElement& el = hdr.elements[e];
      if (!el.fixed_size()) {
        fail(path, "element '" + el.name + "' with list properties precedes vertex data");
      }
      r.skip(el.count * el.row_bytes());
    }
    for (std::size_t i = 0; i < vertex.count; ++i) {
      std::size_t row_off = hdr.body_offset + r.offset();
      Vec3 pt;
      double mask_val = 0.0;
      try {
        for (std::size_t p = 0; p < vertex.props.size(); ++p) {
          double v = decode_scalar(r, vertex.props[p].type);
          if (static_cast<int>(p) == ix) pt.x = v;
          if (static_cast<int>(p) == iy) pt.y = v;
          if (static_cast<int>(p) == iz) pt.z = v;
          if (static_cast<int>(p) == imask) mask_val = v;
        }
      } catch (const std::runtime_error& e) {
        fail(path, "vertex " + std::to_string(i) + " truncated at byte offset " +
                       std::to_string(row_off) + " (declared count " +
                       std::to_string(vertex.count) + ")");
      }
      std::string where = "vertex " + std::to_string(i) + " at byte offset " +
                          std::to_string(row_off);
      check_finite(pt, where);
      cloud.points.push_back(pt);
      if (imask >= 0) cloud.mask.push_back(check_mask(mask_val, where));
    }
    // Trailing elements are ignored.
  } else {
    std::size_t pos = hdr.body_offset;
    std::size_t line_no = hdr.header_lines;
    auto next_data_line = [&]() -> std::optional<std::pair<std::string, std::size_t>> {
      while (pos < bytes.size()) {
        std::size_t nl = bytes.find('\n', pos);
        std::size_t end = (nl == std::string::npos) ? bytes.size() : nl;
        std::string line = bytes.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        pos = (nl == std::string::npos) ? bytes.size() : nl + 1;
        ++line_no;
        if (!line.empty() && line.find_first_not_of(" \t") != std::string::npos) {
          return std::make_pair(line, line_no);
        }
      }
      return std::nullopt;
    };

    for (std::size_t e = 0; e < vertex_pos; ++e) {
      for (std::size_t i = 0; i < hdr.elements[e].count; ++i) {
        if (!next_data_line()) fail(path, "element '" + hdr.elements[e].name + "' row " +
                                              std::to_string(i) + " missing");
      }
    }
    for (std::size_t i = 0; i < vertex.count; ++i) {
      auto line = next_data_line();
      if (!line) {
        fail(path, "vertex count mismatch: declared " + std::to_string(vertex.count) +
                       ", file ends after " + std::to_string(i) + " vertices");
      }
      auto toks = split_tokens(line->first);
      if (toks.size() < vertex.props.size()) {
        fail(path, "line " + std::to_string(line->second) + ": expected " +
                       std::to_string(vertex.props.size()) + " values, found " +
                       std::to_string(toks.size()));
      }
      Vec3 pt;
      double mask_val = 0.0;
      for (std::size_t p = 0; p < vertex.props.size(); ++p) {
        double v = parse_ascii_number(toks[p], path, line->second);
        if (static_cast<int>(p) == ix) pt.x = v;
        if (static_cast<int>(p) == iy) pt.y = v;
        if (static_cast<int>(p) == iz) pt.z = v;
        if (static_cast<int>(p) == imask) mask_val = v;
      }
      std::string where = "line " + std::to_string(line->second);
      check_finite(pt, where);
      cloud.points.push_back(pt);
      if (imask >= 0) cloud.mask.push_back(check_mask(mask_val, where));
    }
  }
  return cloud;
}

PointCloud read_xyz(const std::string& bytes, const std::filesystem::path& path) {
  PointCloud cloud;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  int columns = 0;  // fixed by the first data line (3 or 4)
  while (pos < bytes.size()) {
    std::size_t nl = bytes.find('\n', pos);
    std::size_t end = (nl == std::string::npos) ? bytes.size() : nl;
    std::string line = bytes.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = (nl == std::string::npos) ? bytes.size() : nl + 1;
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line[line.find_first_not_of(" \t")] == '#') continue;

    auto toks = split_tokens(line);
    if (toks.size() != 3 && toks.size() != 4) {
      fail(path, "line " + std::to_string(line_no) + ": expected 3 or 4 columns, found " +
                     std::to_string(toks.size()));
    }
    if (columns == 0) {
      columns = static_cast<int>(toks.size());
    } else if (static_cast<int>(toks.size()) != columns) {
      fail(path, "line " + std::to_string(line_no) + ": inconsistent column count");
    }
    Vec3 pt{parse_ascii_number(toks[0], path, line_no),
            parse_ascii_number(toks[1], path, line_no),
            parse_ascii_number(toks[2], path, line_no)};
    if (!std::isfinite(pt.x) || !std::isfinite(pt.y) || !std::isfinite(pt.z)) {
      fail(path, "line " + std::to_string(line_no) + ": non-finite coordinate");
    }
    cloud.points.push_back(pt);
    if (columns == 4) {
      double m = parse_ascii_number(toks[3], path, line_no);
      if (m != 0.0 && m != 1.0) {
        fail(path, "line " + std::to_string(line_no) + ": mask value must be 0 or 1");
      }
      cloud.mask.push_back(static_cast<std::uint8_t>(m));
    }
  }
  return cloud;
}

std::string format_g9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string ply_header_text(const PointCloud& cloud, bool binary, bool with_score,
                            const std::string& comment) {
  std::string h = "ply\n";
  h += binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n";
  if (!comment.empty()) h += "comment " + comment + "\n";
  h += "element vertex " + std::to_string(cloud.size()) + "\n";
  h += "property double x\n";
  h += "property double y\n";
  h += "property double z\n";
  if (cloud.has_mask()) h += "property uchar anomaly\n";
  if (with_score) h += "property float score\n";
  h += "end_header\n";
  return h;
}

std::string encode_ply(const PointCloud& cloud, bool binary, const float* scores,
                       const std::string& comment) {
  std::string out = ply_header_text(cloud, binary, scores != nullptr, comment);
  if (binary) {
    out.reserve(out.size() + cloud.size() * 26);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      put_f64le(out, cloud.points[i].x);
      put_f64le(out, cloud.points[i].y);
      put_f64le(out, cloud.points[i].z);
      if (cloud.has_mask()) out.push_back(static_cast<char>(cloud.mask[i]));
      if (scores) put_f32le(out, scores[i]);
    }
  } else {
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      out += format_g9(cloud.points[i].x);
      out += ' ';
      out += format_g9(cloud.points[i].y);
      out += ' ';
      out += format_g9(cloud.points[i].z);
      if (cloud.has_mask()) out += cloud.mask[i] ? " 1" : " 0";
      if (scores) {
        out += ' ';
        out += format_g9(static_cast<double>(scores[i]));
      }
      out += '\n';
    }
  }
  return out;
}

std::string encode_xyz(const PointCloud& cloud, const std::string& comment) {
  std::string out;
  if (!comment.empty()) out += "# " + comment + "\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    out += format_g9(cloud.points[i].x);
    out += ' ';
    out += format_g9(cloud.points[i].y);
    out += ' ';
    out += format_g9(cloud.points[i].z);
    if (cloud.has_mask()) out += cloud.mask[i] ? " 1" : " 0";
    out += '\n';
  }
  return out;
}

}  // namespace

PointCloud read_cloud(const std::filesystem::path& path, CloudFormat format) {
  std::string bytes = read_file_bytes(path);
  PointCloud cloud;
  if (format == CloudFormat::xyz) {
    cloud = read_xyz(bytes, path);
  } else {
    cloud = read_ply(bytes, path);
    // The header, not the caller, decides ascii vs binary; a mismatch with
    // the requested format is accepted as long as the file parses.
  }
  cloud.id = path.stem().string();
  return cloud;
}

PointCloud read_cloud(const std::filesystem::path& path) {
  std::string bytes = read_file_bytes(path);
  PointCloud cloud;
  if (bytes.rfind("ply", 0) == 0) {
    cloud = read_ply(bytes, path);
  } else if (path.extension() == ".xyz" || path.extension() == ".txt") {
    cloud = read_xyz(bytes, path);
  } else {
    fail(path, "unrecognized cloud format (no 'ply' magic and extension is not .xyz)");
  }
  cloud.id = path.stem().string();
  return cloud;
}

void write_cloud(const PointCloud& cloud, const std::filesystem::path& path,
                 CloudFormat format, const std::string& comment) {
  cloud.validate();
  std::string bytes;
  switch (format) {
    case CloudFormat::ply_ascii:
      bytes = encode_ply(cloud, false, nullptr, comment);
      break;
    case CloudFormat::ply_binary_le:
      bytes = encode_ply(cloud, true, nullptr, comment);
      break;
    case CloudFormat::xyz:
      bytes = encode_xyz(cloud, comment);
      break;
  }
  write_file_bytes(path, bytes);
}

void write_scored_cloud(const PointCloud& cloud, std::span<const float> scores,
                        const std::filesystem::path& path, CloudFormat format,
                        const std::string& comment) {
  cloud.validate();
  if (scores.size() != cloud.size()) {
    throw std::invalid_argument("write_scored_cloud: score count != point count");
  }
  if (format == CloudFormat::xyz) {
    throw std::invalid_argument("write_scored_cloud: xyz format cannot carry scores");
  }
  std::string bytes =
      encode_ply(cloud, format == CloudFormat::ply_binary_le, scores.data(), comment);
  write_file_bytes(path, bytes);
}

}  // namespace glfm
