#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>

namespace glfm {

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t v);

// Little-endian scalar append/read, independent of host byte order.

inline void put_u32le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u64le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f32le(std::string& out, float v) {
  put_u32le(out, std::bit_cast<std::uint32_t>(v));
}

inline void put_f64le(std::string& out, double v) {
  put_u64le(out, std::bit_cast<std::uint64_t>(v));
}

/// Sequential reader over an in-memory byte buffer. Out-of-bounds reads
/// throw with the current byte offset.
class ByteReader {
 public:
  ByteReader(std::string_view bytes, std::string context)
      : bytes_(bytes), context_(std::move(context)) {}

  std::size_t offset() const { return off_; }
  std::size_t remaining() const { return bytes_.size() - off_; }
  bool done() const { return off_ == bytes_.size(); }

  std::uint8_t u8() { return take(1)[0]; }
  std::uint32_t u32le();
  std::uint64_t u64le();
  float f32le() { return std::bit_cast<float>(u32le()); }
  double f64le() { return std::bit_cast<double>(u64le()); }
  std::string_view raw(std::size_t n) {
    auto s = take(n);
    return {reinterpret_cast<const char*>(s.data()), n};
  }
  void skip(std::size_t n) { take(n); }

 private:
  std::basic_string_view<unsigned char> take(std::size_t n);

  std::string_view bytes_;
  std::string context_;
  std::size_t off_ = 0;
};

std::string read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::string_view bytes);

}  // namespace glfm
