#include "glfm/io_util.hpp"

#include <fstream>
#include <stdexcept>

namespace glfm {

std::string to_hex(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

std::uint32_t ByteReader::u32le() {
  auto s = take(4);
  return static_cast<std::uint32_t>(s[0]) | (static_cast<std::uint32_t>(s[1]) << 8) |
         (static_cast<std::uint32_t>(s[2]) << 16) | (static_cast<std::uint32_t>(s[3]) << 24);
}

std::uint64_t ByteReader::u64le() {
  std::uint64_t lo = u32le();
  std::uint64_t hi = u32le();
  return lo | (hi << 32);
}

std::basic_string_view<unsigned char> ByteReader::take(std::size_t n) {
  if (off_ + n > bytes_.size()) {
    throw std::runtime_error(context_ + ": truncated input, needed " + std::to_string(n) +
                             " bytes at offset " + std::to_string(off_) + " of " +
                             std::to_string(bytes_.size()));
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes_.data()) + off_;
  off_ += n;
  return {p, n};
}

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw std::runtime_error("read failed on " + path.string());
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed on " + path.string());
}

}  // namespace glfm
