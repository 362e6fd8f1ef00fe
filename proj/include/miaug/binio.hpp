// Little-endian binary envelope helpers shared by the corpus and checkpoint
// formats. Readers report the byte offset of any malformed field.

#ifndef MIAUG_BINIO_HPP
#define MIAUG_BINIO_HPP

#include <cstdint>
#include <cstring>
#include <string>

#include "miaug/common.hpp"

namespace miaug {

inline constexpr char kFileMagic[6] = {'M', 'I', 'A', 'U', 'G', '1'};

class BinWriter {
 public:
  void raw(const void* data, std::size_t len) {
    const char* p = static_cast<const char*>(data);
    buf_.insert(buf_.end(), p, p + len);
  }
  void u8(std::uint8_t v) { raw(&v, 1); }
  void u32(std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    raw(b, 4);
  }
  void u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    raw(b, 8);
  }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

class BinReader {
 public:
  BinReader(std::string bytes, std::string path)
      : buf_(std::move(bytes)), path_(std::move(path)) {}

  void raw(void* out, std::size_t len, const char* what) {
    check(pos_ + len <= buf_.size(), path_, ": truncated while reading ", what,
          " at byte offset ", pos_);
    std::memcpy(out, buf_.data() + pos_, len);
    pos_ += len;
  }
  std::uint8_t u8(const char* what) {
    std::uint8_t v;
    raw(&v, 1, what);
    return v;
  }
  std::uint32_t u32(const char* what) {
    unsigned char b[4];
    raw(b, 4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }
  std::uint64_t u64(const char* what) {
    unsigned char b[8];
    raw(b, 8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  double f64(const char* what) {
    const std::uint64_t bits = u64(what);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::string str(const char* what) {
    const std::uint32_t len = u32(what);
    check(pos_ + len <= buf_.size(), path_, ": truncated while reading ", what,
          " at byte offset ", pos_);
    std::string s(buf_.data() + pos_, len);
    pos_ += len;
    return s;
  }
  void expect_magic() {
    char magic[6];
    raw(magic, sizeof(magic), "magic");
    check(std::memcmp(magic, kFileMagic, sizeof(kFileMagic)) == 0, path_,
          ": bad magic at byte offset 0");
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return buf_.size() - pos_; }
  const std::string& path() const { return path_; }

 private:
  std::string buf_;
  std::string path_;
  std::size_t pos_ = 0;
};

std::string read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::string& bytes);

// FNV-1a checksum of a file's bytes, hex-encoded.
std::string file_checksum(const std::string& path);

}  // namespace miaug

#endif  // MIAUG_BINIO_HPP
