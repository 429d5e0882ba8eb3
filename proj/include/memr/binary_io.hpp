#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Little-endian binary primitives shared by the parameter blob format and the
// checkpoint container.

namespace memr::io {

inline void write_bytes(std::ostream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void read_bytes(std::istream& is, void* p, std::size_t n, const char* what) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n) {
    throw std::runtime_error(std::string("truncated read: ") + what);
  }
}

inline void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  write_bytes(os, b, 4);
}

inline std::uint32_t read_u32(std::istream& is, const char* what = "u32") {
  unsigned char b[4];
  read_bytes(is, b, 4, what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

inline void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  write_bytes(os, b, 8);
}

inline std::uint64_t read_u64(std::istream& is, const char* what = "u64") {
  unsigned char b[8];
  read_bytes(is, b, 8, what);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

inline void write_i64(std::ostream& os, std::int64_t v) {
  write_u64(os, static_cast<std::uint64_t>(v));
}

inline std::int64_t read_i64(std::istream& is, const char* what = "i64") {
  return static_cast<std::int64_t>(read_u64(is, what));
}

inline void write_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  write_u64(os, bits);
}

inline double read_f64(std::istream& is, const char* what = "f64") {
  const std::uint64_t bits = read_u64(is, what);
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

inline void write_string(std::ostream& os, const std::string& s) {
  write_u64(os, s.size());
  write_bytes(os, s.data(), s.size());
}

inline std::string read_string(std::istream& is, const char* what = "string") {
  const std::uint64_t n = read_u64(is, what);
  std::string s(n, '\0');
  read_bytes(is, s.data(), n, what);
  return s;
}

inline void write_f64_vec(std::ostream& os, std::span<const double> v) {
  write_u64(os, v.size());
  for (double x : v) write_f64(os, x);
}

inline std::vector<double> read_f64_vec(std::istream& is, const char* what = "f64 vector") {
  const std::uint64_t n = read_u64(is, what);
  std::vector<double> v(n);
  for (auto& x : v) x = read_f64(is, what);
  return v;
}

}  // namespace memr::io
