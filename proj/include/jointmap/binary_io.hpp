#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "jointmap/error.hpp"

namespace jointmap::binary {

// Little-endian primitives, independent of host byte order.

inline void write_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(bytes, 8);
}

inline void write_f64(std::ostream& out, double v) { write_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline void write_string(std::ostream& out, std::string_view s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline void write_magic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

inline std::uint64_t read_u64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw FileError("unexpected end of file");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

inline double read_f64(std::istream& in) { return std::bit_cast<double>(read_u64(in)); }

inline std::string read_string(std::istream& in, std::uint64_t max_len = 1u << 20) {
  const auto n = read_u64(in);
  if (n > max_len) throw FileError("string length " + std::to_string(n) + " exceeds limit");
  std::string s(n, '\0');
  if (n && !in.read(s.data(), static_cast<std::streamsize>(n))) throw FileError("unexpected end of file");
  return s;
}

inline void expect_magic(std::istream& in, std::string_view magic) {
  std::string got(magic.size(), '\0');
  if (!in.read(got.data(), static_cast<std::streamsize>(got.size())) || got != magic) {
    throw FileError("bad magic: expected " + std::string(magic));
  }
}

}  // namespace jointmap::binary
