#pragma once

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "medtweet/errors.hpp"

namespace medtweet::detail {

// Explicit little-endian (de)serialization so binary files are byte-identical
// across hosts.

inline void put_u32_le(std::ostream& out, std::uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
               static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(b, 4);
}

inline void put_u64_le(std::ostream& out, std::uint64_t v) {
  put_u32_le(out, static_cast<std::uint32_t>(v & 0xFFFFFFFFULL));
  put_u32_le(out, static_cast<std::uint32_t>(v >> 32));
}

inline std::uint32_t get_u32_le(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw io_error("unexpected end of binary file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline std::uint64_t get_u64_le(std::istream& in) {
  std::uint64_t lo = get_u32_le(in);
  std::uint64_t hi = get_u32_le(in);
  return lo | (hi << 32);
}

inline void write_f32_le(std::ostream& out, const float* data, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) put_u32_le(out, std::bit_cast<std::uint32_t>(data[i]));
}

inline std::vector<float> read_f32_le(std::istream& in, std::size_t n) {
  std::vector<float> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::bit_cast<float>(get_u32_le(in));
  return out;
}

inline void write_f64_le(std::ostream& out, const double* data, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) put_u64_le(out, std::bit_cast<std::uint64_t>(data[i]));
}

inline std::vector<double> read_f64_le(std::istream& in, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::bit_cast<double>(get_u64_le(in));
  return out;
}

}  // namespace medtweet::detail
