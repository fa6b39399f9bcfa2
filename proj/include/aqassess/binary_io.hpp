// Copyright 2026  aqassess authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "aqassess/error.hpp"

namespace aqassess::io {

// Little-endian primitives for the on-disk formats.

inline void put_u8(std::ostream& os, std::uint8_t v) { os.put(static_cast<char>(v)); }

template <typename U>
void put_le(std::ostream& os, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u16(std::ostream& os, std::uint16_t v) { put_le(os, v); }
inline void put_u32(std::ostream& os, std::uint32_t v) { put_le(os, v); }
inline void put_u64(std::ostream& os, std::uint64_t v) { put_le(os, v); }
inline void put_f32(std::ostream& os, float v) { put_u32(os, std::bit_cast<std::uint32_t>(v)); }

inline void put_str(std::ostream& os, const std::string& s) {
  put_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline void need(std::istream& is, const char* what) {
  if (!is) throw DataError(std::string("truncated input while reading ") + what);
}

inline std::uint8_t get_u8(std::istream& is) {
  const int c = is.get();
  need(is, "u8");
  return static_cast<std::uint8_t>(c);
}

template <typename U>
U get_le(std::istream& is) {
  unsigned char b[sizeof(U)];
  is.read(reinterpret_cast<char*>(b), sizeof(U));
  need(is, "integer");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(b[i]) << (8 * i);
  return v;
}

inline std::uint16_t get_u16(std::istream& is) { return get_le<std::uint16_t>(is); }
inline std::uint32_t get_u32(std::istream& is) { return get_le<std::uint32_t>(is); }
inline std::uint64_t get_u64(std::istream& is) { return get_le<std::uint64_t>(is); }
inline float get_f32(std::istream& is) { return std::bit_cast<float>(get_u32(is)); }

inline std::string get_str(std::istream& is, std::size_t max_len = 1u << 24) {
  const std::uint32_t n = get_u32(is);
  if (n > max_len) throw DataError("string field too long");
  std::string s(n, '\0');
  is.read(s.data(), n);
  need(is, "string");
  return s;
}

inline void expect_magic(std::istream& is, const char (&magic)[5], const char* what) {
  char b[4];
  is.read(b, 4);
  if (!is || std::memcmp(b, magic, 4) != 0)
    throw DataError(std::string("not a ") + what + " file (bad magic)");
}

}  // namespace aqassess::io
