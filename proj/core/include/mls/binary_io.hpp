#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

namespace mls::detail {

// Little-endian byte packing, independent of host byte order. All binary
// formats in this project (PLY payload, model files, descriptor tables,
// elevation rasters) go through these helpers.

template <typename T>
inline void store_le(std::uint8_t* out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  if constexpr (std::is_floating_point_v<T>) {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    store_le<U>(out, std::bit_cast<U>(value));
  } else {
    auto u = static_cast<std::make_unsigned_t<T>>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) out[i] = static_cast<std::uint8_t>(u >> (8 * i));
  }
}

template <typename T>
inline T load_le(const std::uint8_t* in) {
  static_assert(std::is_trivially_copyable_v<T>);
  if constexpr (std::is_floating_point_v<T>) {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    return std::bit_cast<T>(load_le<U>(in));
  } else {
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      u |= static_cast<std::make_unsigned_t<T>>(in[i]) << (8 * i);
    return static_cast<T>(u);
  }
}

template <typename T>
inline void write_le(std::ostream& out, T value) {
  std::uint8_t buf[sizeof(T)];
  store_le(buf, value);
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
inline bool read_le(std::istream& in, T& value) {
  std::uint8_t buf[sizeof(T)];
  in.read(reinterpret_cast<char*>(buf), sizeof(T));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(T))) return false;
  value = load_le<T>(buf);
  return true;
}

inline void write_string(std::ostream& out, const std::string& s) {
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline bool read_string(std::istream& in, std::string& s, std::uint32_t max_len = 1u << 20) {
  std::uint32_t n = 0;
  if (!read_le(in, n) || n > max_len) return false;
  s.resize(n);
  in.read(s.data(), n);
  return in.gcount() == static_cast<std::streamsize>(n);
}

}  // namespace mls::detail
