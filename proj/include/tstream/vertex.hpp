#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace tstream {

/// MurmurHash3 64-bit finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

/// FNV-1a over the bytes followed by mix64.
std::uint64_t hashBytes(std::string_view bytes) noexcept;

/// A vertex identifier.  Ids are 64-bit hashes of the vertex name, so every
/// worker (and every host) derives the same id for the same name without
/// coordination.  Names seen through intern() are remembered for printing;
/// two distinct names hashing to one id is reported as an error.
class VertexId {
 public:
  constexpr VertexId() = default;
  constexpr explicit VertexId(std::uint64_t value) : value_(value) {}

  static VertexId intern(std::string_view name);
  static VertexId fromName(std::string_view name) noexcept {
    return VertexId(hashBytes(name));
  }

  /// The interned name, or "#<hex id>" when the id was never interned here.
  std::string name() const;

  constexpr std::uint64_t value() const noexcept { return value_; }

  friend constexpr auto operator<=>(VertexId, VertexId) = default;

 private:
  std::uint64_t value_ = 0;
};

}  // namespace tstream

template <>
struct std::hash<tstream::VertexId> {
  std::size_t operator()(tstream::VertexId v) const noexcept {
    return static_cast<std::size_t>(tstream::mix64(v.value()));
  }
};
