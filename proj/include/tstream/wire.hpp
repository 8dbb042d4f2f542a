#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "tstream/intermediate_result.hpp"
#include "tstream/temporal_edge.hpp"

namespace tstream::wire {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::uint8_t kEdgeTag = 'E';
inline constexpr std::uint8_t kRequestTag = 'R';
inline constexpr std::uint8_t kVersion = 1;

class WireError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Message = tag (1 byte) + version (1 byte) + body, little endian.
/// Stream transports prefix each message with its u32 length.
///
/// edge body:    u64 source, u64 target, f64 start, f64 duration, u64 id,
///               u32 field count, then per field u32 length + bytes
/// request body: u8 flags (1 = source bound, 2 = target bound), u64 source,
///               u64 target, f64 lo, f64 hi, u32 requester, f64 expiry,
///               u16 query id length + bytes, u32 step
Bytes encode(const TemporalEdge& edge);
Bytes encode(const EdgeRequest& request);

/// Throws WireError on a truncated, oversized or mistagged message.
TemporalEdge decodeEdge(const Bytes& message);
EdgeRequest decodeRequest(const Bytes& message);

}  // namespace tstream::wire
