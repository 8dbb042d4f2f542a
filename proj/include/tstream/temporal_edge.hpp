#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tstream/vertex.hpp"

namespace tstream {

using EdgeId = std::uint64_t;

/// Opaque tuple carried alongside an edge (e.g. the remaining netflow fields).
using Payload = std::shared_ptr<const std::vector<std::string>>;

/// A stream element (u, v, t, duration).  `id` is assigned at ingestion and is
/// unique across the whole run, so both owners of an edge agree on it.
struct TemporalEdge {
  VertexId source;
  VertexId target;
  double startTime = 0.0;
  double duration = 0.0;
  EdgeId id = 0;
  Payload payload;

  double endTime() const noexcept { return startTime + duration; }
};

/// Finite times and a non-negative duration.
bool wellFormed(const TemporalEdge& edge) noexcept;

/// Shortest round-trip decimal form of a time value.
std::string formatTime(double seconds);

/// `source,target,startTime,duration` using interned vertex names.
std::string formatEdge(const TemporalEdge& edge);

}  // namespace tstream
