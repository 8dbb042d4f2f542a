#include "tstream/temporal_edge.hpp"

#include <charconv>
#include <cmath>

namespace tstream {

bool wellFormed(const TemporalEdge& edge) noexcept {
  return std::isfinite(edge.startTime) && std::isfinite(edge.duration) &&
         edge.duration >= 0.0;
}

std::string formatTime(double seconds) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, seconds);
  return std::string(buf, end);
}

std::string formatEdge(const TemporalEdge& edge) {
  std::string out = edge.source.name();
  out += ',';
  out += edge.target.name();
  out += ',';
  out += formatTime(edge.startTime);
  out += ',';
  out += formatTime(edge.duration);
  return out;
}

}  // namespace tstream
