#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>

#include "tstream/temporal_edge.hpp"

namespace tstream {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Draws one decision from a splitmix64 stream: true with probability kq.
/// Throws ConfigError unless 0 < kq <= 1.
bool applyKeepProbability(std::uint64_t& state, double kq);

/// Decides whether an edge may seed a new result for a query.  Keyed by
/// (seed, edge id, query index) rather than by call order, so every worker
/// and the oracle agree on the decision for a given edge.
class KeepSampler {
 public:
  explicit KeepSampler(double kq = 1.0, std::uint64_t seed = 0);

  double probability() const noexcept { return kq_; }
  bool keep(EdgeId edge, std::size_t query) const noexcept;

 private:
  double kq_;
  std::uint64_t seed_;
};

}  // namespace tstream
