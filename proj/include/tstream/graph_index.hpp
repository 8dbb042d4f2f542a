#pragma once

#include <atomic>
#include <cstddef>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "tstream/temporal_edge.hpp"

namespace tstream {

enum class KeyMode { BySource, ByTarget };

/// Lookup criteria: the key vertex (source for a CSR, target for a CSC), an
/// optional constraint on the other endpoint, and a closed start-time window.
struct EdgeQuery {
  VertexId key;
  std::optional<VertexId> other;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

/// Hashed adjacency over recent edges.  An array of bins, each a list of
/// per-vertex edge lists behind its own mutex.  Edges whose end time falls
/// more than `horizon` behind the latest observed start time are dropped
/// whenever their bin is touched by an insert.
class GraphIndex {
 public:
  explicit GraphIndex(KeyMode mode, std::size_t binCount = std::size_t{1} << 16,
                      double horizon = 0.0);

  GraphIndex(const GraphIndex&) = delete;
  GraphIndex& operator=(const GraphIndex&) = delete;

  KeyMode mode() const noexcept { return mode_; }
  std::size_t binCount() const noexcept { return binMask_ + 1; }

  double horizon() const noexcept { return horizon_.load(std::memory_order_relaxed); }
  /// Only ever widens the horizon.
  void raiseHorizon(double horizon) noexcept;

  double lastObservedTime() const noexcept {
    return lastObserved_.load(std::memory_order_acquire);
  }

  void addEdge(const TemporalEdge& edge);
  std::vector<TemporalEdge> findEdges(const EdgeQuery& query) const;

  /// Every stored, unexpired edge.  Locks bins one at a time.
  std::vector<TemporalEdge> snapshot() const;
  /// Stored edges including ones not yet purged.  Edges that arrive
  /// already expired are counted as purged.
  std::size_t storedCount() const;
  std::size_t purgedCount() const noexcept {
    return purged_.load(std::memory_order_relaxed);
  }

  std::size_t binOf(VertexId key) const noexcept;

 private:
  struct VertexList {
    VertexId vertex;
    std::vector<TemporalEdge> edges;
  };
  struct Bin {
    mutable std::mutex mutex;
    std::vector<VertexList> lists;
  };

  VertexId keyOf(const TemporalEdge& e) const noexcept {
    return mode_ == KeyMode::BySource ? e.source : e.target;
  }
  VertexId otherOf(const TemporalEdge& e) const noexcept {
    return mode_ == KeyMode::BySource ? e.target : e.source;
  }
  bool expired(const TemporalEdge& e, double now) const noexcept {
    return e.endTime() < now - horizon();
  }

  KeyMode mode_;
  std::size_t binMask_;
  std::unique_ptr<Bin[]> bins_;
  std::atomic<double> horizon_;
  std::atomic<double> lastObserved_;
  std::atomic<std::size_t> purged_{0};
};

}  // namespace tstream
