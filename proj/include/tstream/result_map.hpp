#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <vector>

#include "tstream/graph_index.hpp"
#include "tstream/intermediate_result.hpp"
#include "tstream/partition.hpp"

namespace tstream {

/// Receives complete matches.  Called without any map lock held, possibly
/// from several threads at once.
using MatchSink = std::function<void(const IntermediateResult&)>;

/// Slot index shared by the result and request maps.
std::size_t slotHash(IndexMode mode, VertexId source, VertexId target) noexcept;

/// Worker that should receive a request: the owner of its bound source, or
/// of its bound target when only that is bound.
WorkerId requestDestination(const EdgeRequest& request, const Partitioner& p);

/// Intermediate results indexed by the bound endpoint(s) of the edge each one
/// waits for.
class ResultMap {
 public:
  ResultMap(WorkerId self, std::shared_ptr<const Partitioner> partitioner,
            const GraphIndex& csr, const GraphIndex& csc, MatchSink sink,
            std::size_t slots = std::size_t{1} << 20);

  ResultMap(const ResultMap&) = delete;
  ResultMap& operator=(const ResultMap&) = delete;

  /// Extends every stored result that `edge` can continue, expands the new
  /// results against the local graph, stores or emits them, and returns the
  /// requests needed for remote continuations.  Stored results are kept.
  std::vector<EdgeRequest> process(const TemporalEdge& edge);

  /// Expands `result` against the local graph, then stores every incomplete
  /// result (including `result` itself) and emits the complete ones.
  std::vector<EdgeRequest> add(IntermediateResult result);

  /// `gen` plus every result reachable from it by single-edge extensions
  /// found in the local CSR/CSC.
  std::vector<IntermediateResult> processAgainstGraph(
      std::vector<IntermediateResult> gen) const;

  std::size_t size() const;
  std::size_t slotCount() const noexcept { return mask_ + 1; }

  std::uint64_t stored() const noexcept { return stored_.load(); }
  std::uint64_t expired() const noexcept { return expired_.load(); }
  std::uint64_t emitted() const noexcept { return emitted_.load(); }

 private:
  struct Entry {
    IndexMode mode;
    VertexId source;
    VertexId target;
    IntermediateResult result;
  };
  struct Slot {
    std::mutex mutex;
    std::vector<Entry> entries;
  };

  void storeOrEmit(IntermediateResult&& r, std::vector<EdgeRequest>& requests);
  bool ownsNextKey(const IntermediateResult& r) const;

  WorkerId self_;
  std::shared_ptr<const Partitioner> partitioner_;
  const GraphIndex& csr_;
  const GraphIndex& csc_;
  MatchSink sink_;
  std::size_t mask_;
  std::unique_ptr<Slot[]> slots_;
  std::atomic<std::uint64_t> stored_{0};
  std::atomic<std::uint64_t> expired_{0};
  std::atomic<std::uint64_t> emitted_{0};
};

}  // namespace tstream
