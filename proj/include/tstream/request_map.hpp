#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

#include "tstream/intermediate_result.hpp"

namespace tstream {

class MalformedRequest : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Instruction to send `edge` to `destination`.
struct Forward {
  WorkerId destination = 0;
  TemporalEdge edge;
};

/// Outstanding requests from peers, indexed like the ResultMap.
class RequestMap {
 public:
  explicit RequestMap(WorkerId self, std::size_t slots = std::size_t{1} << 16);

  RequestMap(const RequestMap&) = delete;
  RequestMap& operator=(const RequestMap&) = delete;

  /// Stores the request.  Returns false for a duplicate or a request this
  /// worker issued itself.  Throws MalformedRequest when no endpoint is bound
  /// or the window is empty.
  bool addRequest(const EdgeRequest& request);

  /// Forwards for every live stored request `edge` matches, at most one per
  /// destination.  Expired requests in the touched slots are erased.
  std::vector<Forward> process(const TemporalEdge& edge);

  /// Forwards for the candidates that match the stored copy of `request` and
  /// have not been sent for it before.
  std::vector<Forward> claim(const EdgeRequest& request,
                             std::span<const TemporalEdge> candidates);

  std::size_t size() const;
  std::uint64_t expired() const noexcept { return expired_.load(); }

 private:
  struct Entry {
    EdgeRequest request;
    std::vector<EdgeId> forwarded;

    bool sent(EdgeId id) const noexcept;
  };
  struct Slot {
    std::mutex mutex;
    std::vector<Entry> entries;
  };

  Slot& slotFor(const EdgeRequest& r) const;

  WorkerId self_;
  std::size_t mask_;
  std::unique_ptr<Slot[]> slots_;
  std::atomic<std::uint64_t> expired_{0};
};

}  // namespace tstream
