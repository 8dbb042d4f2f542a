#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "tstream/comms.hpp"
#include "tstream/graph_index.hpp"
#include "tstream/keep.hpp"
#include "tstream/query_plan.hpp"
#include "tstream/request_map.hpp"
#include "tstream/result_map.hpp"

namespace tstream {

class DuplicateQueryId : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct StoreConfig {
  std::size_t binCount = std::size_t{1} << 16;
  std::size_t resultSlots = std::size_t{1} << 20;
  std::size_t requestSlots = std::size_t{1} << 16;
  double keepProbability = 1.0;
  std::uint64_t seed = 0;
};

struct StoreMetrics {
  std::uint64_t edgesConsumed = 0;
  std::uint64_t remoteEdgesReceived = 0;
  std::uint64_t requestsReceived = 0;
  std::uint64_t requestsStored = 0;
  std::uint64_t requestsSent = 0;
  std::uint64_t edgesForwarded = 0;
  std::uint64_t resultsCreated = 0;
  std::uint64_t resultsExpired = 0;
  std::uint64_t requestsExpired = 0;
  std::uint64_t matchesEmitted = 0;
  std::uint64_t firstEdgesSuppressed = 0;
  std::uint64_t messagesDropped = 0;

  StoreMetrics& operator+=(const StoreMetrics& o);
  /// `key=value` lines.
  std::string toText() const;
};

/// One worker: CSR and CSC over its edges, the result and request maps, and
/// the registered query plans.
class GraphStore {
 public:
  GraphStore(WorkerId self, std::shared_ptr<const Partitioner> partitioner,
             StoreConfig config, MatchSink sink);

  GraphStore(const GraphStore&) = delete;
  GraphStore& operator=(const GraphStore&) = delete;

  WorkerId id() const noexcept { return self_; }

  /// Registers the message callbacks on both communicators.  Either may be
  /// null for a single worker.
  void connect(comms::Communicator* edges, comms::Communicator* requests);

  /// Throws DuplicateQueryId.
  void registerQuery(std::shared_ptr<const query::QueryPlan> plan);
  std::size_t queryCount() const;
  double horizon() const noexcept { return csr_.horizon(); }

  /// Index the edge, advance stored results, seed new results, answer
  /// stored requests, then send the requests produced on the way.
  void consume(const TemporalEdge& edge);

  /// New results for every plan whose first step the edge satisfies, when
  /// this worker owns the vertex the second step is looked up by.
  std::vector<EdgeRequest> checkQueries(const TemporalEdge& edge);

  void onEdgeRequestReceived(const EdgeRequest& request);
  void onRemoteEdgeReceived(const TemporalEdge& edge);

  const GraphIndex& csr() const noexcept { return csr_; }
  const GraphIndex& csc() const noexcept { return csc_; }
  ResultMap& resultMap() noexcept { return results_; }
  RequestMap& requestMap() noexcept { return requests_; }

  StoreMetrics metrics() const;

 private:
  void sendRequests(const std::vector<EdgeRequest>& requests);
  void sendForwards(const std::vector<Forward>& forwards);

  WorkerId self_;
  std::shared_ptr<const Partitioner> partitioner_;
  KeepSampler keep_;
  GraphIndex csr_;
  GraphIndex csc_;
  ResultMap results_;
  RequestMap requests_;

  mutable std::shared_mutex queriesMutex_;
  std::vector<std::shared_ptr<const query::QueryPlan>> queries_;

  comms::Communicator* edgeComm_ = nullptr;
  comms::Communicator* requestComm_ = nullptr;

  std::atomic<std::uint64_t> edgesConsumed_{0};
  std::atomic<std::uint64_t> remoteEdges_{0};
  std::atomic<std::uint64_t> requestsReceived_{0};
  std::atomic<std::uint64_t> requestsStored_{0};
  std::atomic<std::uint64_t> requestsSent_{0};
  std::atomic<std::uint64_t> edgesForwarded_{0};
  std::atomic<std::uint64_t> suppressed_{0};
  std::atomic<std::uint64_t> dropped_{0};
};

/// Runs consume() on a small thread pool so a stalled send for one edge does
/// not hold up the edges behind it.
class ConsumePool {
 public:
  ConsumePool(GraphStore& store, std::size_t threads,
              std::shared_ptr<comms::ActivityCounter> activity = nullptr);
  ~ConsumePool();

  ConsumePool(const ConsumePool&) = delete;
  ConsumePool& operator=(const ConsumePool&) = delete;

  void submit(TemporalEdge edge);
  std::size_t backlog() const;
  /// Finishes queued edges, then joins.
  void stop();

 private:
  void run();

  GraphStore& store_;
  std::shared_ptr<comms::ActivityCounter> activity_;
  mutable std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<TemporalEdge> queue_;
  bool stopping_ = false;
  std::vector<std::thread> threads_;
};

}  // namespace tstream
