#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "tstream/comms.hpp"
#include "tstream/graph_store.hpp"
#include "tstream/oracle.hpp"

namespace tstream {

/// Every match emitted by any worker of a cluster, in arrival order.
class MatchLog {
 public:
  struct Entry {
    WorkerId worker;
    std::string query;
    oracle::Match edges;
  };

  explicit MatchLog(std::size_t workers) : perWorker_(workers, 0) {}

  MatchSink sinkFor(WorkerId worker);

  std::vector<Entry> entries() const;
  std::size_t size() const;
  std::vector<std::uint64_t> perWorker() const;
  /// Distinct matches per query id.
  std::map<std::string, oracle::MatchSet> byQuery() const;
  /// Emissions repeating an earlier (query, match) pair.
  std::size_t duplicates() const;

 private:
  mutable std::mutex mutex_;
  std::vector<Entry> entries_;
  std::vector<std::uint64_t> perWorker_;
};

struct ClusterOptions {
  std::size_t workerCount = 1;
  StoreConfig store;
  comms::CommConfig comm{4, 2, 0};
  /// Deterministic bus when true, otherwise a delayed network with
  /// a consume pool per worker.
  bool deterministic = true;
  comms::DelayModel delay;
  std::size_t consumeThreads = 1;
  std::string hashName = "IpHashFunction";
  std::uint64_t seed = 0;
};

/// W graph stores in one process, joined by an in-process network.
class Cluster {
 public:
  Cluster(ClusterOptions options,
          std::vector<std::shared_ptr<const query::QueryPlan>> plans);
  ~Cluster();

  Cluster(const Cluster&) = delete;
  Cluster& operator=(const Cluster&) = delete;

  std::size_t workerCount() const noexcept { return stores_.size(); }
  const Partitioner& partitioner() const noexcept { return *partitioner_; }
  const std::vector<std::shared_ptr<const query::QueryPlan>>& plans() const noexcept {
    return plans_;
  }

  /// Hands the edge to each of its owners.  Deterministic: consumed in
  /// place, then the bus is drained.  Delayed: queued on the owners' pools.
  void ingest(const TemporalEdge& edge);
  /// Waits until no edge, message or request is in flight.
  void drain();
  /// Ingests in start-time order, then drains.
  void run(std::vector<TemporalEdge> edges);

  GraphStore& store(WorkerId w) { return *stores_.at(w); }
  const MatchLog& matches() const noexcept { return log_; }
  StoreMetrics metrics(WorkerId w) const { return stores_.at(w)->metrics(); }
  StoreMetrics totalMetrics() const;
  std::uint64_t networkDropped() const;

 private:
  ClusterOptions options_;
  std::vector<std::shared_ptr<const query::QueryPlan>> plans_;
  std::shared_ptr<Partitioner> partitioner_;
  MatchLog log_;
  std::shared_ptr<comms::ActivityCounter> activity_;
  std::vector<std::unique_ptr<GraphStore>> stores_;
  std::shared_ptr<comms::InProcessNetwork> net_;
  std::vector<std::unique_ptr<comms::Communicator>> edgeComms_;
  std::vector<std::unique_ptr<comms::Communicator>> requestComms_;
  std::vector<std::unique_ptr<ConsumePool>> pools_;
};

/// Oracle matches for every plan, keyed by plan id, with first edges
/// filtered through the same keep sampler the stores use.
std::map<std::string, oracle::MatchSet> expectedMatches(
    const std::vector<std::shared_ptr<const query::QueryPlan>>& plans,
    std::span<const TemporalEdge> edges, double keepProbability = 1.0,
    std::uint64_t seed = 0);

}  // namespace tstream
