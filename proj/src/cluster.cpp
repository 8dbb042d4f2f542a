#include "tstream/cluster.hpp"

#include <algorithm>
#include <set>

namespace tstream {

MatchSink MatchLog::sinkFor(WorkerId worker) {
  return [this, worker](const IntermediateResult& r) {
    Entry e{worker, r.plan().id(), r.edgeIds()};
    std::lock_guard lock(mutex_);
    entries_.push_back(std::move(e));
    ++perWorker_.at(worker);
  };
}

std::vector<MatchLog::Entry> MatchLog::entries() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

std::size_t MatchLog::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::vector<std::uint64_t> MatchLog::perWorker() const {
  std::lock_guard lock(mutex_);
  return perWorker_;
}

std::map<std::string, oracle::MatchSet> MatchLog::byQuery() const {
  std::lock_guard lock(mutex_);
  std::map<std::string, oracle::MatchSet> out;
  for (const auto& e : entries_) out[e.query].insert(e.edges);
  return out;
}

std::size_t MatchLog::duplicates() const {
  std::lock_guard lock(mutex_);
  std::set<std::pair<std::string, oracle::Match>> seen;
  std::size_t dup = 0;
  for (const auto& e : entries_) dup += !seen.emplace(e.query, e.edges).second;
  return dup;
}

Cluster::Cluster(ClusterOptions options,
                 std::vector<std::shared_ptr<const query::QueryPlan>> plans)
    : options_(std::move(options)),
      plans_(std::move(plans)),
      partitioner_(std::make_shared<Partitioner>(options_.workerCount, options_.hashName)),
      log_(options_.workerCount),
      activity_(std::make_shared<comms::ActivityCounter>()) {
  const std::size_t W = options_.workerCount;
  for (WorkerId w = 0; w < W; ++w) {
    stores_.push_back(
        std::make_unique<GraphStore>(w, partitioner_, options_.store, log_.sinkFor(w)));
    for (const auto& p : plans_) stores_.back()->registerQuery(p);
  }
  if (W > 1) {
    net_ = options_.deterministic
               ? comms::InProcessNetwork::deterministic(options_.seed, activity_)
               : comms::InProcessNetwork::delayed(options_.delay, activity_);
    std::vector<WorkerId> all(W);
    for (WorkerId w = 0; w < W; ++w) all[w] = w;
    for (WorkerId w = 0; w < W; ++w) {
      auto c = options_.comm;
      c.seed = options_.seed * 1000003 + w;
      edgeComms_.push_back(std::make_unique<comms::Communicator>(w, all, c, net_, "edges"));
      requestComms_.push_back(
          std::make_unique<comms::Communicator>(w, all, c, net_, "requests"));
      stores_[w]->connect(edgeComms_[w].get(), requestComms_[w].get());
      edgeComms_[w]->start();
      requestComms_[w]->start();
    }
  }
  if (!options_.deterministic)
    for (auto& s : stores_)
      pools_.push_back(std::make_unique<ConsumePool>(*s, options_.consumeThreads, activity_));
}

Cluster::~Cluster() {
  for (auto& p : pools_) p->stop();
  for (auto& c : edgeComms_) c->stop();
  for (auto& c : requestComms_) c->stop();
}

void Cluster::ingest(const TemporalEdge& edge) {
  if (options_.deterministic) {
    for (WorkerId w : partitioner_->route(edge)) stores_[w]->consume(edge);
    if (net_) net_->drain();
  } else {
    for (WorkerId w : partitioner_->route(edge)) pools_[w]->submit(edge);
  }
}

void Cluster::drain() {
  if (net_) net_->drain();
  activity_->waitIdle();
}

void Cluster::run(std::vector<TemporalEdge> edges) {
  std::stable_sort(edges.begin(), edges.end(),
                   [](const TemporalEdge& a, const TemporalEdge& b) {
                     return a.startTime < b.startTime;
                   });
  for (const auto& e : edges) ingest(e);
  drain();
}

StoreMetrics Cluster::totalMetrics() const {
  StoreMetrics m;
  for (const auto& s : stores_) m += s->metrics();
  return m;
}

std::uint64_t Cluster::networkDropped() const { return net_ ? net_->dropped() : 0; }

std::map<std::string, oracle::MatchSet> expectedMatches(
    const std::vector<std::shared_ptr<const query::QueryPlan>>& plans,
    std::span<const TemporalEdge> edges, double keepProbability, std::uint64_t seed) {
  KeepSampler keep(keepProbability, seed);
  std::map<std::string, oracle::MatchSet> out;
  for (std::size_t qi = 0; qi < plans.size(); ++qi) {
    oracle::FirstEdgeFilter admit;
    if (keepProbability < 1.0)
      admit = [&keep, qi](const TemporalEdge& e) { return keep.keep(e.id, qi); };
    out[plans[qi]->id()] = oracle::enumerateIndexed(*plans[qi], edges, admit);
  }
  return out;
}

}  // namespace tstream
