#include "tstream/graph_store.hpp"

#include <algorithm>
#include <sstream>

#include "tstream/wire.hpp"

namespace tstream {

StoreMetrics& StoreMetrics::operator+=(const StoreMetrics& o) {
  edgesConsumed += o.edgesConsumed;
  remoteEdgesReceived += o.remoteEdgesReceived;
  requestsReceived += o.requestsReceived;
  requestsStored += o.requestsStored;
  requestsSent += o.requestsSent;
  edgesForwarded += o.edgesForwarded;
  resultsCreated += o.resultsCreated;
  resultsExpired += o.resultsExpired;
  requestsExpired += o.requestsExpired;
  matchesEmitted += o.matchesEmitted;
  firstEdgesSuppressed += o.firstEdgesSuppressed;
  messagesDropped += o.messagesDropped;
  return *this;
}

std::string StoreMetrics::toText() const {
  std::ostringstream os;
  os << "edges_consumed=" << edgesConsumed << '\n'
     << "remote_edges_received=" << remoteEdgesReceived << '\n'
     << "requests_received=" << requestsReceived << '\n'
     << "requests_stored=" << requestsStored << '\n'
     << "requests_sent=" << requestsSent << '\n'
     << "edges_forwarded=" << edgesForwarded << '\n'
     << "results_created=" << resultsCreated << '\n'
     << "results_expired=" << resultsExpired << '\n'
     << "requests_expired=" << requestsExpired << '\n'
     << "matches_emitted=" << matchesEmitted << '\n'
     << "first_edges_suppressed=" << firstEdgesSuppressed << '\n'
     << "messages_dropped=" << messagesDropped << '\n';
  return os.str();
}

GraphStore::GraphStore(WorkerId self, std::shared_ptr<const Partitioner> partitioner,
                       StoreConfig config, MatchSink sink)
    : self_(self),
      partitioner_(std::move(partitioner)),
      keep_(config.keepProbability, config.seed),
      csr_(KeyMode::BySource, config.binCount),
      csc_(KeyMode::ByTarget, config.binCount),
      results_(self, partitioner_, csr_, csc_, std::move(sink), config.resultSlots),
      requests_(self, config.requestSlots) {}

void GraphStore::connect(comms::Communicator* edges, comms::Communicator* requests) {
  edgeComm_ = edges;
  requestComm_ = requests;
  if (edgeComm_) {
    edgeComm_->registerCallback([this](const comms::Bytes& msg) {
      TemporalEdge e;
      try {
        e = wire::decodeEdge(msg);
      } catch (const wire::WireError&) {
        dropped_.fetch_add(1);
        return;
      }
      onRemoteEdgeReceived(e);
    });
  }
  if (requestComm_) {
    requestComm_->registerCallback([this](const comms::Bytes& msg) {
      EdgeRequest r;
      try {
        r = wire::decodeRequest(msg);
      } catch (const wire::WireError&) {
        dropped_.fetch_add(1);
        return;
      }
      onEdgeRequestReceived(r);
    });
  }
}

void GraphStore::registerQuery(std::shared_ptr<const query::QueryPlan> plan) {
  if (!plan) throw std::invalid_argument("null plan");
  std::unique_lock lock(queriesMutex_);
  for (const auto& q : queries_)
    if (q->id() == plan->id())
      throw DuplicateQueryId("query id '" + plan->id() + "' already registered");
  csr_.raiseHorizon(plan->maxExtent());
  csc_.raiseHorizon(plan->maxExtent());
  queries_.push_back(std::move(plan));
}

std::size_t GraphStore::queryCount() const {
  std::shared_lock lock(queriesMutex_);
  return queries_.size();
}

void GraphStore::consume(const TemporalEdge& edge) {
  edgesConsumed_.fetch_add(1);
  csr_.addEdge(edge);
  csc_.addEdge(edge);
  std::vector<EdgeRequest> pending = results_.process(edge);
  std::vector<EdgeRequest> seeded = checkQueries(edge);
  pending.insert(pending.end(), std::make_move_iterator(seeded.begin()),
                 std::make_move_iterator(seeded.end()));
  sendForwards(requests_.process(edge));
  sendRequests(pending);
}

std::vector<EdgeRequest> GraphStore::checkQueries(const TemporalEdge& edge) {
  std::vector<EdgeRequest> out;
  std::shared_lock lock(queriesMutex_);
  for (std::size_t qi = 0; qi < queries_.size(); ++qi) {
    const auto& plan = queries_[qi];
    if (!plan->satisfiedAt(0, {}, edge)) continue;
    VertexId key = edge.source;
    if (plan->size() > 1) {
      const auto& next = plan->step(1);
      std::size_t var = next.sourceBound ? next.sourceVar : next.targetVar;
      key = plan->variableValue(var, std::span<const TemporalEdge>(&edge, 1));
    }
    if (partitioner_->owner(key) != self_) continue;
    if (!keep_.keep(edge.id, qi)) {
      suppressed_.fetch_add(1);
      continue;
    }
    auto reqs = results_.add(IntermediateResult(plan, edge));
    out.insert(out.end(), std::make_move_iterator(reqs.begin()),
               std::make_move_iterator(reqs.end()));
  }
  return out;
}

void GraphStore::onEdgeRequestReceived(const EdgeRequest& request) {
  requestsReceived_.fetch_add(1);
  bool inserted = false;
  try {
    inserted = requests_.addRequest(request);
  } catch (const MalformedRequest&) {
    dropped_.fetch_add(1);
    return;
  }
  if (!inserted) return;
  requestsStored_.fetch_add(1);
  std::vector<TemporalEdge> candidates =
      request.source
          ? csr_.findEdges({*request.source, request.target, request.window.lo,
                            request.window.hi})
          : csc_.findEdges({*request.target, std::nullopt, request.window.lo,
                            request.window.hi});
  if (candidates.empty()) return;
  sendForwards(requests_.claim(request, candidates));
}

void GraphStore::onRemoteEdgeReceived(const TemporalEdge& edge) {
  remoteEdges_.fetch_add(1);
  sendRequests(results_.process(edge));
}

void GraphStore::sendRequests(const std::vector<EdgeRequest>& requests) {
  std::vector<const EdgeRequest*> unique;
  for (const auto& r : requests) {
    bool dup = std::any_of(unique.begin(), unique.end(),
                           [&](const EdgeRequest* u) { return *u == r; });
    if (!dup) unique.push_back(&r);
  }
  for (const EdgeRequest* r : unique) {
    WorkerId dest = requestDestination(*r, *partitioner_);
    if (!requestComm_ || dest == self_) {
      dropped_.fetch_add(1);
      continue;
    }
    requestComm_->send(dest, wire::encode(*r));
    requestsSent_.fetch_add(1);
  }
}

void GraphStore::sendForwards(const std::vector<Forward>& forwards) {
  for (const auto& f : forwards) {
    if (!edgeComm_ || f.destination == self_) {
      dropped_.fetch_add(1);
      continue;
    }
    edgeComm_->send(f.destination, wire::encode(f.edge));
    edgesForwarded_.fetch_add(1);
  }
}

StoreMetrics GraphStore::metrics() const {
  StoreMetrics m;
  m.edgesConsumed = edgesConsumed_.load();
  m.remoteEdgesReceived = remoteEdges_.load();
  m.requestsReceived = requestsReceived_.load();
  m.requestsStored = requestsStored_.load();
  m.requestsSent = requestsSent_.load();
  m.edgesForwarded = edgesForwarded_.load();
  m.resultsCreated = results_.stored();
  m.resultsExpired = results_.expired();
  m.requestsExpired = requests_.expired();
  m.matchesEmitted = results_.emitted();
  m.firstEdgesSuppressed = suppressed_.load();
  m.messagesDropped = dropped_.load();
  return m;
}

ConsumePool::ConsumePool(GraphStore& store, std::size_t threads,
                         std::shared_ptr<comms::ActivityCounter> activity)
    : store_(store), activity_(std::move(activity)) {
  if (threads == 0) threads = 1;
  for (std::size_t i = 0; i < threads; ++i) threads_.emplace_back([this] { run(); });
}

ConsumePool::~ConsumePool() { stop(); }

void ConsumePool::submit(TemporalEdge edge) {
  if (activity_) activity_->begin();
  {
    std::lock_guard lock(mutex_);
    queue_.push_back(std::move(edge));
  }
  ready_.notify_one();
}

std::size_t ConsumePool::backlog() const {
  std::lock_guard lock(mutex_);
  return queue_.size();
}

void ConsumePool::stop() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  ready_.notify_all();
  for (auto& t : threads_)
    if (t.joinable()) t.join();
  threads_.clear();
}

void ConsumePool::run() {
  for (;;) {
    TemporalEdge e;
    {
      std::unique_lock lock(mutex_);
      ready_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      e = std::move(queue_.front());
      queue_.pop_front();
    }
    try {
      store_.consume(e);
    } catch (const std::exception&) {
      // A send racing shutdown; the edge is lost like any late message.
    }
    if (activity_) activity_->end();
  }
}

}  // namespace tstream
