#include "tstream/graph_index.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace tstream {

namespace {

constexpr std::uint64_t kBinSalt = 0x9e3779b97f4a7c15ULL;

void atomicMax(std::atomic<double>& target, double value) noexcept {
  double cur = target.load(std::memory_order_relaxed);
  while (value > cur &&
         !target.compare_exchange_weak(cur, value, std::memory_order_acq_rel)) {
  }
}

}  // namespace

GraphIndex::GraphIndex(KeyMode mode, std::size_t binCount, double horizon)
    : mode_(mode),
      binMask_(binCount - 1),
      horizon_(horizon),
      lastObserved_(-std::numeric_limits<double>::infinity()) {
  if (binCount == 0 || !std::has_single_bit(binCount))
    throw std::invalid_argument("bin count must be a power of two");
  if (!(horizon >= 0.0)) throw std::invalid_argument("horizon must be >= 0");
  bins_ = std::make_unique<Bin[]>(binCount);
}

void GraphIndex::raiseHorizon(double horizon) noexcept {
  atomicMax(horizon_, horizon);
}

std::size_t GraphIndex::binOf(VertexId key) const noexcept {
  return static_cast<std::size_t>(mix64(key.value() ^ kBinSalt)) & binMask_;
}

void GraphIndex::addEdge(const TemporalEdge& edge) {
  atomicMax(lastObserved_, edge.startTime);
  const double now = lastObservedTime();
  const VertexId key = keyOf(edge);
  Bin& bin = bins_[binOf(key)];

  std::lock_guard lock(bin.mutex);
  std::size_t purged = 0;
  VertexList* target = nullptr;
  for (auto& list : bin.lists) {
    auto dead = std::remove_if(list.edges.begin(), list.edges.end(),
                               [&](const TemporalEdge& e) { return expired(e, now); });
    purged += static_cast<std::size_t>(list.edges.end() - dead);
    list.edges.erase(dead, list.edges.end());
    if (list.vertex == key) target = &list;
  }
  if (!expired(edge, now)) {
    if (!target) {
      bin.lists.push_back(VertexList{key, {}});
      target = &bin.lists.back();
    }
    target->edges.push_back(edge);
  } else {
    ++purged;
  }
  std::erase_if(bin.lists, [](const VertexList& l) { return l.edges.empty(); });
  if (purged) purged_.fetch_add(purged, std::memory_order_relaxed);
}

std::vector<TemporalEdge> GraphIndex::findEdges(const EdgeQuery& query) const {
  std::vector<TemporalEdge> out;
  const double now = lastObservedTime();
  const Bin& bin = bins_[binOf(query.key)];
  std::lock_guard lock(bin.mutex);
  for (const auto& list : bin.lists) {
    if (list.vertex != query.key) continue;
    for (const auto& e : list.edges) {
      if (e.startTime < query.lo || e.startTime > query.hi) continue;
      if (query.other && otherOf(e) != *query.other) continue;
      if (expired(e, now)) continue;
      out.push_back(e);
    }
    break;
  }
  return out;
}

std::vector<TemporalEdge> GraphIndex::snapshot() const {
  std::vector<TemporalEdge> out;
  const double now = lastObservedTime();
  for (std::size_t b = 0; b <= binMask_; ++b) {
    std::lock_guard lock(bins_[b].mutex);
    for (const auto& list : bins_[b].lists)
      for (const auto& e : list.edges)
        if (!expired(e, now)) out.push_back(e);
  }
  return out;
}

std::size_t GraphIndex::storedCount() const {
  std::size_t n = 0;
  for (std::size_t b = 0; b <= binMask_; ++b) {
    std::lock_guard lock(bins_[b].mutex);
    for (const auto& list : bins_[b].lists) n += list.edges.size();
  }
  return n;
}

}  // namespace tstream
