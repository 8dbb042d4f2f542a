#include "tstream/result_map.hpp"

#include <bit>
#include <stdexcept>

namespace tstream {

namespace {

constexpr std::uint64_t kModeSalt[3] = {0x2545f4914f6cdd1dULL,
                                        0x9e3779b97f4a7c15ULL,
                                        0xbf58476d1ce4e5b9ULL};

constexpr IndexMode kModes[3] = {IndexMode::Source, IndexMode::Target,
                                 IndexMode::Both};

}  // namespace

std::size_t slotHash(IndexMode mode, VertexId source, VertexId target) noexcept {
  const auto m = static_cast<std::size_t>(mode);
  switch (mode) {
    case IndexMode::Source: return mix64(source.value() ^ kModeSalt[m]);
    case IndexMode::Target: return mix64(target.value() ^ kModeSalt[m]);
    case IndexMode::Both:
      return mix64(mix64(source.value() ^ kModeSalt[m]) + target.value());
  }
  return 0;
}

WorkerId requestDestination(const EdgeRequest& request, const Partitioner& p) {
  if (request.source) return p.owner(*request.source);
  if (request.target) return p.owner(*request.target);
  throw std::invalid_argument("request binds no endpoint");
}

ResultMap::ResultMap(WorkerId self, std::shared_ptr<const Partitioner> partitioner,
                     const GraphIndex& csr, const GraphIndex& csc, MatchSink sink,
                     std::size_t slots)
    : self_(self),
      partitioner_(std::move(partitioner)),
      csr_(csr),
      csc_(csc),
      sink_(std::move(sink)),
      mask_(slots - 1) {
  if (slots == 0 || !std::has_single_bit(slots))
    throw std::invalid_argument("slot count must be a power of two");
  if (!partitioner_) throw std::invalid_argument("null partitioner");
  slots_ = std::make_unique<Slot[]>(slots);
}

bool ResultMap::ownsNextKey(const IntermediateResult& r) const {
  auto src = r.nextSource();
  if (src && partitioner_->owner(*src) == self_) return true;
  auto tgt = r.nextTarget();
  return tgt && partitioner_->owner(*tgt) == self_;
}

std::vector<EdgeRequest> ResultMap::process(const TemporalEdge& edge) {
  const double now = edge.startTime;
  std::vector<IntermediateResult> fresh;
  for (IndexMode mode : kModes) {
    Slot& slot = slots_[slotHash(mode, edge.source, edge.target) & mask_];
    std::lock_guard lock(slot.mutex);
    auto& entries = slot.entries;
    std::size_t kept = 0;
    std::uint64_t dropped = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      Entry& e = entries[i];
      if (e.result.expired(now)) {
        ++dropped;
        continue;
      }
      bool keyMatch = e.mode == mode &&
                      (mode == IndexMode::Target || e.source == edge.source) &&
                      (mode == IndexMode::Source || e.target == edge.target);
      if (keyMatch && !e.result.extendedWith(edge.id) && e.result.accepts(edge)) {
        e.result.markExtended(edge.id);
        fresh.push_back(e.result.extend(edge));
      }
      if (kept != i) entries[kept] = std::move(e);
      ++kept;
    }
    entries.erase(entries.begin() + static_cast<std::ptrdiff_t>(kept), entries.end());
    if (dropped) expired_.fetch_add(dropped);
  }

  std::vector<EdgeRequest> requests;
  if (fresh.empty()) return requests;
  for (auto& r : processAgainstGraph(std::move(fresh)))
    storeOrEmit(std::move(r), requests);
  return requests;
}

std::vector<EdgeRequest> ResultMap::add(IntermediateResult result) {
  std::vector<EdgeRequest> requests;
  std::vector<IntermediateResult> gen;
  gen.push_back(std::move(result));
  for (auto& r : processAgainstGraph(std::move(gen)))
    storeOrEmit(std::move(r), requests);
  return requests;
}

std::vector<IntermediateResult> ResultMap::processAgainstGraph(
    std::vector<IntermediateResult> gen) const {
  for (std::size_t i = 0; i < gen.size(); ++i) {
    if (gen[i].complete()) continue;
    auto src = gen[i].nextSource();
    auto tgt = gen[i].nextTarget();
    auto window = gen[i].nextWindow();
    if (window.lo > window.hi) continue;
    std::vector<TemporalEdge> candidates =
        src ? csr_.findEdges({*src, tgt, window.lo, window.hi})
            : csc_.findEdges({*tgt, std::nullopt, window.lo, window.hi});
    for (const auto& c : candidates) {
      if (gen[i].extendedWith(c.id) || !gen[i].accepts(c)) continue;
      gen[i].markExtended(c.id);
      IntermediateResult next = gen[i].extend(c);
      gen.push_back(std::move(next));
    }
  }
  return gen;
}

void ResultMap::storeOrEmit(IntermediateResult&& r,
                            std::vector<EdgeRequest>& requests) {
  if (r.complete()) {
    emitted_.fetch_add(1);
    if (sink_) sink_(r);
    return;
  }
  if (!ownsNextKey(r)) requests.push_back(r.request(self_));
  Entry e{r.nextMode(), r.nextSource().value_or(VertexId{}),
          r.nextTarget().value_or(VertexId{}), std::move(r)};
  Slot& slot = slots_[slotHash(e.mode, e.source, e.target) & mask_];
  {
    std::lock_guard lock(slot.mutex);
    slot.entries.push_back(std::move(e));
  }
  stored_.fetch_add(1);
}

std::size_t ResultMap::size() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i <= mask_; ++i) {
    std::lock_guard lock(slots_[i].mutex);
    n += slots_[i].entries.size();
  }
  return n;
}

}  // namespace tstream
