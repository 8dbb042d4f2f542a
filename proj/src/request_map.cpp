#include "tstream/request_map.hpp"

#include <algorithm>
#include <bit>

#include "tstream/result_map.hpp"

namespace tstream {

namespace {

constexpr IndexMode kModes[3] = {IndexMode::Source, IndexMode::Target,
                                 IndexMode::Both};

}  // namespace

bool RequestMap::Entry::sent(EdgeId id) const noexcept {
  return std::find(forwarded.begin(), forwarded.end(), id) != forwarded.end();
}

RequestMap::RequestMap(WorkerId self, std::size_t slots)
    : self_(self), mask_(slots - 1) {
  if (slots == 0 || !std::has_single_bit(slots))
    throw std::invalid_argument("slot count must be a power of two");
  slots_ = std::make_unique<Slot[]>(slots);
}

RequestMap::Slot& RequestMap::slotFor(const EdgeRequest& r) const {
  return slots_[slotHash(r.mode(), r.source.value_or(VertexId{}),
                         r.target.value_or(VertexId{})) &
                mask_];
}

bool RequestMap::addRequest(const EdgeRequest& request) {
  if (!request.source && !request.target)
    throw MalformedRequest("edge request binds neither endpoint");
  if (!request.wellFormed())
    throw MalformedRequest("edge request window is empty or not finite");
  if (request.requester == self_) return false;
  Slot& slot = slotFor(request);
  std::lock_guard lock(slot.mutex);
  for (const auto& e : slot.entries)
    if (e.request == request) return false;
  slot.entries.push_back(Entry{request, {}});
  return true;
}

std::vector<Forward> RequestMap::process(const TemporalEdge& edge) {
  const double now = edge.startTime;
  std::vector<Forward> out;
  auto addForward = [&](WorkerId dest) {
    for (const auto& f : out)
      if (f.destination == dest) return;
    out.push_back(Forward{dest, edge});
  };
  for (IndexMode mode : kModes) {
    Slot& slot = slots_[slotHash(mode, edge.source, edge.target) & mask_];
    std::lock_guard lock(slot.mutex);
    std::uint64_t dropped = 0;
    std::erase_if(slot.entries, [&](Entry& e) {
      if (e.request.expired(now)) {
        ++dropped;
        return true;
      }
      if (e.request.mode() == mode && e.request.matches(edge) && !e.sent(edge.id)) {
        e.forwarded.push_back(edge.id);
        addForward(e.request.requester);
      }
      return false;
    });
    if (dropped) expired_.fetch_add(dropped);
  }
  return out;
}

std::vector<Forward> RequestMap::claim(const EdgeRequest& request,
                                       std::span<const TemporalEdge> candidates) {
  std::vector<Forward> out;
  Slot& slot = slotFor(request);
  std::lock_guard lock(slot.mutex);
  for (auto& e : slot.entries) {
    if (!(e.request == request)) continue;
    for (const auto& c : candidates) {
      if (!request.matches(c) || e.sent(c.id)) continue;
      e.forwarded.push_back(c.id);
      out.push_back(Forward{request.requester, c});
    }
    break;
  }
  return out;
}

std::size_t RequestMap::size() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i <= mask_; ++i) {
    std::lock_guard lock(slots_[i].mutex);
    n += slots_[i].entries.size();
  }
  return n;
}

}  // namespace tstream
