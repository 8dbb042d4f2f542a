#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tstream/partition.hpp"
#include "tstream/query_plan.hpp"
#include "tstream/temporal_edge.hpp"

namespace tstream {

/// Which endpoints of the next pattern edge are already bound.
enum class IndexMode { Source, Target, Both };

/// A needed edge: bound endpoint(s) and a start-time window.
struct EdgeRequest {
  std::optional<VertexId> source;
  std::optional<VertexId> target;
  query::TimeWindow window;
  WorkerId requester = 0;
  double expiry = 0.0;
  std::string queryId;
  std::uint32_t step = 0;

  IndexMode mode() const noexcept {
    if (source && target) return IndexMode::Both;
    return source ? IndexMode::Source : IndexMode::Target;
  }
  bool wellFormed() const noexcept;
  bool matches(const TemporalEdge& e) const noexcept {
    return (!source || *source == e.source) && (!target || *target == e.target) &&
           window.contains(e.startTime);
  }
  bool expired(double now) const noexcept { return now > expiry; }

  friend bool operator==(const EdgeRequest& a, const EdgeRequest& b) {
    return a.source == b.source && a.target == b.target &&
           a.window.lo == b.window.lo && a.window.hi == b.window.hi &&
           a.requester == b.requester && a.expiry == b.expiry &&
           a.queryId == b.queryId && a.step == b.step;
  }
};

/// A plan prefix bound to concrete edges.  Variable values are read off the
/// bound edges through the plan's variable slots.
class IntermediateResult {
 public:
  IntermediateResult(std::shared_ptr<const query::QueryPlan> plan,
                     const TemporalEdge& first);

  const query::QueryPlan& plan() const noexcept { return *plan_; }
  const std::shared_ptr<const query::QueryPlan>& planPtr() const noexcept {
    return plan_;
  }

  std::span<const TemporalEdge> edges() const noexcept { return edges_; }
  std::size_t boundCount() const noexcept { return edges_.size(); }
  bool complete() const noexcept { return edges_.size() == plan_->size(); }
  std::vector<EdgeId> edgeIds() const;

  double expiry() const noexcept { return expiry_; }
  bool expired(double now) const noexcept { return now > expiry_; }

  /// Bound endpoints of the next pattern edge.  Requires !complete().
  std::optional<VertexId> nextSource() const;
  std::optional<VertexId> nextTarget() const;
  IndexMode nextMode() const;
  /// Start-time window for the next edge: the intersection of the pairwise
  /// windows against every bound edge.
  query::TimeWindow nextWindow() const;

  bool accepts(const TemporalEdge& e) const {
    return !complete() && plan_->satisfiedAt(edges_.size(), edges_, e);
  }
  IntermediateResult extend(const TemporalEdge& e) const;

  EdgeRequest request(WorkerId requester) const;

  /// variable name -> bound vertex
  std::map<std::string, VertexId> binding() const;

  /// Edge ids this result has already been extended with.
  bool extendedWith(EdgeId id) const noexcept;
  void markExtended(EdgeId id) { extended_.push_back(id); }

 private:
  IntermediateResult() = default;

  std::shared_ptr<const query::QueryPlan> plan_;
  std::vector<TemporalEdge> edges_;
  std::vector<EdgeId> extended_;
  double expiry_ = 0.0;
};

/// Tab-separated bound edges, each `source,target,start,duration`.
std::string formatMatch(const IntermediateResult& r);

}  // namespace tstream
