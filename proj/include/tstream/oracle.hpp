#pragma once

#include <cstddef>
#include <functional>
#include <set>
#include <span>
#include <vector>

#include "tstream/query_plan.hpp"
#include "tstream/temporal_edge.hpp"

namespace tstream::oracle {

/// Edge ids in plan order.
using Match = std::vector<EdgeId>;
using MatchSet = std::set<Match>;
/// Restricts which edges may fill the first plan position.
using FirstEdgeFilter = std::function<bool(const TemporalEdge&)>;

/// Checks a plan-ordered prefix directly against the query text: distinct
/// edges, one vertex per variable (distinct vertices per variable when the
/// plan is injective), every temporal constraint whose edges are all bound,
/// set membership of bound variables, and the plan's pairwise start windows.
bool prefixSatisfies(const query::QueryPlan& plan, std::span<const TemporalEdge> prefix);

inline bool matchSatisfies(const query::QueryPlan& plan,
                           std::span<const TemporalEdge> edges) {
  return edges.size() == plan.size() && prefixSatisfies(plan, edges);
}

/// Nested enumeration over the edge list sorted by start time.  Serial.
MatchSet enumerateReference(const query::QueryPlan& plan,
                            std::span<const TemporalEdge> edges,
                            const FirstEdgeFilter& admitFirst = {});

/// Same result using per-vertex adjacency lists; parallel over first edges.
MatchSet enumerateIndexed(const query::QueryPlan& plan,
                          std::span<const TemporalEdge> edges,
                          const FirstEdgeFilter& admitFirst = {});

struct BoundReport {
  std::size_t windows = 0;     // anchors examined
  std::size_t violations = 0;  // windows with more matches than n^d
  std::size_t maxMatches = 0;  // largest per-window match count
};

/// For every window [t, t + maxExtent] anchored at a match's first start
/// time, compares the matches lying wholly inside it with n^d, n being the
/// edges starting inside it and d the plan length.  `matches` may contain
/// repeats; each copy counts.
BoundReport windowBound(const query::QueryPlan& plan,
                         std::span<const TemporalEdge> edges,
                         const std::vector<Match>& matches);
BoundReport windowBoundParallel(const query::QueryPlan& plan,
                                 std::span<const TemporalEdge> edges,
                                 const std::vector<Match>& matches);

}  // namespace tstream::oracle
