#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tstream/membership.hpp"
#include "tstream/query.hpp"
#include "tstream/temporal_edge.hpp"

namespace tstream::query {

struct PlanOptions {
  std::string id = "q0";
  /// Upper bound assumed on edge durations when turning endtime() bounds
  /// into start-time bounds.
  double maxEdgeDuration = 60.0;
  /// Used as the extent when the constraints bound none.
  std::optional<double> defaultExtent;
  /// Require distinct variables to bind distinct vertices.
  bool injective = false;
  /// Resolves `in` / `not in` set names.
  std::shared_ptr<const MembershipRegistry> sets;
};

enum class PlanErrorKind {
  InvalidQuery,
  NoTotalOrder,
  Unsatisfiable,
  UnboundedExtent,
  Disconnected,
  UnresolvedSet,
};

class PlanError : public std::runtime_error {
 public:
  PlanError(PlanErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  PlanErrorKind kind() const noexcept { return kind_; }

 private:
  PlanErrorKind kind_;
};

/// Closed interval bounding start(later) - start(earlier).
struct TimeWindow {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double delta) const noexcept {
    return delta >= lo && delta <= hi;
  }
};

enum class Side { Source, Target };

struct VariableSlot {
  std::string name;
  std::size_t step = 0;  // first step binding the variable
  Side side = Side::Source;
};

struct PlanStep {
  EdgePattern pattern;
  std::size_t sourceVar = 0;
  std::size_t targetVar = 0;
  bool sourceBound = false;  // bound by an earlier step
  bool targetBound = false;
  /// Temporal constraints whose last referenced edge is this step.
  std::vector<std::size_t> constraints;
  /// Vertex constraints on variables first bound at this step.
  std::vector<std::size_t> vertexChecks;
};

/// Execution plan for one query: edges in strict start-time order plus the
/// derived windows used for expiry and candidate lookup.  Immutable.
class QueryPlan {
 public:
  const std::string& id() const noexcept { return id_; }
  const SubgraphQuery& query() const noexcept { return query_; }
  std::size_t size() const noexcept { return steps_.size(); }
  const PlanStep& step(std::size_t i) const { return steps_.at(i); }
  std::vector<EdgePattern> orderedEdges() const;

  /// Tightest derived bound on (last start - first start).
  double maxExtent() const noexcept { return maxExtent_; }
  double maxEdgeDuration() const noexcept { return maxEdgeDuration_; }
  bool injective() const noexcept { return injective_; }

  /// Bounds on start(later) - start(earlier), plan positions, later > earlier.
  TimeWindow window(std::size_t later, std::size_t earlier) const {
    return windows_.at(later * steps_.size() + earlier);
  }
  /// Window of step i relative to the first edge.
  TimeWindow stepWindow(std::size_t i) const { return window(i, 0); }

  const std::vector<VariableSlot>& variables() const noexcept { return vars_; }
  std::optional<std::size_t> variableIndex(const std::string& name) const;

  const MembershipPredicate& membership(std::size_t vertexConstraint) const {
    return *sets_.at(vertexConstraint);
  }

  /// Value of a variable already bound by `bound` (edges in plan order).
  VertexId variableValue(std::size_t var,
                         std::span<const TemporalEdge> bound) const;

  /// Whether `edge` may fill plan position `step` given the first `step`
  /// bound edges: endpoints agree with bound variables, the edge is not
  /// already used, start-time windows hold, constraints that become fully
  /// bound hold, and newly bound vertices pass their set checks.
  bool satisfiedAt(std::size_t step, std::span<const TemporalEdge> bound,
                   const TemporalEdge& edge) const;

  /// Human readable dump of the plan.
  std::string describe() const;

 private:
  friend QueryPlan plan(const SubgraphQuery& query, const PlanOptions& options);

  struct CompiledConstraint {
    std::size_t lhsStep = 0;
    TimeSelector lhsSelector = TimeSelector::Start;
    std::size_t rhsStep = 0;
    TimeSelector rhsSelector = TimeSelector::Start;
    std::optional<ArithOp> op;
    Comparator comparator = Comparator::Less;
    double bound = 0.0;
  };

  bool holds(const CompiledConstraint& c, std::size_t step,
             std::span<const TemporalEdge> bound,
             const TemporalEdge& edge) const;

  std::string id_;
  SubgraphQuery query_;
  std::vector<PlanStep> steps_;
  std::vector<VariableSlot> vars_;
  std::vector<CompiledConstraint> compiled_;
  std::vector<TimeWindow> windows_;
  std::vector<std::shared_ptr<const MembershipPredicate>> sets_;
  double maxExtent_ = 0.0;
  double maxEdgeDuration_ = 0.0;
  bool injective_ = false;
};

/// Orders the query's edges by the strict start-time order its constraints
/// imply and derives windows.  Throws PlanError.
QueryPlan plan(const SubgraphQuery& query, const PlanOptions& options = {});

}  // namespace tstream::query
