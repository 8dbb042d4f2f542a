#include "tstream/query_plan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace tstream::query {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Upper bound on x - y, possibly strict.
struct Bound {
  double value = kInf;
  bool strict = false;
};

bool tighter(const Bound& a, const Bound& b) {
  return a.value < b.value || (a.value == b.value && a.strict && !b.strict);
}

Bound add(const Bound& a, const Bound& b) {
  if (a.value == kInf || b.value == kInf) return {};
  return {a.value + b.value, a.strict || b.strict};
}

bool negative(const Bound& b) {
  return b.value < 0.0 || (b.value == 0.0 && b.strict);
}

/// Difference-bound matrix over start/end times of the query edges.
/// Node 2i is start(edge i), node 2i+1 is end(edge i).
class DifferenceBounds {
 public:
  explicit DifferenceBounds(std::size_t nodes)
      : n_(nodes), m_(nodes * nodes) {
    for (std::size_t i = 0; i < n_; ++i) at(i, i) = {0.0, false};
  }

  Bound& at(std::size_t x, std::size_t y) { return m_[x * n_ + y]; }
  const Bound& at(std::size_t x, std::size_t y) const { return m_[x * n_ + y]; }

  void constrain(std::size_t x, std::size_t y, Bound b) {
    if (tighter(b, at(x, y))) at(x, y) = b;
  }

  void close() {
    for (std::size_t k = 0; k < n_; ++k)
      for (std::size_t i = 0; i < n_; ++i) {
        if (at(i, k).value == kInf) continue;
        for (std::size_t j = 0; j < n_; ++j) {
          Bound via = add(at(i, k), at(k, j));
          if (tighter(via, at(i, j))) at(i, j) = via;
        }
      }
  }

  bool consistent() const {
    for (std::size_t i = 0; i < n_; ++i)
      if (negative(at(i, i))) return false;
    return true;
  }

 private:
  std::size_t n_;
  std::vector<Bound> m_;
};

std::size_t node(std::size_t edge, TimeSelector s) {
  return 2 * edge + (s == TimeSelector::End ? 1 : 0);
}

void addConstraint(DifferenceBounds& d, const TemporalConstraint& c,
                   const std::map<std::string, std::size_t>& labelIndex) {
  std::size_t a = node(labelIndex.at(c.lhs.label), c.lhs.selector);
  std::size_t b = node(labelIndex.at(c.rhs.label), c.rhs.selector);
  if (c.op && *c.op == ArithOp::Plus) return;  // not a difference constraint
  double k = c.op ? c.bound : 0.0;
  switch (c.comparator) {
    case Comparator::Less: d.constrain(a, b, {k, true}); break;
    case Comparator::LessEqual: d.constrain(a, b, {k, false}); break;
    case Comparator::Greater: d.constrain(b, a, {-k, true}); break;
    case Comparator::GreaterEqual: d.constrain(b, a, {-k, false}); break;
  }
}

double timeOf(const TemporalEdge& e, TimeSelector s) {
  return s == TimeSelector::Start ? e.startTime : e.endTime();
}

}  // namespace

std::vector<EdgePattern> QueryPlan::orderedEdges() const {
  std::vector<EdgePattern> out;
  out.reserve(steps_.size());
  for (const auto& s : steps_) out.push_back(s.pattern);
  return out;
}

std::optional<std::size_t> QueryPlan::variableIndex(
    const std::string& name) const {
  for (std::size_t i = 0; i < vars_.size(); ++i)
    if (vars_[i].name == name) return i;
  return std::nullopt;
}

VertexId QueryPlan::variableValue(std::size_t var,
                                  std::span<const TemporalEdge> bound) const {
  const VariableSlot& slot = vars_[var];
  const TemporalEdge& e = bound[slot.step];
  return slot.side == Side::Source ? e.source : e.target;
}

bool QueryPlan::holds(const CompiledConstraint& c, std::size_t step,
                      std::span<const TemporalEdge> bound,
                      const TemporalEdge& edge) const {
  const TemporalEdge& le = c.lhsStep == step ? edge : bound[c.lhsStep];
  const TemporalEdge& re = c.rhsStep == step ? edge : bound[c.rhsStep];
  double l = timeOf(le, c.lhsSelector);
  double r = timeOf(re, c.rhsSelector);
  if (!c.op) return compare(l, c.comparator, r);
  double v = *c.op == ArithOp::Minus ? l - r : l + r;
  return compare(v, c.comparator, c.bound);
}

bool QueryPlan::satisfiedAt(std::size_t step,
                            std::span<const TemporalEdge> bound,
                            const TemporalEdge& edge) const {
  if (step >= steps_.size() || bound.size() != step) return false;
  const PlanStep& s = steps_[step];

  for (const auto& b : bound)
    if (b.id == edge.id) return false;

  if (s.sourceBound && variableValue(s.sourceVar, bound) != edge.source)
    return false;
  if (s.targetBound && variableValue(s.targetVar, bound) != edge.target)
    return false;
  if (s.sourceVar == s.targetVar && edge.source != edge.target) return false;

  if (injective_) {
    auto clashes = [&](VertexId v) {
      for (std::size_t i = 0; i < vars_.size(); ++i)
        if (vars_[i].step < step && variableValue(i, bound) == v) return true;
      return false;
    };
    bool newSource = !s.sourceBound;
    bool newTarget = !s.targetBound && s.targetVar != s.sourceVar;
    if (newSource && clashes(edge.source)) return false;
    if (newTarget && clashes(edge.target)) return false;
    if (newSource && newTarget && edge.source == edge.target) return false;
  }

  for (std::size_t j = 0; j < step; ++j) {
    if (!window(step, j).contains(edge.startTime - bound[j].startTime))
      return false;
  }

  for (std::size_t ci : s.constraints)
    if (!holds(compiled_[ci], step, bound, edge)) return false;

  for (std::size_t vi : s.vertexChecks) {
    const VertexConstraint& vc = query_.vertexConstraints[vi];
    std::size_t var = *variableIndex(vc.variable);
    VertexId v = vars_[var].side == Side::Source ? edge.source : edge.target;
    bool in = sets_[vi]->contains(v);
    if (in != (vc.membership == Membership::In)) return false;
  }
  return true;
}

std::string QueryPlan::describe() const {
  std::ostringstream os;
  os << "plan " << id_ << ": " << steps_.size() << " edges, max extent "
     << formatTime(maxExtent_) << " s\n";
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    const PlanStep& s = steps_[i];
    os << "  step " << i << ": " << s.pattern.source << ' ' << s.pattern.label
       << ' ' << s.pattern.target;
    if (i > 0) {
      TimeWindow w = stepWindow(i);
      os << "  window [" << formatTime(w.lo + 0.0) << ", " << formatTime(w.hi + 0.0)
         << "]  bound:";
      if (s.sourceBound) os << ' ' << s.pattern.source;
      if (s.targetBound) os << ' ' << s.pattern.target;
    }
    if (!s.constraints.empty()) {
      os << "  checks:";
      for (std::size_t c : s.constraints)
        os << " {" << text(query_.temporalConstraints[c]) << '}';
    }
    for (std::size_t v : s.vertexChecks)
      os << " {" << text(query_.vertexConstraints[v]) << '}';
    os << '\n';
  }
  return os.str();
}

QueryPlan plan(const SubgraphQuery& query, const PlanOptions& options) {
  if (auto diags = validate(query); !diags.empty()) {
    throw PlanError(PlanErrorKind::InvalidQuery, diags.front().message);
  }
  if (!(options.maxEdgeDuration >= 0.0) || !std::isfinite(options.maxEdgeDuration)) {
    throw PlanError(PlanErrorKind::InvalidQuery,
                    "max edge duration must be finite and non-negative");
  }

  const std::size_t d = query.edges.size();
  std::map<std::string, std::size_t> labelIndex;
  for (std::size_t i = 0; i < d; ++i) labelIndex[query.edges[i].label] = i;

  // The ordering closure uses only facts that always hold (end >= start);
  // the extent closure also assumes durations <= maxEdgeDuration.
  DifferenceBounds order(2 * d);
  DifferenceBounds extent(2 * d);
  for (std::size_t i = 0; i < d; ++i) {
    order.constrain(node(i, TimeSelector::Start), node(i, TimeSelector::End),
                    {0.0, false});
    extent.constrain(node(i, TimeSelector::Start), node(i, TimeSelector::End),
                     {0.0, false});
    extent.constrain(node(i, TimeSelector::End), node(i, TimeSelector::Start),
                     {options.maxEdgeDuration, false});
  }
  for (const auto& c : query.temporalConstraints) {
    addConstraint(order, c, labelIndex);
    addConstraint(extent, c, labelIndex);
  }
  order.close();
  extent.close();
  if (!order.consistent() || !extent.consistent()) {
    throw PlanError(PlanErrorKind::Unsatisfiable,
                    "temporal constraints are contradictory");
  }

  auto before = [&](std::size_t a, std::size_t b) {
    return negative(order.at(node(a, TimeSelector::Start),
                             node(b, TimeSelector::Start)));
  };
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a + 1; b < d; ++b)
      if (!before(a, b) && !before(b, a)) {
        throw PlanError(PlanErrorKind::NoTotalOrder,
                        "no strict start-time order between '" +
                            query.edges[a].label + "' and '" +
                            query.edges[b].label + "'");
      }

  std::vector<std::size_t> perm(d);
  for (std::size_t i = 0; i < d; ++i) perm[i] = i;
  std::sort(perm.begin(), perm.end(), before);

  auto startNode = [&](std::size_t pos) {
    return node(perm[pos], TimeSelector::Start);
  };

  double maxExtent = 0.0;
  if (d > 1) {
    Bound span = extent.at(startNode(d - 1), startNode(0));
    if (span.value == kInf) {
      if (!options.defaultExtent) {
        throw PlanError(PlanErrorKind::UnboundedExtent,
                        "constraints bound no maximum temporal extent");
      }
      extent.constrain(startNode(d - 1), startNode(0),
                       {*options.defaultExtent, false});
      extent.close();
      if (!extent.consistent()) {
        throw PlanError(PlanErrorKind::Unsatisfiable,
                        "default extent contradicts the constraints");
      }
      span = extent.at(startNode(d - 1), startNode(0));
    }
    maxExtent = span.value;
  }

  QueryPlan p;
  p.id_ = options.id;
  p.query_ = query;
  p.maxExtent_ = maxExtent;
  p.maxEdgeDuration_ = options.maxEdgeDuration;
  p.injective_ = options.injective;

  p.windows_.assign(d * d, TimeWindow{0.0, 0.0});
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      double hi = extent.at(startNode(i), startNode(j)).value;
      double lo = -extent.at(startNode(j), startNode(i)).value;
      p.windows_[i * d + j] = TimeWindow{lo, hi};
    }

  std::vector<std::size_t> stepOfEdge(d);
  for (std::size_t pos = 0; pos < d; ++pos) stepOfEdge[perm[pos]] = pos;

  auto varFor = [&](const std::string& name, std::size_t pos, Side side) {
    for (std::size_t v = 0; v < p.vars_.size(); ++v)
      if (p.vars_[v].name == name) return v;
    p.vars_.push_back({name, pos, side});
    return p.vars_.size() - 1;
  };

  for (std::size_t pos = 0; pos < d; ++pos) {
    PlanStep s;
    s.pattern = query.edges[perm[pos]];
    std::size_t before_vars = p.vars_.size();
    s.sourceVar = varFor(s.pattern.source, pos, Side::Source);
    s.sourceBound = s.sourceVar < before_vars;
    s.targetVar = varFor(s.pattern.target, pos, Side::Target);
    s.targetBound = s.targetVar < before_vars;
    if (pos > 0 && !s.sourceBound && !s.targetBound) {
      throw PlanError(PlanErrorKind::Disconnected,
                      "edge '" + s.pattern.label +
                          "' shares no vertex with earlier edges");
    }
    p.steps_.push_back(std::move(s));
  }

  for (std::size_t ci = 0; ci < query.temporalConstraints.size(); ++ci) {
    const auto& c = query.temporalConstraints[ci];
    QueryPlan::CompiledConstraint cc;
    cc.lhsStep = stepOfEdge[labelIndex.at(c.lhs.label)];
    cc.lhsSelector = c.lhs.selector;
    cc.rhsStep = stepOfEdge[labelIndex.at(c.rhs.label)];
    cc.rhsSelector = c.rhs.selector;
    cc.op = c.op;
    cc.comparator = c.comparator;
    cc.bound = c.bound;
    p.compiled_.push_back(cc);
    p.steps_[std::max(cc.lhsStep, cc.rhsStep)].constraints.push_back(ci);
  }

  for (std::size_t vi = 0; vi < query.vertexConstraints.size(); ++vi) {
    const auto& vc = query.vertexConstraints[vi];
    std::shared_ptr<const MembershipPredicate> set =
        options.sets ? options.sets->find(vc.setName) : nullptr;
    if (!set) {
      throw PlanError(PlanErrorKind::UnresolvedSet,
                      "no membership set registered as '" + vc.setName + "'");
    }
    p.sets_.push_back(std::move(set));
    std::size_t var = *p.variableIndex(vc.variable);
    p.steps_[p.vars_[var].step].vertexChecks.push_back(vi);
  }

  return p;
}

}  // namespace tstream::query
