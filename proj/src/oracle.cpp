#include "tstream/oracle.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>

namespace tstream::oracle {

namespace {

double timeOf(const TemporalEdge& e, query::TimeSelector s) {
  return s == query::TimeSelector::Start ? e.startTime : e.endTime();
}

bool holds(const query::TemporalConstraint& c, const TemporalEdge& l,
           const TemporalEdge& r) {
  double a = timeOf(l, c.lhs.selector);
  double b = timeOf(r, c.rhs.selector);
  if (!c.op) return query::compare(a, c.comparator, b);
  double v = *c.op == query::ArithOp::Plus ? a + b : a - b;
  return query::compare(v, c.comparator, c.bound);
}

std::vector<std::size_t> byStart(std::span<const TemporalEdge> edges) {
  std::vector<std::size_t> order(edges.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return edges[a].startTime < edges[b].startTime;
  });
  return order;
}

Match idsOf(const std::vector<TemporalEdge>& prefix) {
  Match m;
  m.reserve(prefix.size());
  for (const auto& e : prefix) m.push_back(e.id);
  return m;
}

}  // namespace

bool prefixSatisfies(const query::QueryPlan& plan, std::span<const TemporalEdge> prefix) {
  const std::size_t k = prefix.size();
  if (k > plan.size()) return false;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j)
      if (prefix[i].id == prefix[j].id) return false;

  std::map<std::string, VertexId> vars;
  auto bind = [&](const std::string& name, VertexId v) {
    auto [it, fresh] = vars.emplace(name, v);
    return fresh || it->second == v;
  };
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& p = plan.step(i).pattern;
    if (!bind(p.source, prefix[i].source) || !bind(p.target, prefix[i].target))
      return false;
    position[p.label] = i;
  }
  if (plan.injective()) {
    for (auto a = vars.begin(); a != vars.end(); ++a)
      for (auto b = std::next(a); b != vars.end(); ++b)
        if (a->second == b->second) return false;
  }

  const auto& q = plan.query();
  for (const auto& c : q.temporalConstraints) {
    auto l = position.find(c.lhs.label);
    auto r = position.find(c.rhs.label);
    if (l == position.end() || r == position.end()) continue;
    if (!holds(c, prefix[l->second], prefix[r->second])) return false;
  }
  for (std::size_t vi = 0; vi < q.vertexConstraints.size(); ++vi) {
    const auto& vc = q.vertexConstraints[vi];
    auto it = vars.find(vc.variable);
    if (it == vars.end()) continue;
    bool in = plan.membership(vi).contains(it->second);
    if (in != (vc.membership == query::Membership::In)) return false;
  }
  for (std::size_t j = 1; j < k; ++j)
    for (std::size_t i = 0; i < j; ++i)
      if (!plan.window(j, i).contains(prefix[j].startTime - prefix[i].startTime))
        return false;
  return true;
}

MatchSet enumerateReference(const query::QueryPlan& plan,
                            std::span<const TemporalEdge> edges,
                            const FirstEdgeFilter& admitFirst) {
  MatchSet out;
  const std::size_t d = plan.size();
  const auto order = byStart(edges);
  std::vector<double> starts(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) starts[i] = edges[order[i]].startTime;

  std::vector<TemporalEdge> prefix;
  std::function<void(std::size_t)> extend = [&](std::size_t step) {
    if (step == d) {
      out.insert(idsOf(prefix));
      return;
    }
    const double s0 = prefix.front().startTime;
    const auto w = plan.stepWindow(step);
    auto lo = std::lower_bound(starts.begin(), starts.end(), s0 + w.lo) - starts.begin();
    auto hi = std::upper_bound(starts.begin(), starts.end(), s0 + w.hi) - starts.begin();
    for (auto i = lo; i < hi; ++i) {
      prefix.push_back(edges[order[static_cast<std::size_t>(i)]]);
      if (prefixSatisfies(plan, prefix)) extend(step + 1);
      prefix.pop_back();
    }
  };

  for (std::size_t i : order) {
    if (admitFirst && !admitFirst(edges[i])) continue;
    prefix.assign(1, edges[i]);
    if (prefixSatisfies(plan, prefix)) extend(1);
  }
  return out;
}

MatchSet enumerateIndexed(const query::QueryPlan& plan,
                          std::span<const TemporalEdge> edges,
                          const FirstEdgeFilter& admitFirst) {
  const std::size_t d = plan.size();
  const auto order = byStart(edges);
  std::unordered_map<VertexId, std::vector<std::size_t>> out, in;
  for (std::size_t i : order) {
    out[edges[i].source].push_back(i);
    in[edges[i].target].push_back(i);
  }
  std::vector<std::size_t> seeds;
  for (std::size_t i : order)
    if (!admitFirst || admitFirst(edges[i])) seeds.push_back(i);

  auto range = [&](const std::vector<std::size_t>& list, double lo, double hi) {
    auto first = std::lower_bound(list.begin(), list.end(), lo,
                                  [&](std::size_t e, double t) { return edges[e].startTime < t; });
    auto last = std::upper_bound(first, list.end(), hi,
                                 [&](double t, std::size_t e) { return t < edges[e].startTime; });
    return std::make_pair(first, last);
  };
  static const std::vector<std::size_t> kEmpty;

  std::vector<Match> found;
#pragma omp parallel
  {
    std::vector<Match> local;
    std::vector<TemporalEdge> prefix;
    std::map<std::string, VertexId> vars;

    std::function<void(std::size_t)> extend = [&](std::size_t step) {
      if (step == d) {
        local.push_back(idsOf(prefix));
        return;
      }
      const auto& p = plan.step(step).pattern;
      vars.clear();
      for (std::size_t i = 0; i < step; ++i) {
        vars.emplace(plan.step(i).pattern.source, prefix[i].source);
        vars.emplace(plan.step(i).pattern.target, prefix[i].target);
      }
      double lo = -INFINITY, hi = INFINITY;
      for (std::size_t j = 0; j < step; ++j) {
        auto w = plan.window(step, j);
        lo = std::max(lo, prefix[j].startTime + w.lo);
        hi = std::min(hi, prefix[j].startTime + w.hi);
      }
      const std::vector<std::size_t>* list = nullptr;
      if (auto s = vars.find(p.source); s != vars.end()) {
        auto it = out.find(s->second);
        list = it == out.end() ? &kEmpty : &it->second;
      } else if (auto t = vars.find(p.target); t != vars.end()) {
        auto it = in.find(t->second);
        list = it == in.end() ? &kEmpty : &it->second;
      } else {
        return;
      }
      auto [first, last] = range(*list, lo, hi);
      for (auto it = first; it != last; ++it) {
        prefix.push_back(edges[*it]);
        if (prefixSatisfies(plan, prefix)) extend(step + 1);
        prefix.pop_back();
      }
    };

#pragma omp for schedule(dynamic, 16)
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      prefix.assign(1, edges[seeds[s]]);
      if (prefixSatisfies(plan, prefix)) extend(1);
    }
#pragma omp critical
    found.insert(found.end(), std::make_move_iterator(local.begin()),
                 std::make_move_iterator(local.end()));
  }
  return MatchSet(std::make_move_iterator(found.begin()),
                  std::make_move_iterator(found.end()));
}

namespace {

struct Span {
  double first;
  double last;
};

struct BoundInput {
  std::vector<double> starts;    // all edge starts, sorted
  std::vector<Span> spans;       // per match, sorted by first
  std::vector<double> anchors;   // distinct first starts
  double extent = 0.0;
  double d = 1.0;
  std::size_t unknown = 0;       // matches naming edges not in the stream
};

BoundInput prepare(const query::QueryPlan& plan, std::span<const TemporalEdge> edges,
                   const std::vector<Match>& matches) {
  BoundInput in;
  in.extent = plan.maxExtent();
  in.d = static_cast<double>(plan.size());
  std::unordered_map<EdgeId, double> startOf;
  startOf.reserve(edges.size());
  in.starts.reserve(edges.size());
  for (const auto& e : edges) {
    startOf.emplace(e.id, e.startTime);
    in.starts.push_back(e.startTime);
  }
  std::sort(in.starts.begin(), in.starts.end());
  in.spans.reserve(matches.size());
  for (const auto& m : matches) {
    Span s{INFINITY, -INFINITY};
    bool known = !m.empty();
    for (EdgeId id : m) {
      auto it = startOf.find(id);
      if (it == startOf.end()) {
        known = false;
        break;
      }
      s.first = std::min(s.first, it->second);
      s.last = std::max(s.last, it->second);
    }
    if (known) {
      in.spans.push_back(s);
    } else {
      ++in.unknown;
    }
  }
  std::sort(in.spans.begin(), in.spans.end(),
            [](const Span& a, const Span& b) { return a.first < b.first; });
  for (const auto& s : in.spans)
    if (in.anchors.empty() || in.anchors.back() != s.first) in.anchors.push_back(s.first);
  return in;
}

/// Matches inside [t, t + extent] versus the edge count there.
std::pair<std::size_t, bool> windowCheck(const BoundInput& in, double t) {
  const double end = t + in.extent;
  auto first = std::lower_bound(in.spans.begin(), in.spans.end(), t,
                                [](const Span& s, double v) { return s.first < v; });
  std::size_t count = 0;
  for (auto it = first; it != in.spans.end() && it->first <= end; ++it)
    if (it->last <= end) ++count;
  auto lo = std::lower_bound(in.starts.begin(), in.starts.end(), t);
  auto hi = std::upper_bound(in.starts.begin(), in.starts.end(), end);
  double n = static_cast<double>(hi - lo);
  return {count, static_cast<double>(count) > std::pow(n, in.d)};
}

}  // namespace

BoundReport windowBound(const query::QueryPlan& plan, std::span<const TemporalEdge> edges,
                         const std::vector<Match>& matches) {
  BoundInput in = prepare(plan, edges, matches);
  BoundReport r;
  r.windows = in.anchors.size();
  for (double t : in.anchors) {
    auto [count, bad] = windowCheck(in, t);
    r.maxMatches = std::max(r.maxMatches, count);
    if (bad) ++r.violations;
  }
  r.violations += in.unknown;
  return r;
}

BoundReport windowBoundParallel(const query::QueryPlan& plan,
                                 std::span<const TemporalEdge> edges,
                                 const std::vector<Match>& matches) {
  BoundInput in = prepare(plan, edges, matches);
  BoundReport r;
  r.windows = in.anchors.size();
  std::size_t violations = 0, maxMatches = 0;
  const auto n = static_cast<std::ptrdiff_t>(in.anchors.size());
#pragma omp parallel for reduction(+ : violations) reduction(max : maxMatches) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    auto [count, bad] = windowCheck(in, in.anchors[static_cast<std::size_t>(i)]);
    maxMatches = std::max(maxMatches, count);
    if (bad) ++violations;
  }
  r.violations = violations + in.unknown;
  r.maxMatches = maxMatches;
  return r;
}

}  // namespace tstream::oracle
