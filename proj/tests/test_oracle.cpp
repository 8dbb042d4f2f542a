#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "support.hpp"
#include "tstream/oracle.hpp"

using namespace tstream;
using test::edge;

namespace {

constexpr const char* kK4 = R"({
  a e1 b; a e2 c; a e3 d; b e4 c; b e5 d; c e6 d;
  starttime(e1) < starttime(e2); starttime(e2) < starttime(e3);
  starttime(e3) < starttime(e4); starttime(e4) < starttime(e5);
  starttime(e5) < starttime(e6);
  starttime(e6) - starttime(e1) <= 10;
})";

double timeOf(const TemporalEdge& e, query::TimeSelector s) {
  return s == query::TimeSelector::Start ? e.startTime : e.endTime();
}

/// Every d-tuple of edges, checked against the query text alone.
oracle::MatchSet bruteForce(const query::QueryPlan& plan,
                            const std::vector<TemporalEdge>& edges) {
  const auto& q = plan.query();
  const auto order = plan.orderedEdges();
  const std::size_t d = order.size();
  oracle::MatchSet out;
  std::vector<std::size_t> pick(d, 0);
  std::vector<std::string> labels;
  for (const auto& p : order) labels.push_back(p.label);
  while (true) {
    bool ok = true;
    std::map<std::string, const TemporalEdge*> byLabel;
    std::map<std::string, VertexId> vars;
    for (std::size_t i = 0; i < d && ok; ++i) {
      const auto& e = edges[pick[i]];
      for (std::size_t j = 0; j < i; ++j) ok &= pick[j] != pick[i];
      byLabel[labels[i]] = &e;
      for (auto [name, v] : {std::pair{order[i].source, e.source},
                             std::pair{order[i].target, e.target}}) {
        auto [it, fresh] = vars.emplace(name, v);
        ok &= fresh || it->second == v;
      }
    }
    if (ok && plan.injective()) {
      std::set<VertexId> distinct;
      for (const auto& [name, v] : vars) distinct.insert(v);
      ok = distinct.size() == vars.size();
    }
    for (const auto& c : q.temporalConstraints) {
      if (!ok) break;
      double a = timeOf(*byLabel[c.lhs.label], c.lhs.selector);
      double b = timeOf(*byLabel[c.rhs.label], c.rhs.selector);
      ok = c.op ? query::compare(*c.op == query::ArithOp::Plus ? a + b : a - b,
                                 c.comparator, c.bound)
                : query::compare(a, c.comparator, b);
    }
    for (std::size_t vi = 0; ok && vi < q.vertexConstraints.size(); ++vi) {
      const auto& vc = q.vertexConstraints[vi];
      bool in = plan.membership(vi).contains(vars.at(vc.variable));
      ok = in == (vc.membership == query::Membership::In);
    }
    if (ok) {
      oracle::Match m;
      for (std::size_t i : pick) m.push_back(edges[i].id);
      out.insert(m);
    }
    std::size_t k = 0;
    while (k < d && ++pick[k] == edges.size()) pick[k++] = 0;
    if (k == d) break;
  }
  return out;
}

std::vector<TemporalEdge> randomEdges(std::mt19937_64& rng, int vertices, int n,
                                      double span, double maxDur = 2) {
  std::uniform_int_distribution<int> vx(0, vertices - 1);
  std::uniform_real_distribution<double> t(0, span), dur(0, maxDur);
  std::vector<TemporalEdge> out;
  for (int i = 0; i < n; ++i)
    out.push_back(edge("o" + std::to_string(vx(rng)), "o" + std::to_string(vx(rng)),
                       std::round(t(rng) * 4) / 4, dur(rng), static_cast<EdgeId>(1000 + i)));
  return out;
}

}  // namespace

TEST_CASE("minimal triangle") {
  auto plan = test::trianglePlan();
  std::vector<TemporalEdge> s{edge("A", "B", 0, 0, 1), edge("B", "C", 1, 0, 2),
                              edge("C", "A", 2, 0, 3)};
  CHECK(oracle::enumerateReference(*plan, s) == oracle::MatchSet{{1, 2, 3}});
  CHECK(oracle::enumerateIndexed(*plan, s) == oracle::MatchSet{{1, 2, 3}});
  s[2].startTime = 12;
  CHECK(oracle::enumerateReference(*plan, s).empty());
  CHECK(oracle::enumerateIndexed(*plan, s).empty());
  s[2].startTime = 10;
  CHECK(oracle::enumerateReference(*plan, s).size() == 1);
}

TEST_CASE("first edge filter") {
  auto plan = test::trianglePlan();
  std::vector<TemporalEdge> s{edge("A", "B", 0, 0, 1), edge("B", "C", 1, 0, 2),
                              edge("C", "A", 2, 0, 3)};
  auto none = [](const TemporalEdge& e) { return e.id != 1; };
  CHECK(oracle::enumerateReference(*plan, s, none).empty());
  CHECK(oracle::enumerateIndexed(*plan, s, none).empty());
}

TEST_CASE("both enumerations agree with brute force on small streams") {
  std::mt19937_64 rng(101);
  auto sets = test::registryWith("Top1000", {"o0", "o1"});
  std::vector<std::shared_ptr<const query::QueryPlan>> plans{
      test::trianglePlan(), test::trianglePlan(true), test::wateringHolePlan(sets),
      test::planOf("{ a e1 b; b e2 a; endtime(e1) < starttime(e2); starttime(e2) - "
                   "endtime(e1) <= 3; }")};
  for (int round = 0; round < 60; ++round) {
    auto plan = plans[round % plans.size()];
    auto s = randomEdges(rng, 3 + round % 3, 22, 20);
    auto brute = bruteForce(*plan, s);
    CAPTURE(plan->id());
    CHECK(oracle::enumerateReference(*plan, s) == brute);
    CHECK(oracle::enumerateIndexed(*plan, s) == brute);
  }
}

TEST_CASE("K4 in time") {
  std::mt19937_64 rng(4);
  query::PlanOptions o;
  o.id = "k4";
  auto plan = test::planOf(kK4, o);
  CHECK(plan->size() == 6);
  std::size_t total = 0;
  for (int round = 0; round < 20; ++round) {
    auto s = randomEdges(rng, 4, 50, 12, 0);
    auto a = oracle::enumerateReference(*plan, s);
    auto b = oracle::enumerateIndexed(*plan, s);
    CHECK(a == b);
    total += a.size();
  }
  CHECK(total > 0);
}

TEST_CASE("input order does not matter") {
  std::mt19937_64 rng(12);
  auto plan = test::trianglePlan();
  for (int round = 0; round < 20; ++round) {
    auto s = randomEdges(rng, 5, 200, 60);
    auto base = oracle::enumerateReference(*plan, s);
    std::shuffle(s.begin(), s.end(), rng);
    CHECK(oracle::enumerateReference(*plan, s) == base);
    CHECK(oracle::enumerateIndexed(*plan, s) == base);
  }
}

TEST_CASE("matches pass every step and non-matches fail one") {
  std::mt19937_64 rng(21);
  auto plan = test::trianglePlan();
  auto s = randomEdges(rng, 4, 120, 30);
  std::map<EdgeId, TemporalEdge> byId;
  for (const auto& e : s) byId[e.id] = e;
  auto matches = oracle::enumerateReference(*plan, s);
  REQUIRE(!matches.empty());
  auto stepwise = [&](const std::vector<TemporalEdge>& t) {
    for (std::size_t i = 0; i < t.size(); ++i)
      if (!plan->satisfiedAt(i, std::span(t).first(i), t[i])) return false;
    return true;
  };
  for (const auto& m : matches) {
    std::vector<TemporalEdge> t;
    for (EdgeId id : m) t.push_back(byId.at(id));
    CHECK(stepwise(t));
    CHECK(oracle::matchSatisfies(*plan, t));
  }
  std::uniform_int_distribution<std::size_t> pick(0, s.size() - 1);
  int checked = 0;
  for (int i = 0; i < 20000; ++i) {
    std::vector<TemporalEdge> t{s[pick(rng)], s[pick(rng)], s[pick(rng)]};
    oracle::Match m{t[0].id, t[1].id, t[2].id};
    bool isMatch = matches.count(m) != 0;
    CHECK(stepwise(t) == isMatch);
    checked += !isMatch;
  }
  CHECK(checked > 0);
}

TEST_CASE("injective matches are the vertex-distinct homomorphic ones") {
  std::mt19937_64 rng(33);
  auto loose = test::trianglePlan(), strict = test::trianglePlan(true);
  for (int round = 0; round < 10; ++round) {
    auto s = randomEdges(rng, 3, 150, 30);
    auto all = oracle::enumerateReference(*loose, s);
    auto inj = oracle::enumerateReference(*strict, s);
    std::map<EdgeId, TemporalEdge> byId;
    for (const auto& e : s) byId[e.id] = e;
    oracle::MatchSet filtered;
    for (const auto& m : all) {
      auto& a = byId[m[0]];
      auto& b = byId[m[1]];
      if (a.source != a.target && a.source != b.target && a.target != b.target)
        filtered.insert(m);
    }
    CHECK(inj == filtered);
  }
}

TEST_CASE("match counts stay under n^d") {
  std::mt19937_64 rng(55);
  auto plan = test::trianglePlan();
  for (int round = 0; round < 10; ++round) {
    auto s = randomEdges(rng, 3 + round % 4, 300, 40);
    auto set = oracle::enumerateReference(*plan, s);
    std::vector<oracle::Match> list(set.begin(), set.end());
    CHECK(static_cast<double>(list.size()) <= std::pow(static_cast<double>(s.size()), 3));
    auto serial = oracle::windowBound(*plan, s, list);
    auto parallel = oracle::windowBoundParallel(*plan, s, list);
    CHECK(serial.violations == 0);
    CHECK(serial.windows == parallel.windows);
    CHECK(serial.violations == parallel.violations);
    CHECK(serial.maxMatches == parallel.maxMatches);
  }
}

TEST_CASE("bound checker notices impossible counts") {
  auto plan = test::trianglePlan();
  std::vector<TemporalEdge> s{edge("A", "B", 0, 0, 1), edge("B", "C", 1, 0, 2),
                              edge("C", "A", 2, 0, 3)};
  std::vector<oracle::Match> fake(28, oracle::Match{1, 2, 3});
  auto r = oracle::windowBound(*plan, s, fake);
  CHECK(r.windows == 1);
  CHECK(r.maxMatches == 28);
  CHECK(r.violations == 1);
  CHECK(oracle::windowBoundParallel(*plan, s, fake).violations == 1);
  auto unknown = oracle::windowBound(*plan, s, {{1, 2, 99}});
  CHECK(unknown.violations == 1);
}
