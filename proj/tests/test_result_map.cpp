#include <algorithm>
#include <map>
#include <mutex>
#include <random>

#include "support.hpp"
#include "tstream/oracle.hpp"
#include "tstream/result_map.hpp"

using namespace tstream;
using test::edge;

namespace {

std::string ownedBy(const Partitioner& p, WorkerId w, const std::string& prefix) {
  for (int i = 0;; ++i) {
    auto name = prefix + std::to_string(i);
    if (p.owner(VertexId::intern(name)) == w) return name;
  }
}

/// One worker's index and result map, fed the way a store would feed it.
struct Rig {
  explicit Rig(std::size_t workers = 1, WorkerId self = 0, double horizon = 1e9)
      : partitioner(std::make_shared<Partitioner>(workers)),
        csr(KeyMode::BySource, 64, horizon),
        csc(KeyMode::ByTarget, 64, horizon),
        map(self, partitioner, csr, csc,
            [this](const IntermediateResult& r) {
              std::lock_guard lock(mutex);
              matches.push_back(r.edgeIds());
            },
            256) {}

  void index(const TemporalEdge& e) {
    csr.addEdge(e);
    csc.addEdge(e);
  }

  /// Index, advance stored results, then open results for the plan.
  std::vector<EdgeRequest> consume(const std::shared_ptr<const query::QueryPlan>& plan,
                                   const TemporalEdge& e) {
    index(e);
    auto requests = map.process(e);
    if (plan->satisfiedAt(0, {}, e)) {
      auto more = map.add(IntermediateResult(plan, e));
      requests.insert(requests.end(), more.begin(), more.end());
    }
    return requests;
  }

  std::shared_ptr<Partitioner> partitioner;
  GraphIndex csr, csc;
  std::mutex mutex;
  std::vector<oracle::Match> matches;
  ResultMap map;
};

}  // namespace

TEST_CASE("intermediate result basics") {
  auto plan = test::trianglePlan();
  IntermediateResult r(plan, edge("A", "B", 0, 0, 1));
  CHECK(r.boundCount() == 1);
  CHECK_FALSE(r.complete());
  CHECK(r.expiry() == 10);
  CHECK(r.nextMode() == IndexMode::Source);
  CHECK(r.nextSource() == VertexId::intern("B"));
  CHECK_FALSE(r.nextTarget());
  auto w = r.nextWindow();
  CHECK(w.lo == 0);
  CHECK(w.hi == 10);

  auto r2 = r.extend(edge("B", "C", 1, 0, 2));
  CHECK(r2.nextMode() == IndexMode::Both);
  CHECK(r2.nextSource() == VertexId::intern("C"));
  CHECK(r2.nextTarget() == VertexId::intern("A"));
  CHECK(r2.nextWindow().lo == 1);
  CHECK(r2.nextWindow().hi == 10);
  CHECK(r2.expiry() == 10);
  CHECK(r2.binding().at("x3") == VertexId::intern("C"));

  auto req = r2.request(3);
  CHECK(req.requester == 3);
  CHECK(req.step == 2);
  CHECK(req.queryId == "triangle");
  CHECK(req.expiry == req.window.hi);
  CHECK(req.mode() == IndexMode::Both);

  auto done = r2.extend(edge("C", "A", 2, 0, 3));
  CHECK(done.complete());
  CHECK(done.edgeIds() == std::vector<EdgeId>{1, 2, 3});
  CHECK(formatMatch(done) == "A,B,0,0\tB,C,1,0\tC,A,2,0");
}

TEST_CASE("process extends a waiting result and keeps the original") {
  auto plan = test::trianglePlan();
  Rig rig;
  auto e1 = edge("A", "B", 0, 0, 1);
  rig.index(e1);
  rig.map.add(IntermediateResult(plan, e1));
  CHECK(rig.map.size() == 1);

  auto e2 = edge("B", "C", 1, 0, 2);
  rig.index(e2);
  CHECK(rig.map.process(e2).empty());
  CHECK(rig.map.size() == 2);
  CHECK(rig.matches.empty());

  // {e1,e2} waits under (C, A): an edge C->D does not complete it
  auto wrong = edge("C", "D", 1.5, 0, 3);
  rig.index(wrong);
  rig.map.process(wrong);
  CHECK(rig.matches.empty());

  auto e3 = edge("C", "A", 2, 0, 4);
  rig.index(e3);
  rig.map.process(e3);
  REQUIRE(rig.matches.size() == 1);
  CHECK(rig.matches[0] == oracle::Match{1, 2, 4});
  CHECK(rig.map.size() == 2);

  std::vector<TemporalEdge> all{e1, e2, wrong, e3};
  CHECK(oracle::enumerateReference(*plan, all) == oracle::MatchSet{{1, 2, 4}});
}

TEST_CASE("process with an unrelated edge") {
  auto plan = test::trianglePlan();
  Rig rig;
  auto e1 = edge("A", "B", 0, 0, 1);
  rig.index(e1);
  rig.map.add(IntermediateResult(plan, e1));
  auto x = edge("X", "Y", 1, 0, 2);
  rig.index(x);
  CHECK(rig.map.process(x).empty());
  CHECK(rig.map.size() == 1);
  CHECK(rig.map.stored() == 1);
}

TEST_CASE("expired results are erased from touched slots") {
  auto plan = test::trianglePlan();
  Rig rig;
  auto e1 = edge("A", "B", 0, 0, 1);
  rig.index(e1);
  rig.map.add(IntermediateResult(plan, e1));
  auto late = edge("B", "Z", 11, 0, 2);
  rig.index(late);
  CHECK(rig.map.process(late).empty());
  CHECK(rig.map.size() == 0);
  CHECK(rig.map.expired() == 1);

  // exactly at expiry the result is still live
  Rig edge10;
  edge10.index(e1);
  edge10.map.add(IntermediateResult(plan, e1));
  auto at = edge("B", "Z", 10, 0, 3);
  edge10.index(at);
  edge10.map.process(at);
  CHECK(edge10.map.size() == 2);
}

TEST_CASE("add completes against the local graph") {
  auto plan = test::trianglePlan();
  Rig rig;
  auto e1 = edge("A", "B", 0, 0, 1);
  rig.index(edge("B", "C", 1, 0, 2));
  rig.index(edge("C", "A", 2, 0, 3));
  rig.index(e1);
  CHECK(rig.map.add(IntermediateResult(plan, e1)).empty());
  REQUIRE(rig.matches.size() == 1);
  CHECK(rig.matches[0] == oracle::Match{1, 2, 3});
  CHECK(rig.map.emitted() == 1);
  // the partial prefixes stay behind for edges that have not arrived yet
  CHECK(rig.map.size() == 2);
}

TEST_CASE("add into an empty graph stores once and asks the owner") {
  auto plan = test::trianglePlan();
  Rig rig(2, 0);
  auto a = ownedBy(*rig.partitioner, 0, "a");
  auto b = ownedBy(*rig.partitioner, 1, "b");
  auto e1 = edge(a, b, 0, 0, 1);
  rig.index(e1);
  auto requests = rig.map.add(IntermediateResult(plan, e1));
  CHECK(rig.map.size() == 1);
  REQUIRE(requests.size() == 1);
  CHECK(requests[0].source == VertexId::intern(b));
  CHECK_FALSE(requests[0].target);
  CHECK(requests[0].step == 1);
  CHECK(requests[0].requester == 0);
  CHECK(requestDestination(requests[0], *rig.partitioner) == 1);

  // locally owned next key: no request
  Rig local(2, 0);
  auto c = ownedBy(*local.partitioner, 0, "c");
  auto e = edge(a, c, 0, 0, 2);
  local.index(e);
  CHECK(local.map.add(IntermediateResult(plan, e)).empty());
}

TEST_CASE("add of a complete result emits exactly once") {
  auto plan = test::planOf("{ a e1 b; }");
  Rig rig;
  auto e = edge("A", "B", 0, 0, 9);
  rig.index(e);
  CHECK(rig.map.add(IntermediateResult(plan, e)).empty());
  CHECK(rig.matches == std::vector<oracle::Match>{{9}});
  CHECK(rig.map.size() == 0);
}

TEST_CASE("processAgainstGraph") {
  auto plan = test::trianglePlan();
  Rig rig;
  auto e1 = edge("A", "B", 0, 0, 1);

  SUBCASE("chain") {
    rig.index(edge("B", "C", 1, 0, 2));
    rig.index(edge("C", "A", 2, 0, 3));
    auto out = rig.map.processAgainstGraph({IntermediateResult(plan, e1)});
    REQUIRE(out.size() == 3);
    CHECK(out[0].edgeIds() == std::vector<EdgeId>{1});
    CHECK(out[1].edgeIds() == std::vector<EdgeId>{1, 2});
    CHECK(out[2].edgeIds() == std::vector<EdgeId>{1, 2, 3});
  }
  SUBCASE("complete results are left alone") {
    rig.index(edge("B", "C", 1, 0, 2));
    auto done = IntermediateResult(plan, e1)
                    .extend(edge("B", "C", 1, 0, 2))
                    .extend(edge("C", "A", 2, 0, 3));
    auto out = rig.map.processAgainstGraph({done});
    REQUIRE(out.size() == 1);
    CHECK(out[0].edgeIds() == std::vector<EdgeId>{1, 2, 3});
  }
  SUBCASE("branching") {
    rig.index(edge("B", "C", 1, 0, 2));
    rig.index(edge("B", "D", 1.5, 0, 3));
    rig.index(edge("B", "E", 20, 0, 4));
    auto out = rig.map.processAgainstGraph({IntermediateResult(plan, e1)});
    std::set<std::vector<EdgeId>> got;
    for (const auto& r : out) got.insert(r.edgeIds());
    CHECK(got == std::set<std::vector<EdgeId>>{{1}, {1, 2}, {1, 3}});
  }
}

namespace {

std::vector<TemporalEdge> randomStream(std::mt19937_64& rng, int vertices, int n,
                                       double gap) {
  std::uniform_int_distribution<int> vx(0, vertices - 1);
  std::uniform_real_distribution<double> dur(0, 2);
  std::vector<TemporalEdge> out;
  for (int i = 0; i < n; ++i) {
    int s = vx(rng), t = vx(rng);
    out.push_back(edge("r" + std::to_string(s), "r" + std::to_string(t), i * gap,
                       dur(rng), static_cast<EdgeId>(i + 1)));
  }
  return out;
}

}  // namespace

TEST_CASE("single map over random streams") {
  std::mt19937_64 rng(31);
  auto sets = test::registryWith("Top1000", {"r0", "r1", "r2"});
  std::vector<std::shared_ptr<const query::QueryPlan>> plans{
      test::trianglePlan(), test::trianglePlan(true), test::wateringHolePlan(sets)};
  for (int round = 0; round < 30; ++round) {
    auto plan = plans[round % plans.size()];
    auto stream = randomStream(rng, 6 + round % 5, 300, 0.25);
    Rig rig(1, 0, plan->maxExtent());
    for (const auto& e : stream) rig.consume(plan, e);

    std::vector<oracle::Match> sorted = rig.matches;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());

    std::map<EdgeId, TemporalEdge> byId;
    for (const auto& e : stream) byId[e.id] = e;
    for (const auto& m : rig.matches) {
      std::vector<TemporalEdge> edges;
      for (EdgeId id : m) edges.push_back(byId.at(id));
      CHECK(oracle::matchSatisfies(*plan, edges));
    }

    auto expected = oracle::enumerateReference(*plan, stream);
    CHECK(oracle::MatchSet(sorted.begin(), sorted.end()) == expected);
  }
}

TEST_CASE("a superset stream yields a superset of matches") {
  std::mt19937_64 rng(8);
  auto plan = test::trianglePlan();
  for (int round = 0; round < 20; ++round) {
    auto full = randomStream(rng, 7, 250, 0.2);
    std::vector<TemporalEdge> sub;
    std::bernoulli_distribution keep(0.7);
    for (const auto& e : full)
      if (keep(rng)) sub.push_back(e);

    Rig a(1, 0, plan->maxExtent()), b(1, 0, plan->maxExtent());
    for (const auto& e : sub) a.consume(plan, e);
    for (const auto& e : full) b.consume(plan, e);
    oracle::MatchSet small(a.matches.begin(), a.matches.end());
    oracle::MatchSet big(b.matches.begin(), b.matches.end());
    CHECK(std::includes(big.begin(), big.end(), small.begin(), small.end()));
  }
}
