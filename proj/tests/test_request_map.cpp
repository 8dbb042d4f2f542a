#include <random>
#include <set>

#include "support.hpp"
#include "tstream/request_map.hpp"

using namespace tstream;
using test::edge;

namespace {

EdgeRequest req(std::optional<std::string> s, std::optional<std::string> t, double lo,
                double hi, WorkerId from = 2) {
  EdgeRequest r;
  if (s) r.source = VertexId::intern(*s);
  if (t) r.target = VertexId::intern(*t);
  r.window = {lo, hi};
  r.expiry = hi;
  r.requester = from;
  r.queryId = "q";
  r.step = 1;
  return r;
}

}  // namespace

TEST_CASE("store and idempotence") {
  RequestMap m(0, 16);
  auto r = req("C", "A", 0, 10);
  CHECK(r.mode() == IndexMode::Both);
  CHECK(m.addRequest(r));
  CHECK_FALSE(m.addRequest(r));
  CHECK(m.size() == 1);

  auto other = r;
  other.requester = 3;
  CHECK(m.addRequest(other));
  CHECK(m.size() == 2);
}

TEST_CASE("malformed and self requests") {
  RequestMap m(0, 16);
  CHECK_THROWS_AS(m.addRequest(req(std::nullopt, std::nullopt, 0, 1)), MalformedRequest);
  CHECK_THROWS_AS(m.addRequest(req("A", std::nullopt, 5, 1)), MalformedRequest);
  CHECK_THROWS_AS(
      m.addRequest(req("A", std::nullopt, 0, std::numeric_limits<double>::infinity())),
      MalformedRequest);
  CHECK_FALSE(m.addRequest(req("A", std::nullopt, 0, 1, 0)));
  CHECK(m.size() == 0);
}

TEST_CASE("matching edge is forwarded to the requester") {
  RequestMap m(0, 16);
  m.addRequest(req("B", std::nullopt, 0, 10));
  auto f = m.process(edge("B", "C", 1, 0, 7));
  REQUIRE(f.size() == 1);
  CHECK(f[0].destination == 2);
  CHECK(f[0].edge.id == 7);
  CHECK(m.process(edge("B", "C", 1, 0, 7)).empty());
}

TEST_CASE("target and both modes") {
  RequestMap m(0, 16);
  m.addRequest(req(std::nullopt, "A", 0, 10, 1));
  m.addRequest(req("C", "A", 0, 10, 2));
  auto f = m.process(edge("C", "A", 2, 0, 1));
  std::set<WorkerId> dest;
  for (const auto& x : f) dest.insert(x.destination);
  CHECK(dest == std::set<WorkerId>{1, 2});
  auto g = m.process(edge("D", "A", 3, 0, 2));
  REQUIRE(g.size() == 1);
  CHECK(g[0].destination == 1);
}

TEST_CASE("one forward per destination") {
  RequestMap m(0, 16);
  m.addRequest(req("B", std::nullopt, 0, 10));
  m.addRequest(req("B", "C", 0, 10));
  auto wide = req("B", std::nullopt, 0, 20);
  m.addRequest(wide);
  CHECK(m.size() == 3);
  auto f = m.process(edge("B", "C", 1, 0, 5));
  CHECK(f.size() == 1);
}

TEST_CASE("nothing matches") {
  RequestMap m(0, 16);
  m.addRequest(req("B", std::nullopt, 0, 10));
  CHECK(m.process(edge("X", "Y", 1, 0, 1)).empty());
  CHECK(m.process(edge("B", "Y", -0.5, 0, 2)).empty());
  CHECK(m.size() == 1);
}

TEST_CASE("expired requests are erased") {
  RequestMap m(0, 16);
  m.addRequest(req("B", std::nullopt, 0, 10));
  CHECK(m.process(edge("B", "C", 11, 0, 1)).empty());
  CHECK(m.size() == 0);
  CHECK(m.expired() == 1);
}

TEST_CASE("claim forwards stored edges once") {
  RequestMap m(0, 16);
  auto r = req("B", std::nullopt, 0, 10);
  m.addRequest(r);
  std::vector<TemporalEdge> stored{edge("B", "C", 1, 0, 1), edge("B", "D", 12, 0, 2),
                                   edge("X", "B", 2, 0, 3)};
  auto f = m.claim(r, stored);
  REQUIRE(f.size() == 1);
  CHECK(f[0].edge.id == 1);
  CHECK(m.claim(r, stored).empty());
  CHECK(m.process(edge("B", "C", 1, 0, 1)).empty());
  CHECK(m.claim(req("Q", std::nullopt, 0, 10), stored).empty());
}

TEST_CASE("random requests and edges") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> vx(0, 5), who(1, 4), pick(0, 2);
  std::uniform_real_distribution<double> start(0, 50), len(0, 10);
  RequestMap m(0, 8);
  std::vector<EdgeRequest> all;
  std::set<std::pair<WorkerId, EdgeId>> sent;
  double now = 0;
  for (EdgeId id = 1; id <= 3000; ++id) {
    if (id % 3 == 0) {
      double lo = now + start(rng) / 10;
      auto s = "v" + std::to_string(vx(rng)), t = "v" + std::to_string(vx(rng));
      int k = pick(rng);
      auto r = req(k == 1 ? std::nullopt : std::optional(s),
                   k == 0 ? std::nullopt : std::optional(t), lo, lo + len(rng),
                   static_cast<WorkerId>(who(rng)));
      if (m.addRequest(r)) all.push_back(r);
    }
    now += 0.05;
    auto e = edge("v" + std::to_string(vx(rng)), "v" + std::to_string(vx(rng)), now, 0, id);
    std::set<WorkerId> expect;
    for (const auto& r : all)
      if (!r.expired(now) && r.matches(e)) expect.insert(r.requester);
    std::set<WorkerId> got;
    for (const auto& f : m.process(e)) {
      CHECK(sent.insert({f.destination, f.edge.id}).second);
      got.insert(f.destination);
    }
    CHECK(got == expect);
  }
}
