#pragma once

#include <memory>
#include <string_view>
#include <string>
#include <unordered_set>
#include <vector>

#include "doctest.h"
#include "tstream/membership.hpp"
#include "tstream/query_plan.hpp"
#include "tstream/sal_parser.hpp"
#include "tstream/temporal_edge.hpp"

namespace doctest {
template <>
struct StringMaker<tstream::query::DiagnosticKind> {
  static String convert(tstream::query::DiagnosticKind k) {
    return String(std::string(tstream::query::kindName(k)).c_str());
  }
};
template <>
struct StringMaker<tstream::query::Comparator> {
  static String convert(tstream::query::Comparator c) {
    return String(std::string(tstream::query::symbol(c)).c_str());
  }
};
}  // namespace doctest

namespace tstream::test {

inline constexpr const char* kTriangle = R"({
  x1 e1 x2;
  x2 e2 x3;
  x3 e3 x1;
  starttime(e3) - starttime(e1) <= 10;
  startime(e1) < starttime(e2);
  starttime(e2) < starttime(e3);
})";

inline constexpr const char* kWateringHole = R"({ target e1 bait;
  target e2 controller;
  starttime(e2) > endtime(e1);
  starttime(e2) - endtime(e1) < 20;
  bait in Top1000;
  controller not in Top1000; })";

inline constexpr const char* kFullProgram = R"(//Preamble Statements
WindowSize = 1000 

// Connection Statements
Netflows = VastStream("localhost", 9999);

// Partition Statements
PARTITION Netflows By SourceIp, DestIp;
HASH SourceIp WITH IpHashFunction;
HASH DestIp WITH IpHashFunction; 

// Defining Features
Top1000 = FOREACH Netflows 
            GENERATE topk(DestIp, 100000, 
                         10000, 1000);

// Subgraph definition
Subgraph on Netflows with source(SourceIp) 
  and target(DestIp)
{
  target e1 bait;
  target e2 controller;
  starttime(e2) > endtime(e1);
  starttime(e2) - endtime(e1) < 20;
  bait in Top1000;
  controller not in Top1000;
}	
)";

inline TemporalEdge edge(const std::string& s, const std::string& t, double start,
                         double dur = 0.0, EdgeId id = 0) {
  TemporalEdge e;
  e.source = VertexId::intern(s);
  e.target = VertexId::intern(t);
  e.startTime = start;
  e.duration = dur;
  e.id = id;
  return e;
}

inline std::shared_ptr<MembershipRegistry> registryWith(
    const std::string& name, const std::vector<std::string>& members) {
  std::unordered_set<VertexId> set;
  for (const auto& m : members) set.insert(VertexId::intern(m));
  auto reg = std::make_shared<MembershipRegistry>();
  reg->add(name, std::make_shared<StaticVertexSet>(std::move(set)));
  return reg;
}

inline std::shared_ptr<const query::QueryPlan> planOf(
    const std::string& text, query::PlanOptions options = {}) {
  return std::make_shared<const query::QueryPlan>(
      query::plan(sal::parseQuery(text), options));
}

inline std::shared_ptr<const query::QueryPlan> trianglePlan(bool injective = false) {
  query::PlanOptions o;
  o.id = "triangle";
  o.injective = injective;
  return planOf(kTriangle, o);
}

inline std::shared_ptr<const query::QueryPlan> wateringHolePlan(
    std::shared_ptr<MembershipRegistry> sets) {
  query::PlanOptions o;
  o.id = "watering_hole";
  o.sets = std::move(sets);
  return planOf(kWateringHole, o);
}

}  // namespace tstream::test
