#include "tstream/query.hpp"

#include <cmath>
#include <set>

#include "tstream/temporal_edge.hpp"

namespace tstream::query {

std::vector<Diagnostic> validate(const SubgraphQuery& query) {
  std::vector<Diagnostic> out;
  if (query.edges.empty()) {
    out.push_back({DiagnosticKind::EmptyQuery, "", "query declares no edges"});
  }

  std::set<std::string> labels;
  std::set<std::string> variables;
  for (const auto& e : query.edges) {
    if (e.label.empty() || e.source.empty() || e.target.empty()) {
      out.push_back({DiagnosticKind::EmptyName, e.label,
                     "edge pattern with an empty name"});
    }
    if (!labels.insert(e.label).second) {
      out.push_back({DiagnosticKind::DuplicateLabel, e.label,
                     "edge label '" + e.label + "' declared twice"});
    }
    variables.insert(e.source);
    variables.insert(e.target);
  }

  auto checkLabel = [&](const EdgeEndpoint& ep) {
    if (!labels.count(ep.label)) {
      out.push_back({DiagnosticKind::UnknownLabel, ep.label,
                     "constraint references undeclared edge '" + ep.label +
                         "'"});
    }
  };
  for (const auto& c : query.temporalConstraints) {
    checkLabel(c.lhs);
    checkLabel(c.rhs);
    if (c.isArithmetic() && !std::isfinite(c.bound)) {
      out.push_back({DiagnosticKind::NonFiniteBound, text(c),
                     "constraint bound is not finite"});
    }
  }
  for (const auto& v : query.vertexConstraints) {
    if (!variables.count(v.variable)) {
      out.push_back({DiagnosticKind::UnknownVariable, v.variable,
                     "vertex constraint on undeclared variable '" +
                         v.variable + "'"});
    }
    if (v.setName.empty()) {
      out.push_back({DiagnosticKind::EmptyName, v.variable,
                     "vertex constraint without a set name"});
    }
  }
  return out;
}

bool compare(double lhs, Comparator comparator, double rhs) noexcept {
  switch (comparator) {
    case Comparator::Less: return lhs < rhs;
    case Comparator::Greater: return lhs > rhs;
    case Comparator::LessEqual: return lhs <= rhs;
    case Comparator::GreaterEqual: return lhs >= rhs;
  }
  return false;
}

std::string_view symbol(Comparator c) noexcept {
  switch (c) {
    case Comparator::Less: return "<";
    case Comparator::Greater: return ">";
    case Comparator::LessEqual: return "<=";
    case Comparator::GreaterEqual: return ">=";
  }
  return "?";
}

std::string_view kindName(DiagnosticKind k) noexcept {
  switch (k) {
    case DiagnosticKind::EmptyQuery: return "EmptyQuery";
    case DiagnosticKind::EmptyName: return "EmptyName";
    case DiagnosticKind::DuplicateLabel: return "DuplicateLabel";
    case DiagnosticKind::UnknownLabel: return "UnknownLabel";
    case DiagnosticKind::UnknownVariable: return "UnknownVariable";
    case DiagnosticKind::NonFiniteBound: return "NonFiniteBound";
  }
  return "?";
}

std::string text(const EdgeEndpoint& e) {
  return std::string(e.selector == TimeSelector::Start ? "starttime("
                                                       : "endtime(") +
         e.label + ")";
}

std::string text(const TemporalConstraint& c) {
  std::string out = text(c.lhs);
  if (c.op) {
    out += *c.op == ArithOp::Plus ? " + " : " - ";
    out += text(c.rhs);
    out += ' ';
    out += symbol(c.comparator);
    out += ' ';
    out += formatTime(c.bound);
  } else {
    out += ' ';
    out += symbol(c.comparator);
    out += ' ';
    out += text(c.rhs);
  }
  return out;
}

std::string text(const VertexConstraint& c) {
  return c.variable + (c.membership == Membership::In ? " in " : " not in ") +
         c.setName;
}

}  // namespace tstream::query
