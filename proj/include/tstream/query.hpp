#pragma once

#include <optional>
#include <string>
#include <vector>

namespace tstream::query {

enum class TimeSelector { Start, End };

/// starttime(label) or endtime(label).
struct EdgeEndpoint {
  std::string label;
  TimeSelector selector = TimeSelector::Start;

  friend bool operator==(const EdgeEndpoint&, const EdgeEndpoint&) = default;
};

enum class Comparator { Less, Greater, LessEqual, GreaterEqual };
enum class ArithOp { Plus, Minus };

/// One of the two constraint forms:
///   lhs <cmp> rhs                 (op empty)
///   lhs <op> rhs <cmp> bound      (op set, bound in seconds)
struct TemporalConstraint {
  EdgeEndpoint lhs;
  std::optional<ArithOp> op;
  EdgeEndpoint rhs;
  Comparator comparator = Comparator::Less;
  double bound = 0.0;

  bool isArithmetic() const noexcept { return op.has_value(); }

  friend bool operator==(const TemporalConstraint&,
                         const TemporalConstraint&) = default;
};

/// `source label target` as written in the query.
struct EdgePattern {
  std::string label;
  std::string source;
  std::string target;

  friend bool operator==(const EdgePattern&, const EdgePattern&) = default;
};

enum class Membership { In, NotIn };

struct VertexConstraint {
  std::string variable;
  Membership membership = Membership::In;
  std::string setName;

  friend bool operator==(const VertexConstraint&,
                         const VertexConstraint&) = default;
};

struct SubgraphQuery {
  std::vector<EdgePattern> edges;
  std::vector<TemporalConstraint> temporalConstraints;
  std::vector<VertexConstraint> vertexConstraints;

  friend bool operator==(const SubgraphQuery&, const SubgraphQuery&) = default;
};

enum class DiagnosticKind {
  EmptyQuery,
  EmptyName,
  DuplicateLabel,
  UnknownLabel,
  UnknownVariable,
  NonFiniteBound,
};

struct Diagnostic {
  DiagnosticKind kind;
  std::string subject;
  std::string message;
};

/// Structural checks.  Empty result means the query can be planned
/// (planning may still reject it on ordering or connectivity grounds).
std::vector<Diagnostic> validate(const SubgraphQuery& query);

/// Evaluates `comparator` on two numbers.
bool compare(double lhs, Comparator comparator, double rhs) noexcept;

std::string_view symbol(Comparator c) noexcept;
std::string_view kindName(DiagnosticKind k) noexcept;
std::string text(const EdgeEndpoint& e);
std::string text(const TemporalConstraint& c);
std::string text(const VertexConstraint& c);

}  // namespace tstream::query
