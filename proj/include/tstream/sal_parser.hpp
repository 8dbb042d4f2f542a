#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tstream/query.hpp"

namespace tstream::sal {

/// Fields of the netflow tuple that PARTITION / source() / target() may name.
const std::vector<std::string>& tupleFields();
/// Hash functions a HASH statement may name.
const std::vector<std::string>& builtinHashes();
/// Stream kinds a connection statement may name.
const std::vector<std::string>& supportedStreamKinds();

struct Connection {
  std::string name;
  std::string kind;
  std::string host;
  int port = 0;

  friend bool operator==(const Connection&, const Connection&) = default;
};

struct Partition {
  std::string stream;
  std::vector<std::string> keys;
  /// key field -> hash function name
  std::map<std::string, std::string> hashes;

  friend bool operator==(const Partition&, const Partition&) = default;
};

/// A FOREACH ... GENERATE statement kept only as text.
struct Feature {
  std::string name;
  std::string text;

  friend bool operator==(const Feature&, const Feature&) = default;
};

struct Subgraph {
  std::string stream;
  std::string sourceField;
  std::string targetField;
  query::SubgraphQuery query;

  friend bool operator==(const Subgraph&, const Subgraph&) = default;
};

enum class WarningKind { FeatureUnsupported, DeprecatedSpelling };

struct Warning {
  WarningKind kind;
  std::size_t line = 0;
  std::size_t column = 0;
  std::string message;
};

struct SalProgram {
  std::vector<std::pair<std::string, double>> preamble;
  Connection connection;
  std::optional<Partition> partition;
  std::vector<Feature> features;
  Subgraph subgraph;
  /// Not part of equality.
  std::vector<Warning> warnings;

  std::optional<double> constant(std::string_view name) const;

  friend bool operator==(const SalProgram& a, const SalProgram& b) {
    return a.preamble == b.preamble && a.connection == b.connection &&
           a.partition == b.partition && a.features == b.features &&
           a.subgraph == b.subgraph;
  }
};

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(std::size_t line, std::size_t column, std::string message,
              std::vector<std::string> expected = {});

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }
  /// `line:col: message`
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string detail_;
  std::vector<std::string> expected_;
};

/// Parses a full program.  Text that starts with `{` is a bare subgraph
/// block and gets the default connection and subgraph header.
SalProgram parseProgram(std::string_view text);

/// Parses the body of a bare `{ ... }` block.
query::SubgraphQuery parseQuery(std::string_view text);

/// Parses one temporal constraint, without the trailing `;`.
query::TemporalConstraint parseConstraint(std::string_view text);

/// Canonical program text; parseProgram(print(p)) == p.
std::string print(const SalProgram& program);

}  // namespace tstream::sal
