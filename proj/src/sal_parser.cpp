#include "tstream/sal_parser.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "tstream/temporal_edge.hpp"

namespace tstream::sal {

const std::vector<std::string>& tupleFields() {
  static const std::vector<std::string> fields = {
      "TimeSeconds", "DurationSeconds", "SourceIp", "DestIp",
      "SourcePort",  "DestPort",        "Protocol"};
  return fields;
}

const std::vector<std::string>& builtinHashes() {
  static const std::vector<std::string> names = {"IpHashFunction"};
  return names;
}

const std::vector<std::string>& supportedStreamKinds() {
  static const std::vector<std::string> kinds = {"VastStream"};
  return kinds;
}

std::optional<double> SalProgram::constant(std::string_view name) const {
  for (const auto& [k, v] : preamble)
    if (k == name) return v;
  return std::nullopt;
}

namespace {

std::string joinExpected(const std::vector<std::string>& expected) {
  std::string out;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i) out += i + 1 == expected.size() ? " or " : ", ";
    out += expected[i];
  }
  return out;
}

}  // namespace

SyntaxError::SyntaxError(std::size_t line, std::size_t column,
                         std::string message, std::vector<std::string> expected)
    : std::runtime_error(message),
      line_(line),
      column_(column),
      expected_(std::move(expected)) {
  detail_ = std::to_string(line_) + ":" + std::to_string(column_) + ": " +
            message;
  if (!expected_.empty()) detail_ += " (expected " + joinExpected(expected_) + ")";
}

namespace {

enum class Tok { Ident, Number, String, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;  // raw text; for strings, without quotes
  std::size_t line = 1;
  std::size_t column = 1;
};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           auto lower = [](char c) {
             return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
           };
           return lower(x) == lower(y);
         });
}

bool identStart(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool identChar(char c) { return identStart(c) || (c >= '0' && c <= '9'); }
bool digit(char c) { return c >= '0' && c <= '9'; }

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' ||
        c == '\v') {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.column = col;
    if (identStart(c)) {
      std::size_t j = i;
      while (j < src.size() && identChar(src[j])) ++j;
      t.kind = Tok::Ident;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (digit(c) || (c == '.' && i + 1 < src.size() && digit(src[i + 1]))) {
      std::size_t j = i;
      while (j < src.size() && digit(src[j])) ++j;
      if (j < src.size() && src[j] == '.') {
        ++j;
        while (j < src.size() && digit(src[j])) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && digit(src[k])) {
          while (k < src.size() && digit(src[k])) ++k;
          j = k;
        }
      }
      t.kind = Tok::Number;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (c == '"') {
      std::size_t j = i + 1;
      while (j < src.size() && src[j] != '"' && src[j] != '\n') ++j;
      if (j >= src.size() || src[j] != '"')
        throw SyntaxError(line, col, "unterminated string literal");
      t.kind = Tok::String;
      t.text = std::string(src.substr(i + 1, j - i - 1));
      advance(j + 1 - i);
    } else if (c == '<' || c == '>') {
      t.kind = Tok::Punct;
      if (i + 1 < src.size() && src[i + 1] == '=') {
        t.text = std::string{c, '='};
        advance(2);
      } else {
        t.text = std::string(1, c);
        advance(1);
      }
    } else if (std::string_view("{}();,=+-*/").find(c) != std::string_view::npos) {
      t.kind = Tok::Punct;
      t.text = std::string(1, c);
      advance(1);
    } else {
      std::ostringstream msg;
      msg << "unexpected character";
      if (static_cast<unsigned char>(c) >= 0x20 &&
          static_cast<unsigned char>(c) < 0x7f) {
        msg << " '" << c << "'";
      } else {
        msg << " 0x" << std::hex << static_cast<unsigned>(static_cast<unsigned char>(c));
      }
      throw SyntaxError(line, col, msg.str());
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Tok::End;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::End: return "end of input";
    case Tok::String: return "string \"" + t.text + "\"";
    default: return "'" + t.text + "'";
  }
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(tokenize(text)) {}

  SalProgram program();
  query::SubgraphQuery bareBlock();
  query::TemporalConstraint singleConstraint();

 private:
  enum class Phase { Preamble, Connection, Partition, Features, Subgraph };

  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }

  bool isPunct(const Token& t, std::string_view p) const {
    return t.kind == Tok::Punct && t.text == p;
  }
  bool isKeyword(const Token& t, std::string_view kw) const {
    return t.kind == Tok::Ident && iequals(t.text, kw);
  }

  [[noreturn]] void failExpected(const Token& at, std::vector<std::string> expected) const {
    throw SyntaxError(at.line, at.column, "unexpected " + describe(at),
                      std::move(expected));
  }
  [[noreturn]] void fail(const Token& at, const std::string& message) const {
    throw SyntaxError(at.line, at.column, message);
  }

  void expectPunct(std::string_view p) {
    if (!isPunct(peek(), p)) failExpected(peek(), {"'" + std::string(p) + "'"});
    next();
  }
  void expectKeyword(std::string_view kw) {
    if (!isKeyword(peek(), kw)) failExpected(peek(), {std::string(kw)});
    next();
  }
  std::string expectIdent(const std::string& what) {
    if (peek().kind != Tok::Ident) failExpected(peek(), {what});
    return next().text;
  }
  double expectSignedNumber();

  void preambleStatement(SalProgram& p);
  void connectionStatement(SalProgram& p);
  void partitionStatement(SalProgram& p);
  void hashStatement(SalProgram& p);
  void featureStatement(SalProgram& p);
  void subgraphStatement(SalProgram& p);
  void blockBody(query::SubgraphQuery& q, bool braced = true);
  query::EdgeEndpoint edgeExpr();
  query::TemporalConstraint constraint();
  std::optional<query::Comparator> comparator();

  void enterPhase(Phase phase, const Token& at, const char* what);

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Phase phase_ = Phase::Preamble;
  bool haveConnection_ = false;
  std::vector<Warning> warnings_;
};

double Parser::expectSignedNumber() {
  const Token& start = peek();
  bool negate = false;
  if (isPunct(peek(), "-") || isPunct(peek(), "+")) {
    negate = next().text == "-";
  }
  if (peek().kind != Tok::Number) failExpected(peek(), {"number"});
  const Token& t = next();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
  if (ec != std::errc() || ptr != t.text.data() + t.text.size() || !std::isfinite(v))
    fail(start, "number out of range: " + t.text);
  return negate ? -v : v;
}

void Parser::enterPhase(Phase phase, const Token& at, const char* what) {
  if (phase < phase_) {
    fail(at, std::string(what) + " statement out of order");
  }
  phase_ = phase;
}

SalProgram Parser::program() {
  SalProgram p;
  if (isPunct(peek(), "{")) {
    p.connection = {"Netflows", "VastStream", "localhost", 9999};
    p.subgraph.stream = "Netflows";
    p.subgraph.sourceField = "SourceIp";
    p.subgraph.targetField = "DestIp";
    next();
    blockBody(p.subgraph.query);
    expectPunct("}");
    if (isPunct(peek(), ";")) next();
    if (peek().kind != Tok::End) failExpected(peek(), {"end of input"});
    p.warnings = std::move(warnings_);
    return p;
  }

  bool haveSubgraph = false;
  while (peek().kind != Tok::End) {
    const Token& t = peek();
    if (haveSubgraph) failExpected(t, {"end of input"});
    if (isKeyword(t, "PARTITION")) {
      partitionStatement(p);
    } else if (isKeyword(t, "HASH")) {
      hashStatement(p);
    } else if (isKeyword(t, "Subgraph") && peek(1).kind == Tok::Ident &&
               isKeyword(peek(1), "on")) {
      subgraphStatement(p);
      haveSubgraph = true;
    } else if (t.kind == Tok::Ident && isPunct(peek(1), "=")) {
      const Token& rhs = peek(2);
      if (rhs.kind == Tok::Number || isPunct(rhs, "-") || isPunct(rhs, "+")) {
        preambleStatement(p);
      } else if (isKeyword(rhs, "FOREACH")) {
        featureStatement(p);
      } else if (rhs.kind == Tok::Ident && isPunct(peek(3), "(")) {
        connectionStatement(p);
      } else {
        failExpected(rhs, {"number", "stream kind", "FOREACH"});
      }
    } else {
      failExpected(t, {"constant or stream declaration", "PARTITION", "HASH",
               "Subgraph"});
    }
  }
  if (!haveConnection_) {
    fail(peek(), "missing connection statement");
  }
  if (!haveSubgraph) failExpected(peek(), {"Subgraph"});
  p.warnings = std::move(warnings_);
  return p;
}

void Parser::preambleStatement(SalProgram& p) {
  const Token& at = peek();
  enterPhase(Phase::Preamble, at, "preamble");
  std::string name = next().text;
  expectPunct("=");
  double v = expectSignedNumber();
  if (p.constant(name)) fail(at, "duplicate constant '" + name + "'");
  p.preamble.emplace_back(name, v);
  if (isPunct(peek(), ";")) next();
}

void Parser::connectionStatement(SalProgram& p) {
  const Token& at = peek();
  if (haveConnection_) fail(at, "only one connection statement is allowed");
  enterPhase(Phase::Connection, at, "connection");
  Connection c;
  c.name = next().text;
  expectPunct("=");
  const Token& kind = next();
  if (!contains(supportedStreamKinds(), kind.text)) {
    fail(kind, "unknown stream kind '" + kind.text + "'; supported: " +
                   joinExpected(supportedStreamKinds()));
  }
  c.kind = kind.text;
  expectPunct("(");
  if (peek().kind != Tok::String) failExpected(peek(), {"host string"});
  c.host = next().text;
  expectPunct(",");
  const Token& portTok = peek();
  double port = expectSignedNumber();
  if (port < 0 || port > 65535 || port != std::floor(port))
    fail(portTok, "port must be an integer in [0, 65535]");
  c.port = static_cast<int>(port);
  expectPunct(")");
  expectPunct(";");
  p.connection = std::move(c);
  haveConnection_ = true;
}

void Parser::partitionStatement(SalProgram& p) {
  const Token& at = peek();
  if (!haveConnection_) fail(at, "PARTITION before connection statement");
  enterPhase(Phase::Partition, at, "PARTITION");
  if (p.partition) fail(at, "only one PARTITION statement is allowed");
  next();
  Partition part;
  const Token& streamTok = peek();
  part.stream = expectIdent("stream name");
  if (part.stream != p.connection.name)
    fail(streamTok, "unknown stream '" + part.stream + "'");
  expectKeyword("By");
  for (;;) {
    const Token& keyTok = peek();
    std::string key = expectIdent("field name");
    if (!contains(tupleFields(), key))
      fail(keyTok, "'" + key + "' is not a field of " + p.connection.kind);
    if (contains(part.keys, key)) fail(keyTok, "duplicate partition key '" + key + "'");
    part.keys.push_back(key);
    if (!isPunct(peek(), ",")) break;
    next();
  }
  expectPunct(";");
  p.partition = std::move(part);
}

void Parser::hashStatement(SalProgram& p) {
  const Token& at = peek();
  if (!p.partition) fail(at, "HASH before PARTITION statement");
  enterPhase(Phase::Partition, at, "HASH");
  next();
  const Token& keyTok = peek();
  std::string key = expectIdent("field name");
  if (!contains(p.partition->keys, key))
    fail(keyTok, "'" + key + "' is not a partition key");
  expectKeyword("WITH");
  const Token& fnTok = peek();
  std::string fn = expectIdent("hash function name");
  if (!contains(builtinHashes(), fn)) {
    fail(fnTok, "unknown hash function '" + fn + "'; built-in: " +
                    joinExpected(builtinHashes()));
  }
  if (p.partition->hashes.count(key)) fail(keyTok, "duplicate HASH for '" + key + "'");
  p.partition->hashes[key] = fn;
  expectPunct(";");
}

void Parser::featureStatement(SalProgram& p) {
  const Token& at = peek();
  if (!haveConnection_) fail(at, "feature definition before connection statement");
  enterPhase(Phase::Features, at, "feature");
  Feature f;
  f.name = at.text;
  std::string text;
  int depth = 0;
  while (true) {
    const Token& t = peek();
    if (t.kind == Tok::End) failExpected(t, {"';'"});
    if (depth == 0 && isPunct(t, ";")) break;
    if (isPunct(t, "(")) ++depth;
    if (isPunct(t, ")")) {
      if (depth == 0) failExpected(t, {"';'"});
      --depth;
    }
    if (!text.empty()) text += ' ';
    text += t.kind == Tok::String ? "\"" + t.text + "\"" : t.text;
    next();
  }
  next();
  f.text = std::move(text);
  warnings_.push_back({WarningKind::FeatureUnsupported, at.line, at.column,
                       "feature '" + f.name + "' ignored: FOREACH GENERATE is not supported"});
  p.features.push_back(std::move(f));
}

void Parser::subgraphStatement(SalProgram& p) {
  const Token& at = peek();
  if (!haveConnection_) fail(at, "Subgraph before connection statement");
  enterPhase(Phase::Subgraph, at, "Subgraph");
  next();
  expectKeyword("on");
  const Token& streamTok = peek();
  p.subgraph.stream = expectIdent("stream name");
  if (p.subgraph.stream != p.connection.name)
    fail(streamTok, "unknown stream '" + p.subgraph.stream + "'");
  expectKeyword("with");
  auto field = [&](const char* kw, std::string& out) {
    expectKeyword(kw);
    expectPunct("(");
    const Token& ft = peek();
    out = expectIdent("field name");
    if (!contains(tupleFields(), out))
      fail(ft, "'" + out + "' is not a field of " + p.connection.kind);
    expectPunct(")");
  };
  field("source", p.subgraph.sourceField);
  expectKeyword("and");
  field("target", p.subgraph.targetField);
  expectPunct("{");
  blockBody(p.subgraph.query);
  expectPunct("}");
  if (isPunct(peek(), ";")) next();
}

void Parser::blockBody(query::SubgraphQuery& q, bool braced) {
  auto closing = [&] { return braced ? isPunct(peek(), "}") : peek().kind == Tok::End; };
  while (!closing()) {
    const Token& t = peek();
    if (t.kind != Tok::Ident) failExpected(t, {"edge pattern", "constraint", "'}'"});
    if ((isKeyword(t, "starttime") || isKeyword(t, "endtime") ||
         isKeyword(t, "startime")) &&
        isPunct(peek(1), "(")) {
      q.temporalConstraints.push_back(constraint());
    } else if (isKeyword(peek(1), "in") ||
               (isKeyword(peek(1), "not") && isKeyword(peek(2), "in"))) {
      query::VertexConstraint vc;
      vc.variable = next().text;
      if (isKeyword(peek(), "not")) {
        next();
        vc.membership = query::Membership::NotIn;
      } else {
        vc.membership = query::Membership::In;
      }
      next();
      vc.setName = expectIdent("set name");
      q.vertexConstraints.push_back(std::move(vc));
    } else {
      query::EdgePattern e;
      e.source = next().text;
      e.label = expectIdent("edge label");
      e.target = expectIdent("vertex variable");
      q.edges.push_back(std::move(e));
    }
    if (closing()) break;
    expectPunct(";");
  }
}

query::EdgeEndpoint Parser::edgeExpr() {
  const Token& t = peek();
  query::EdgeEndpoint e;
  if (isKeyword(t, "starttime")) {
    e.selector = query::TimeSelector::Start;
  } else if (isKeyword(t, "startime")) {
    e.selector = query::TimeSelector::Start;
    warnings_.push_back({WarningKind::DeprecatedSpelling, t.line, t.column,
                         "'" + t.text + "' read as 'starttime'"});
  } else if (isKeyword(t, "endtime")) {
    e.selector = query::TimeSelector::End;
  } else {
    failExpected(t, {"starttime", "endtime"});
  }
  next();
  expectPunct("(");
  e.label = expectIdent("edge label");
  expectPunct(")");
  return e;
}

std::optional<query::Comparator> Parser::comparator() {
  const Token& t = peek();
  if (t.kind != Tok::Punct) return std::nullopt;
  std::optional<query::Comparator> c;
  if (t.text == "<") c = query::Comparator::Less;
  if (t.text == ">") c = query::Comparator::Greater;
  if (t.text == "<=") c = query::Comparator::LessEqual;
  if (t.text == ">=") c = query::Comparator::GreaterEqual;
  if (c) next();
  return c;
}

query::TemporalConstraint Parser::constraint() {
  query::TemporalConstraint c;
  c.lhs = edgeExpr();
  if (auto cmp = comparator()) {
    c.comparator = *cmp;
    c.rhs = edgeExpr();
    return c;
  }
  if (isPunct(peek(), "+")) {
    c.op = query::ArithOp::Plus;
  } else if (isPunct(peek(), "-")) {
    c.op = query::ArithOp::Minus;
  } else {
    failExpected(peek(), {"'<'", "'>'", "'<='", "'>='", "'+'", "'-'"});
  }
  next();
  c.rhs = edgeExpr();
  auto cmp = comparator();
  if (!cmp) failExpected(peek(), {"'<'", "'>'", "'<='", "'>='"});
  c.comparator = *cmp;
  c.bound = expectSignedNumber();
  return c;
}

query::SubgraphQuery Parser::bareBlock() {
  query::SubgraphQuery q;
  bool braced = isPunct(peek(), "{");
  if (braced) next();
  blockBody(q, braced);
  if (braced) {
    expectPunct("}");
  }
  if (peek().kind != Tok::End) failExpected(peek(), {"end of input"});
  return q;
}

query::TemporalConstraint Parser::singleConstraint() {
  query::TemporalConstraint c = constraint();
  if (isPunct(peek(), ";")) next();
  if (peek().kind != Tok::End) failExpected(peek(), {"end of input"});
  return c;
}

}  // namespace

SalProgram parseProgram(std::string_view text) { return Parser(text).program(); }

query::SubgraphQuery parseQuery(std::string_view text) {
  return Parser(text).bareBlock();
}

query::TemporalConstraint parseConstraint(std::string_view text) {
  return Parser(text).singleConstraint();
}

std::string print(const SalProgram& p) {
  std::ostringstream os;
  for (const auto& [name, value] : p.preamble)
    os << name << " = " << formatTime(value) << ";\n";
  os << p.connection.name << " = " << p.connection.kind << "(\""
     << p.connection.host << "\", " << p.connection.port << ");\n";
  if (p.partition) {
    os << "PARTITION " << p.partition->stream << " By ";
    for (std::size_t i = 0; i < p.partition->keys.size(); ++i)
      os << (i ? ", " : "") << p.partition->keys[i];
    os << ";\n";
    for (const auto& [key, fn] : p.partition->hashes)
      os << "HASH " << key << " WITH " << fn << ";\n";
  }
  for (const auto& f : p.features) os << f.text << ";\n";
  os << "Subgraph on " << p.subgraph.stream << " with source("
     << p.subgraph.sourceField << ") and target(" << p.subgraph.targetField
     << ")\n{\n";
  const auto& q = p.subgraph.query;
  for (const auto& e : q.edges)
    os << "  " << e.source << ' ' << e.label << ' ' << e.target << ";\n";
  for (const auto& c : q.temporalConstraints) os << "  " << query::text(c) << ";\n";
  for (const auto& v : q.vertexConstraints) os << "  " << query::text(v) << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace tstream::sal
