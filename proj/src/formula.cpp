#include "oracle_loop/formula.hpp"

#include <cctype>
#include <deque>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "oracle_loop/error.hpp"

namespace oracle_loop {

namespace {

class SymbolTable {
 public:
  int intern(std::string_view name) {
    {
      std::shared_lock lock(mutex_);
      auto it = ids_.find(std::string(name));
      if (it != ids_.end()) return it->second;
    }
    std::unique_lock lock(mutex_);
    auto [it, inserted] = ids_.emplace(std::string(name), static_cast<int>(names_.size()));
    if (inserted) names_.emplace_back(name);
    return it->second;
  }

  const std::string& name(int id) const {
    std::shared_lock lock(mutex_);
    return names_.at(static_cast<std::size_t>(id));
  }

  int size() const {
    std::shared_lock lock(mutex_);
    return static_cast<int>(names_.size());
  }

 private:
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, int> ids_;
  std::deque<std::string> names_;  // deque keeps references stable
};

SymbolTable& symbols() {
  static SymbolTable table;
  return table;
}

int precedence(Connective c) {
  switch (c) {
    case Connective::Iff: return 1;
    case Connective::Implies: return 2;
    case Connective::Or: return 3;
    case Connective::And: return 4;
    case Connective::Not: return 5;
    case Connective::Var: return 6;
  }
  return 0;
}

const char* opText(Connective c) {
  switch (c) {
    case Connective::And: return " & ";
    case Connective::Or: return " | ";
    case Connective::Implies: return " -> ";
    case Connective::Iff: return " <-> ";
    default: return "";
  }
}

}  // namespace

struct Formula::Node {
  Connective kind;
  int symbol = -1;
  std::string name;
  std::vector<Formula> children;
};

Formula Formula::var(std::string_view name) {
  auto node = std::make_shared<Node>();
  node->kind = Connective::Var;
  node->symbol = symbols().intern(name);
  node->name = std::string(name);
  return Formula(std::move(node));
}

Formula Formula::negation(Formula operand) {
  auto node = std::make_shared<Node>();
  node->kind = Connective::Not;
  node->children.push_back(std::move(operand));
  return Formula(std::move(node));
}

#define ORACLE_LOOP_BINARY(fn, conn)                                \
  Formula Formula::fn(Formula lhs, Formula rhs) {                   \
    auto node = std::make_shared<Node>();                           \
    node->kind = Connective::conn;                                  \
    node->children.push_back(std::move(lhs));                       \
    node->children.push_back(std::move(rhs));                       \
    return Formula(std::move(node));                                \
  }

ORACLE_LOOP_BINARY(conjunction, And)
ORACLE_LOOP_BINARY(disjunction, Or)
ORACLE_LOOP_BINARY(implication, Implies)
ORACLE_LOOP_BINARY(equivalence, Iff)

#undef ORACLE_LOOP_BINARY

Formula Formula::conjunctionOf(const std::vector<Formula>& parts) {
  if (parts.empty()) throw Error("conjunctionOf: empty list");
  Formula result = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) result = conjunction(result, parts[i]);
  return result;
}

Connective Formula::kind() const noexcept { return node_->kind; }

const std::string& Formula::name() const {
  if (node_->kind != Connective::Var) throw Error("Formula::name on non-variable");
  return node_->name;
}

int Formula::symbol() const {
  if (node_->kind != Connective::Var) throw Error("Formula::symbol on non-variable");
  return node_->symbol;
}

const Formula& Formula::operand() const {
  if (node_->kind != Connective::Not) throw Error("Formula::operand on non-negation");
  return node_->children[0];
}

const Formula& Formula::lhs() const {
  if (node_->children.size() != 2) throw Error("Formula::lhs on non-binary node");
  return node_->children[0];
}

const Formula& Formula::rhs() const {
  if (node_->children.size() != 2) throw Error("Formula::rhs on non-binary node");
  return node_->children[1];
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  if (a.node_->kind != b.node_->kind) return false;
  if (a.node_->kind == Connective::Var) return a.node_->symbol == b.node_->symbol;
  if (a.node_->children.size() != b.node_->children.size()) return false;
  for (std::size_t i = 0; i < a.node_->children.size(); ++i) {
    if (a.node_->children[i] != b.node_->children[i]) return false;
  }
  return true;
}

std::string Formula::toString() const {
  switch (kind()) {
    case Connective::Var:
      return name();
    case Connective::Not: {
      const Formula& inner = operand();
      std::string text = inner.toString();
      if (precedence(inner.kind()) < precedence(Connective::Not)) text = "(" + text + ")";
      return "~" + text;
    }
    default: {
      const int p = precedence(kind());
      const bool rightAssoc = kind() == Connective::Implies;
      std::string left = lhs().toString();
      std::string right = rhs().toString();
      const int pl = precedence(lhs().kind());
      const int pr = precedence(rhs().kind());
      if (rightAssoc ? pl <= p : pl < p) left = "(" + left + ")";
      if (rightAssoc ? pr < p : pr <= p) right = "(" + right + ")";
      return left + opText(kind()) + right;
    }
  }
}

void Formula::collectVariables(std::set<std::string>& out) const {
  if (isVar()) {
    out.insert(name());
    return;
  }
  for (const auto& child : node_->children) child.collectVariables(out);
}

const std::string& symbolName(int symbol) { return symbols().name(symbol); }

int symbolCount() { return symbols().size(); }

// ---------------------------------------------------------------------------
// Recursive-descent parser. Precedence, loosest first: <->, ->, |, &, ~.

namespace {

enum class Tok { Var, Not, And, Or, Implies, Iff, LParen, RParen, End };

struct Token {
  Tok kind;
  std::string_view text;
  std::size_t column;  // 1-based
};

class FormulaParser {
 public:
  explicit FormulaParser(std::string_view text) : text_(text) { advance(); }

  Formula parse() {
    Formula f = parseIff();
    if (current_.kind != Tok::End) fail("unexpected '" + std::string(current_.text) + "'");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what, 0, current_.column);
  }

  void advance() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::size_t start = pos_;
    if (pos_ >= text_.size()) {
      current_ = {Tok::End, "end of input", start + 1};
      return;
    }
    const char c = text_[pos_];
    auto take = [&](Tok kind, std::size_t len) {
      current_ = {kind, text_.substr(start, len), start + 1};
      pos_ += len;
    };
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_ + 1;
      while (end < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_')) {
        ++end;
      }
      take(Tok::Var, end - pos_);
      return;
    }
    switch (c) {
      case '~': take(Tok::Not, 1); return;
      case '&': take(Tok::And, 1); return;
      case '|': take(Tok::Or, 1); return;
      case '(': take(Tok::LParen, 1); return;
      case ')': take(Tok::RParen, 1); return;
      default: break;
    }
    if (text_.substr(pos_, 2) == "->") {
      take(Tok::Implies, 2);
      return;
    }
    if (text_.substr(pos_, 3) == "<->") {
      take(Tok::Iff, 3);
      return;
    }
    current_ = {Tok::End, text_.substr(start, 1), start + 1};
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  Formula parseIff() {
    Formula left = parseImplies();
    while (current_.kind == Tok::Iff) {
      advance();
      left = Formula::equivalence(left, parseImplies());
    }
    return left;
  }

  Formula parseImplies() {
    Formula left = parseOr();
    if (current_.kind == Tok::Implies) {
      advance();
      return Formula::implication(left, parseImplies());
    }
    return left;
  }

  Formula parseOr() {
    Formula left = parseAnd();
    while (current_.kind == Tok::Or) {
      advance();
      left = Formula::disjunction(left, parseAnd());
    }
    return left;
  }

  Formula parseAnd() {
    Formula left = parseUnary();
    while (current_.kind == Tok::And) {
      advance();
      left = Formula::conjunction(left, parseUnary());
    }
    return left;
  }

  Formula parseUnary() {
    switch (current_.kind) {
      case Tok::Not:
        advance();
        return Formula::negation(parseUnary());
      case Tok::LParen: {
        advance();
        Formula inner = parseIff();
        if (current_.kind != Tok::RParen) fail("expected ')'");
        advance();
        return inner;
      }
      case Tok::Var: {
        Formula v = Formula::var(current_.text);
        advance();
        return v;
      }
      case Tok::End:
        fail("unexpected end of formula");
      default:
        fail("unexpected '" + std::string(current_.text) + "'");
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  Token current_{Tok::End, {}, 1};
};

}  // namespace

Formula parseFormula(std::string_view text) { return FormulaParser(text).parse(); }

ParseError::ParseError(std::string message, std::size_t line, std::size_t column)
    : Error(line > 0 ? "line " + std::to_string(line) + ", column " + std::to_string(column) +
                           ": " + message
                     : "column " + std::to_string(column) + ": " + message),
      detail_(std::move(message)),
      line_(line),
      column_(column) {}

}  // namespace oracle_loop
