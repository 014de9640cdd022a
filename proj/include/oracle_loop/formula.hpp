#pragma once

#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace oracle_loop {

enum class Connective { Var, Not, And, Or, Implies, Iff };

/// Immutable propositional formula. Copies share structure, so passing by
/// value is cheap and thread-safe.
///
/// Variable names are interned into a process-wide symbol table; symbol()
/// returns the dense id used by the solver.
class Formula {
 public:
  static Formula var(std::string_view name);
  static Formula negation(Formula operand);
  static Formula conjunction(Formula lhs, Formula rhs);
  static Formula disjunction(Formula lhs, Formula rhs);
  static Formula implication(Formula lhs, Formula rhs);
  static Formula equivalence(Formula lhs, Formula rhs);

  /// Left-nested conjunction of a nonempty list.
  static Formula conjunctionOf(const std::vector<Formula>& parts);

  Connective kind() const noexcept;
  bool isVar() const noexcept { return kind() == Connective::Var; }

  /// Var nodes only.
  const std::string& name() const;
  int symbol() const;

  /// Not nodes: operand(). Binary nodes: lhs() and rhs().
  const Formula& operand() const;
  const Formula& lhs() const;
  const Formula& rhs() const;

  /// Renders in KB file syntax with the fewest parentheses that reparse to
  /// the same tree.
  std::string toString() const;

  void collectVariables(std::set<std::string>& out) const;

  friend bool operator==(const Formula& a, const Formula& b);
  friend bool operator!=(const Formula& a, const Formula& b) { return !(a == b); }

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

/// Parses a single formula. Throws ParseError (line 0, 1-based column).
Formula parseFormula(std::string_view text);

/// Name of an interned symbol id.
const std::string& symbolName(int symbol);

/// Number of symbols interned so far.
int symbolCount();

}  // namespace oracle_loop
