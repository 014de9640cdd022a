#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "oracle_loop/formula.hpp"

namespace oracle_loop {

namespace sat {

/// Literal encoding: variable v is 2v (positive) or 2v+1 (negative).
using Lit = int;
inline Lit mkLit(int var, bool negative = false) { return 2 * var + (negative ? 1 : 0); }
inline Lit negate(Lit l) { return l ^ 1; }
inline int varOf(Lit l) { return l >> 1; }

/// Small CDCL solver: two watched literals, first-UIP learning, activity
/// based branching with phase saving, Luby restarts. Clauses are never
/// deleted; instances handled here are a few hundred variables at most.
///
/// Learned clauses stay valid across solve() calls on the same instance, so
/// one solver can answer several queries that differ only in assumptions.
class Solver {
 public:
  int newVar();
  int numVars() const { return static_cast<int>(assigns_.size()); }

  /// Adds a clause at decision level 0. Must not be called mid-search.
  void addClause(std::vector<Lit> lits);

  /// True iff the clauses plus the assumption literals are satisfiable.
  bool solve(std::span<const Lit> assumptions = {});

  /// Model value of a variable after a satisfiable solve().
  bool modelValue(int var) const { return model_.at(static_cast<std::size_t>(var)); }

 private:
  static constexpr std::int8_t kFalse = 0;
  static constexpr std::int8_t kTrue = 1;
  static constexpr std::int8_t kUndef = 2;

  std::int8_t value(Lit l) const {
    const std::int8_t a = assigns_[static_cast<std::size_t>(varOf(l))];
    return a == kUndef ? kUndef : static_cast<std::int8_t>(a ^ (l & 1));
  }
  int decisionLevel() const { return static_cast<int>(trailLim_.size()); }
  void enqueue(Lit l, int reason);
  int propagate();
  void analyze(int conflict, std::vector<Lit>& learnt, int& backtrackLevel);
  void cancelUntil(int level);
  int pickBranchVar() const;
  void bump(int var);
  int attach(std::vector<Lit> lits);

  std::vector<std::vector<Lit>> clauses_;
  std::vector<std::vector<int>> watches_;
  std::vector<std::int8_t> assigns_;
  std::vector<bool> phase_;
  std::vector<int> level_;
  std::vector<int> reason_;
  std::vector<double> activity_;
  std::vector<Lit> trail_;
  std::vector<int> trailLim_;
  std::vector<char> seen_;
  std::vector<bool> model_;
  std::size_t qhead_ = 0;
  double varInc_ = 1.0;
  bool unsat_ = false;
};

/// Tseitin-style encoder. Top-level structure is split into plain clauses;
/// nested subformulas get an auxiliary variable with full equivalence
/// clauses, so the output is linear in the formula size.
class CnfEncoder {
 public:
  explicit CnfEncoder(Solver& solver) : solver_(solver) {}

  void assertFormula(const Formula& f) { assertPolarity(f, true); }

  /// Literal equivalent to f.
  Lit define(const Formula& f);

 private:
  void assertPolarity(const Formula& f, bool positive);
  void collectDisjuncts(const Formula& f, bool positive, std::vector<Lit>& out);
  Lit symbolLit(int symbol);

  Solver& solver_;
  std::unordered_map<int, int> symbolVars_;
};

}  // namespace sat

/// True iff some assignment satisfies every formula.
bool isSatisfiable(std::span<const Formula> formulas);

/// True iff formulas ∪ {¬f} is unsatisfiable.
bool entails(std::span<const Formula> formulas, const Formula& f);

/// Number of solve() calls made on this thread since it started. Used to
/// check that membership-only routines never touch the solver.
std::uint64_t solverCallCount();

}  // namespace oracle_loop
