#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oracle_loop/formula.hpp"

namespace oracle_loop {

using AxiomId = int;

struct Axiom {
  AxiomId id = 0;
  Formula formula;
  std::string sourceText;
};

/// Debuggable axioms K, trusted background B, and the positive (P) and
/// negative (N) test cases. Requirements are consistency of K ∪ B ∪ P and
/// non-entailment of every member of N.
struct KnowledgeBase {
  std::vector<Axiom> axioms;
  std::vector<Formula> background;
  std::vector<Formula> positives;
  std::vector<Formula> negatives;

  std::size_t size() const noexcept { return axioms.size(); }

  std::vector<Formula> formulasOf(std::span<const AxiomId> ids) const;

  /// Formulas of K minus the given ids (ids need not be sorted).
  std::vector<Formula> complementOf(std::span<const AxiomId> ids) const;
};

/// Reads the sectioned KB text format. Axiom ids follow file order.
KnowledgeBase parseKB(std::string_view text);

/// Inverse of parseKB up to whitespace and redundant parentheses.
std::string serializeKB(const KnowledgeBase& kb);

/// True iff kPart ∪ B ∪ P is unsatisfiable or entails some member of N.
bool violates(std::span<const Formula> kPart, const KnowledgeBase& kb);

/// Shorthand for violates over the formulas of the given K axiom ids.
bool violatesIds(std::span<const AxiomId> ids, const KnowledgeBase& kb);

}  // namespace oracle_loop
