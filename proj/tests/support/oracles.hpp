#pragma once

// Reference implementations for the tests: truth tables instead of the
// solver, subset enumeration instead of the hitting-set tree.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "oracle_loop/diagnosis.hpp"
#include "oracle_loop/formula.hpp"
#include "oracle_loop/kb.hpp"

namespace oracle_loop::testing {

/// Set of assignments over a fixed variable list, one bit per assignment.
class ModelSet {
 public:
  ModelSet() = default;
  ModelSet(std::size_t bits, bool fill) : words_((bits + 63) / 64, fill ? ~0ULL : 0ULL), bits_(bits) {
    trim();
  }

  void set(std::size_t i) { words_[i / 64] |= 1ULL << (i % 64); }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1ULL; }

  ModelSet& operator&=(const ModelSet& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
    return *this;
  }
  bool empty() const {
    return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
  }
  bool subsetOf(const ModelSet& o) const {
    for (std::size_t i = 0; i < words_.size(); ++i) {
      if (words_[i] & ~o.words_[i]) return false;
    }
    return true;
  }

 private:
  void trim() {
    if (bits_ % 64 && !words_.empty()) words_.back() &= (1ULL << (bits_ % 64)) - 1;
  }
  std::vector<std::uint64_t> words_;
  std::size_t bits_ = 0;
};

class TruthTable {
 public:
  explicit TruthTable(const std::vector<Formula>& universe) {
    std::set<std::string> names;
    for (const auto& f : universe) f.collectVariables(names);
    if (names.size() > 20) throw std::runtime_error("truth table too large");
    for (const auto& n : names) index_[n] = index_.size();
    rows_ = std::size_t{1} << index_.size();
  }

  std::size_t rows() const { return rows_; }

  bool eval(const Formula& f, std::size_t row) const {
    switch (f.kind()) {
      case Connective::Var: return (row >> index_.at(f.name())) & 1U;
      case Connective::Not: return !eval(f.operand(), row);
      case Connective::And: return eval(f.lhs(), row) && eval(f.rhs(), row);
      case Connective::Or: return eval(f.lhs(), row) || eval(f.rhs(), row);
      case Connective::Implies: return !eval(f.lhs(), row) || eval(f.rhs(), row);
      case Connective::Iff: return eval(f.lhs(), row) == eval(f.rhs(), row);
    }
    return false;
  }

  ModelSet models(const Formula& f) const {
    ModelSet out(rows_, false);
    for (std::size_t r = 0; r < rows_; ++r) {
      if (eval(f, r)) out.set(r);
    }
    return out;
  }

  ModelSet models(const std::vector<Formula>& fs) const {
    ModelSet out(rows_, true);
    for (const auto& f : fs) out &= models(f);
    return out;
  }

 private:
  std::map<std::string, std::size_t> index_;
  std::size_t rows_ = 1;
};

inline bool tableSatisfiable(const std::vector<Formula>& fs) {
  return !TruthTable(fs).models(fs).empty();
}

inline bool tableEntails(const std::vector<Formula>& fs, const Formula& f) {
  std::vector<Formula> all = fs;
  all.push_back(f);
  const TruthTable t(all);
  return t.models(fs).subsetOf(t.models(f));
}

/// Requirement checks for one KB with every formula's models precomputed.
class KbOracle {
 public:
  explicit KbOracle(const KnowledgeBase& kb) : table_(universe(kb)) {
    for (const auto& ax : kb.axioms) axiomModels_.push_back(table_.models(ax.formula));
    base_ = table_.models(kb.background);
    base_ &= table_.models(kb.positives);
    for (const auto& n : kb.negatives) negativeModels_.push_back(table_.models(n));
  }

  std::size_t size() const { return axiomModels_.size(); }

  /// Models of B ∪ P ∪ {K axioms in mask} ∪ extra.
  ModelSet modelsOf(std::uint64_t mask, const std::vector<Formula>& extra = {}) const {
    ModelSet m = base_;
    for (std::size_t i = 0; i < axiomModels_.size(); ++i) {
      if ((mask >> i) & 1U) m &= axiomModels_[i];
    }
    for (const auto& f : extra) m &= table_.models(f);
    return m;
  }

  bool violatesModels(const ModelSet& m) const {
    if (m.empty()) return true;
    return std::any_of(negativeModels_.begin(), negativeModels_.end(),
                       [&](const ModelSet& n) { return m.subsetOf(n); });
  }

  bool violates(std::uint64_t mask) const { return violatesModels(modelsOf(mask)); }

  std::uint64_t full() const { return (std::uint64_t{1} << size()) - 1; }

  const TruthTable& table() const { return table_; }
  const ModelSet& axiomModels(std::size_t i) const { return axiomModels_[i]; }

 private:
  static std::vector<Formula> universe(const KnowledgeBase& kb) {
    std::vector<Formula> all;
    for (const auto& ax : kb.axioms) all.push_back(ax.formula);
    for (const auto* part : {&kb.background, &kb.positives, &kb.negatives}) {
      all.insert(all.end(), part->begin(), part->end());
    }
    return all;
  }

  TruthTable table_;
  std::vector<ModelSet> axiomModels_;
  ModelSet base_;
  std::vector<ModelSet> negativeModels_;
};

inline AxiomSet idsOfMask(std::uint64_t mask) {
  AxiomSet out;
  for (int i = 0; i < 64; ++i) {
    if ((mask >> i) & 1U) out.push_back(i);
  }
  return out;
}

/// Every minimal diagnosis, as sorted id lists in ascending order.
inline std::vector<AxiomSet> oracleDiagnoses(const KnowledgeBase& kb) {
  const KbOracle o(kb);
  if (o.size() > 16) throw std::runtime_error("oracle limited to |K| <= 16");
  std::vector<AxiomSet> out;
  if (!o.violates(o.full())) return out;
  for (std::uint64_t d = 0; d <= o.full(); ++d) {
    if (o.violates(o.full() & ~d)) continue;
    bool minimal = true;
    for (std::size_t i = 0; i < o.size() && minimal; ++i) {
      if (((d >> i) & 1U) && !o.violates(o.full() & ~(d & ~(std::uint64_t{1} << i)))) minimal = false;
    }
    if (minimal) out.push_back(idsOfMask(d));
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::uint64_t maskOf(const AxiomSet& ids) {
  std::uint64_t m = 0;
  for (const AxiomId id : ids) m |= std::uint64_t{1} << id;
  return m;
}

enum class Side { Plus, Minus, Zero };

/// Classification by entailment and violation, no membership shortcut:
/// Plus if K\D ∪ B ∪ P entails every query axiom, Minus if adding the query
/// violates the requirements, Zero otherwise.
inline Side semanticSide(const KbOracle& o, const AxiomSet& diagnosis, const std::vector<AxiomId>& query) {
  const std::uint64_t kept = o.full() & ~maskOf(diagnosis);
  const ModelSet m = o.modelsOf(kept);
  bool entailed = true;
  for (const AxiomId id : query) entailed = entailed && m.subsetOf(o.axiomModels(static_cast<std::size_t>(id)));
  if (entailed) return Side::Plus;
  if (o.violatesModels(o.modelsOf(kept | maskOf(query)))) return Side::Minus;
  return Side::Zero;
}

/// Every (dPlus, dMinus) membership split some Q ⊆ K induces, as dMinus
/// bitmasks over the diagnosis indices, both sides nonempty.
inline std::set<std::uint64_t> oracleRealizableSplits(const std::vector<AxiomSet>& ds, std::size_t numAxioms) {
  std::set<std::uint64_t> out;
  const std::uint64_t all = (std::uint64_t{1} << ds.size()) - 1;
  for (std::uint64_t q = 1; q < (std::uint64_t{1} << numAxioms); ++q) {
    std::uint64_t minus = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (maskOf(ds[i]) & q) minus |= std::uint64_t{1} << i;
    }
    if (minus != 0 && minus != all) out.insert(minus);
  }
  return out;
}

}  // namespace oracle_loop::testing
