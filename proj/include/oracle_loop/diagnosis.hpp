#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "oracle_loop/kb.hpp"

namespace oracle_loop {

/// Sorted, duplicate-free list of axiom ids.
using AxiomSet = std::vector<AxiomId>;

/// Subset-minimal set of K axioms that, with B and P, violates the requirements.
struct Conflict {
  AxiomSet axiomIds;
  friend bool operator==(const Conflict&, const Conflict&) = default;
};

/// Subset-minimal set of K axioms whose removal restores all requirements.
struct Diagnosis {
  AxiomSet axiomIds;

  bool contains(AxiomId id) const;
  friend bool operator==(const Diagnosis&, const Diagnosis&) = default;
  friend auto operator<=>(const Diagnosis&, const Diagnosis&) = default;
};

/// Per-axiom prior fault probability, each in (0, 1).
class FaultProbabilities {
 public:
  static constexpr double kDefault = 0.1;

  explicit FaultProbabilities(std::size_t numAxioms, double uniform = kDefault);

  /// Reads `axiomIndex<TAB>prob` lines; unlisted axioms keep the default.
  static FaultProbabilities parse(std::string_view text, std::size_t numAxioms);

  void set(AxiomId id, double p);
  double operator[](AxiomId id) const { return p_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const noexcept { return p_.size(); }

 private:
  std::vector<double> p_;
};

/// Leading diagnoses, most probable first. `probs` is normalized over the
/// listed diagnoses. `complete` is true iff no further minimal diagnosis
/// exists beyond those listed.
struct DiagnosisSet {
  std::vector<Diagnosis> diagnoses;
  std::vector<double> probs;
  bool complete = false;

  std::size_t size() const noexcept { return diagnoses.size(); }
  bool empty() const noexcept { return diagnoses.empty(); }
};

inline constexpr std::size_t kAllDiagnoses = std::numeric_limits<std::size_t>::max();

/// Divide-and-conquer conflict extraction over the violates test. Returns
/// nullopt iff the candidates do not violate the requirements; an empty
/// conflict means B ∪ P violates them on its own.
std::optional<Conflict> findMinimalConflict(std::span<const AxiomId> candidates,
                                            const KnowledgeBase& kb);

/// ∏_{ax∈D} p(ax) · ∏_{ax∉D} (1 − p(ax)).
double diagnosisProbability(const Diagnosis& d, const FaultProbabilities& probs);

/// Conflicts found by earlier searches. Reused as hitting-set tree labels
/// after being re-minimized against the current test cases.
class ConflictStore {
 public:
  const std::vector<Conflict>& conflicts() const noexcept { return conflicts_; }

  /// Re-minimizes every stored conflict if B, P or N changed since the last
  /// call. Stored conflicts stay conflicts as test cases only accumulate.
  void refresh(const KnowledgeBase& kb);

  /// First stored conflict disjoint from the sorted path, or nullptr.
  const Conflict* disjointFrom(const AxiomSet& path) const;

  void add(Conflict c);
  void clear();

 private:
  std::vector<Conflict> conflicts_;
  std::size_t seenBackground_ = 0;
  std::size_t seenPositives_ = 0;
  std::size_t seenNegatives_ = 0;
  bool primed_ = false;
};

/// The `leading` most probable minimal diagnoses, found by a hitting-set
/// tree explored in uniform-cost order (probability, then cardinality, then
/// lexicographic). Ordering is exact whenever every p(ax) < 0.5.
///
/// A KB that already meets its requirements yields an empty, complete set.
/// Throws NoDiagnosisError when B ∪ P alone violates the requirements.
DiagnosisSet computeLeadingDiagnoses(const KnowledgeBase& kb, const FaultProbabilities& probs,
                                     std::size_t leading);
DiagnosisSet computeLeadingDiagnoses(const KnowledgeBase& kb, const FaultProbabilities& probs,
                                     std::size_t leading, ConflictStore& store);

/// Every minimal diagnosis of cardinality ≤ maxCard by subset enumeration.
/// Guarded to |K| ≤ 14.
DiagnosisSet bruteForceDiagnoses(const KnowledgeBase& kb, int maxCard,
                                 const FaultProbabilities& probs);
DiagnosisSet bruteForceDiagnoses(const KnowledgeBase& kb, int maxCard);

/// Sorts by descending probability, then cardinality, then ids, and fills
/// normalized probabilities.
DiagnosisSet makeDiagnosisSet(std::vector<Diagnosis> diagnoses, const FaultProbabilities& probs,
                              bool complete);

}  // namespace oracle_loop
