#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "oracle_loop/diagnosis.hpp"

namespace oracle_loop {

enum class HeuristicKind { ENT, SPL };

std::string_view toString(HeuristicKind h);
HeuristicKind parseHeuristic(std::string_view text);

/// Axioms of K shown to the expert, in presentation order.
struct Query {
  std::vector<AxiomId> axiomIds;

  std::size_t size() const noexcept { return axiomIds.size(); }
  bool isSingleton() const noexcept { return axiomIds.size() == 1; }
  friend bool operator==(const Query&, const Query&) = default;
};

/// Split of the leading diagnoses (by index into the DiagnosisSet) according
/// to their predicted reaction to a query: dPlus survive a positive answer,
/// dMinus survive a negative one, dZero are unaffected either way.
struct QPartition {
  std::vector<std::size_t> dPlus;
  std::vector<std::size_t> dMinus;
  std::vector<std::size_t> dZero;

  /// Both answers rule out at least one diagnosis.
  bool isValid() const noexcept { return !dPlus.empty() && !dMinus.empty(); }
};

struct Bipartition {
  std::vector<std::size_t> dPlus;
  std::vector<std::size_t> dMinus;
};

/// For Q ⊆ K: dPlus = diagnoses disjoint from Q, dMinus = the rest.
/// Pure set membership, no solver calls.
QPartition qPartitionByMembership(const Query& q, const DiagnosisSet& ds);

/// Union of the leading diagnoses minus their intersection: the axioms that
/// form a valid singleton query.
AxiomSet discriminatingAxioms(const DiagnosisSet& ds);

/// | |dPlus| − |dMinus| | + |dZero|. Lower is better.
double scoreSPL(const QPartition& p);

/// | P(dPlus) − P(dMinus) | + P(dZero) under the normalized probabilities of
/// ds. Lower is better. This is the balance form, not information gain.
double scoreENT(const QPartition& p, const DiagnosisSet& ds);

double score(HeuristicKind h, const QPartition& p, const DiagnosisSet& ds);

/// Best query {ax} over the discriminating axioms; ties go to the lowest id.
/// O(|K|·|ds|) membership tests, no solver calls.
std::optional<Query> selectBestSQ(const DiagnosisSet& ds, HeuristicKind h);

/// Every (dPlus, dMinus) split, both sides nonempty, that some Q ⊆ K
/// induces. Guarded to 2 ≤ |ds| ≤ 12.
std::vector<Bipartition> enumerateRealizableBipartitions(const DiagnosisSet& ds);

/// Greedy cover of dMinus from K \ ∪dPlus followed by a deletion pass, in
/// ascending id order. Throws UnrealizablePartitionError.
Query realizeQuery(const Bipartition& split, const DiagnosisSet& ds, std::size_t numAxioms);

/// Realization of the best-scoring realizable bipartition; ties by smaller
/// |Q|, then lexicographic ids.
std::optional<Query> selectBestNormalQuery(const DiagnosisSet& ds, HeuristicKind h,
                                           std::size_t numAxioms);

}  // namespace oracle_loop
