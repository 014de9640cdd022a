#include "oracle_loop/query.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oracle_loop/error.hpp"

namespace oracle_loop {

namespace {
constexpr double kScoreTolerance = 1e-12;
constexpr std::size_t kBipartitionGuard = 12;
}  // namespace

std::string_view toString(HeuristicKind h) { return h == HeuristicKind::ENT ? "ent" : "spl"; }

HeuristicKind parseHeuristic(std::string_view text) {
  if (text == "ent" || text == "ENT") return HeuristicKind::ENT;
  if (text == "spl" || text == "SPL") return HeuristicKind::SPL;
  throw Error("unknown heuristic '" + std::string(text) + "'");
}

QPartition qPartitionByMembership(const Query& q, const DiagnosisSet& ds) {
  QPartition p;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& d = ds.diagnoses[i];
    const bool hit = std::any_of(q.axiomIds.begin(), q.axiomIds.end(),
                                 [&](AxiomId id) { return d.contains(id); });
    (hit ? p.dMinus : p.dPlus).push_back(i);
  }
  return p;
}

AxiomSet discriminatingAxioms(const DiagnosisSet& ds) {
  if (ds.size() < 2) return {};
  AxiomSet all;
  AxiomSet common = ds.diagnoses.front().axiomIds;
  for (const auto& d : ds.diagnoses) {
    AxiomSet merged;
    std::set_union(all.begin(), all.end(), d.axiomIds.begin(), d.axiomIds.end(),
                   std::back_inserter(merged));
    all = std::move(merged);
    AxiomSet shared;
    std::set_intersection(common.begin(), common.end(), d.axiomIds.begin(), d.axiomIds.end(),
                          std::back_inserter(shared));
    common = std::move(shared);
  }
  AxiomSet out;
  std::set_difference(all.begin(), all.end(), common.begin(), common.end(),
                      std::back_inserter(out));
  return out;
}

double scoreSPL(const QPartition& p) {
  const double plus = static_cast<double>(p.dPlus.size());
  const double minus = static_cast<double>(p.dMinus.size());
  return std::abs(plus - minus) + static_cast<double>(p.dZero.size());
}

double scoreENT(const QPartition& p, const DiagnosisSet& ds) {
  auto mass = [&](const std::vector<std::size_t>& indices) {
    double sum = 0.0;
    for (const std::size_t i : indices) sum += ds.probs.at(i);
    return sum;
  };
  return std::abs(mass(p.dPlus) - mass(p.dMinus)) + mass(p.dZero);
}

double score(HeuristicKind h, const QPartition& p, const DiagnosisSet& ds) {
  return h == HeuristicKind::ENT ? scoreENT(p, ds) : scoreSPL(p);
}

std::optional<Query> selectBestSQ(const DiagnosisSet& ds, HeuristicKind h) {
  std::optional<Query> best;
  double bestScore = 0.0;
  for (const AxiomId id : discriminatingAxioms(ds)) {
    Query q{{id}};
    const double s = score(h, qPartitionByMembership(q, ds), ds);
    if (!best || s < bestScore - kScoreTolerance) {
      best = std::move(q);
      bestScore = s;
    }
  }
  return best;
}

namespace {

AxiomSet unionOf(const std::vector<std::size_t>& indices, const DiagnosisSet& ds) {
  AxiomSet out;
  for (const std::size_t i : indices) {
    const auto& ids = ds.diagnoses.at(i).axiomIds;
    out.insert(out.end(), ids.begin(), ids.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool realizable(const Bipartition& split, const DiagnosisSet& ds) {
  const AxiomSet blocked = unionOf(split.dPlus, ds);
  return std::all_of(split.dMinus.begin(), split.dMinus.end(), [&](std::size_t i) {
    const auto& ids = ds.diagnoses[i].axiomIds;
    return std::any_of(ids.begin(), ids.end(), [&](AxiomId id) {
      return !std::binary_search(blocked.begin(), blocked.end(), id);
    });
  });
}

}  // namespace

std::vector<Bipartition> enumerateRealizableBipartitions(const DiagnosisSet& ds) {
  const std::size_t n = ds.size();
  if (n < 2 || n > kBipartitionGuard) {
    throw GuardError("enumerateRealizableBipartitions needs 2 <= |ds| <= 12, got " +
                     std::to_string(n));
  }
  std::vector<Bipartition> out;
  const unsigned full = (1u << n) - 1;
  // Bit i set: diagnosis i goes to dMinus.
  for (unsigned mask = 1; mask < full; ++mask) {
    Bipartition split;
    for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1u ? split.dMinus : split.dPlus).push_back(i);
    if (realizable(split, ds)) out.push_back(std::move(split));
  }
  return out;
}

Query realizeQuery(const Bipartition& split, const DiagnosisSet& ds, std::size_t numAxioms) {
  const AxiomSet blocked = unionOf(split.dPlus, ds);
  auto allowed = [&](AxiomId id) {
    return static_cast<std::size_t>(id) < numAxioms &&
           !std::binary_search(blocked.begin(), blocked.end(), id);
  };

  // Greedy cover: repeatedly take the pool axiom hitting most uncovered
  // dMinus diagnoses, lowest id on ties.
  std::vector<std::size_t> uncovered = split.dMinus;
  AxiomSet chosen;
  while (!uncovered.empty()) {
    AxiomId bestId = -1;
    std::size_t bestHits = 0;
    for (const AxiomId id : unionOf(uncovered, ds)) {
      if (!allowed(id)) continue;
      const auto hits = static_cast<std::size_t>(
          std::count_if(uncovered.begin(), uncovered.end(),
                        [&](std::size_t i) { return ds.diagnoses[i].contains(id); }));
      if (hits > bestHits) {
        bestHits = hits;
        bestId = id;
      }
    }
    if (bestId < 0) throw UnrealizablePartitionError("no query induces the requested bipartition");
    chosen.insert(std::upper_bound(chosen.begin(), chosen.end(), bestId), bestId);
    std::erase_if(uncovered, [&](std::size_t i) { return ds.diagnoses[i].contains(bestId); });
  }

  // Deletion pass in ascending id order.
  auto coversAll = [&](const AxiomSet& q) {
    return std::all_of(split.dMinus.begin(), split.dMinus.end(), [&](std::size_t i) {
      return std::any_of(q.begin(), q.end(), [&](AxiomId id) { return ds.diagnoses[i].contains(id); });
    });
  };
  for (std::size_t k = 0; k < chosen.size();) {
    AxiomSet without = chosen;
    without.erase(without.begin() + static_cast<std::ptrdiff_t>(k));
    if (coversAll(without)) {
      chosen = std::move(without);
    } else {
      ++k;
    }
  }

  Query q{std::move(chosen)};
  const QPartition check = qPartitionByMembership(q, ds);
  if (check.dPlus != split.dPlus || check.dMinus != split.dMinus) {
    throw InvariantBreach("realized query does not reproduce its bipartition");
  }
  return q;
}

std::optional<Query> selectBestNormalQuery(const DiagnosisSet& ds, HeuristicKind h,
                                           std::size_t numAxioms) {
  if (ds.size() < 2) return std::nullopt;
  const auto splits = enumerateRealizableBipartitions(ds);
  if (splits.empty()) return std::nullopt;

  std::vector<double> scores;
  scores.reserve(splits.size());
  double bestScore = 0.0;
  for (const auto& split : splits) {
    const double s = score(h, QPartition{split.dPlus, split.dMinus, {}}, ds);
    if (scores.empty() || s < bestScore) bestScore = s;
    scores.push_back(s);
  }

  std::optional<Query> best;
  for (std::size_t k = 0; k < splits.size(); ++k) {
    if (scores[k] > bestScore + kScoreTolerance) continue;
    Query q = realizeQuery(splits[k], ds, numAxioms);
    if (!best || q.size() < best->size() ||
        (q.size() == best->size() && q.axiomIds < best->axiomIds)) {
      best = std::move(q);
    }
  }
  return best;
}

}  // namespace oracle_loop
