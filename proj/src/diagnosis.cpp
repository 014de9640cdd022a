#include "oracle_loop/diagnosis.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "oracle_loop/error.hpp"

namespace oracle_loop {

bool Diagnosis::contains(AxiomId id) const {
  return std::binary_search(axiomIds.begin(), axiomIds.end(), id);
}

// ---------------------------------------------------------------------------
// Fault probabilities

FaultProbabilities::FaultProbabilities(std::size_t numAxioms, double uniform)
    : p_(numAxioms, uniform) {
  if (!(uniform > 0.0 && uniform < 1.0)) throw Error("fault probability must lie in (0,1)");
}

void FaultProbabilities::set(AxiomId id, double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error("fault probability must lie in (0,1)");
  p_.at(static_cast<std::size_t>(id)) = p;
}

FaultProbabilities FaultProbabilities::parse(std::string_view text, std::size_t numAxioms) {
  FaultProbabilities probs(numAxioms);
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("expected axiomIndex<TAB>prob", lineNo, 1);
    long index = -1;
    const char* first = line.data();
    const auto [ptr, ec] = std::from_chars(first, first + tab, index);
    if (ec != std::errc() || ptr != first + tab || index < 0 ||
        static_cast<std::size_t>(index) >= numAxioms) {
      throw ParseError("bad axiom index", lineNo, 1);
    }
    double p = 0.0;
    try {
      std::size_t used = 0;
      p = std::stod(line.substr(tab + 1), &used);
    } catch (const std::exception&) {
      throw ParseError("bad probability", lineNo, tab + 2);
    }
    if (!(p > 0.0 && p < 1.0)) throw ParseError("probability outside (0,1)", lineNo, tab + 2);
    probs.set(static_cast<AxiomId>(index), p);
  }
  return probs;
}

namespace {

// Probability of D up to the factor ∏(1 − p) shared by every diagnosis.
// Multiplied in ascending id order so equal inputs give bit-equal results.
double relativeWeight(const AxiomSet& ids, const FaultProbabilities& probs) {
  double w = 1.0;
  for (const AxiomId id : ids) w *= probs[id] / (1.0 - probs[id]);
  return w;
}

bool isSubset(const AxiomSet& small, const AxiomSet& big) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

bool disjoint(const AxiomSet& a, const AxiomSet& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return false;
    if (*i < *j) {
      ++i;
    } else {
      ++j;
    }
  }
  return true;
}

AxiomSet withoutIds(std::size_t n, const AxiomSet& removed) {
  AxiomSet out;
  out.reserve(n);
  auto it = removed.begin();
  for (std::size_t i = 0; i < n; ++i) {
    const auto id = static_cast<AxiomId>(i);
    if (it != removed.end() && *it == id) {
      ++it;
      continue;
    }
    out.push_back(id);
  }
  return out;
}

struct WeightedOrder {
  bool operator()(const std::pair<double, AxiomSet>& a, const std::pair<double, AxiomSet>& b) const {
    if (a.first != b.first) return a.first > b.first;
    if (a.second.size() != b.second.size()) return a.second.size() < b.second.size();
    return a.second < b.second;
  }
};

// Divide and conquer: `background` ids are always present; returns a minimal
// subset of `candidates` that violates together with the background.
AxiomSet quickXplain(AxiomSet& background, bool backgroundChanged,
                     std::span<const AxiomId> candidates, const KnowledgeBase& kb) {
  if (backgroundChanged && violatesIds(background, kb)) return {};
  if (candidates.size() == 1) return {candidates[0]};

  const std::size_t half = candidates.size() / 2;
  const auto first = candidates.first(half);
  const auto second = candidates.subspan(half);

  const std::size_t mark = background.size();
  background.insert(background.end(), first.begin(), first.end());
  AxiomSet fromSecond = quickXplain(background, true, second, kb);
  background.resize(mark);

  background.insert(background.end(), fromSecond.begin(), fromSecond.end());
  AxiomSet fromFirst = quickXplain(background, !fromSecond.empty(), first, kb);
  background.resize(mark);

  fromFirst.insert(fromFirst.end(), fromSecond.begin(), fromSecond.end());
  std::sort(fromFirst.begin(), fromFirst.end());
  return fromFirst;
}

bool isMinimalDiagnosis(const AxiomSet& ids, const KnowledgeBase& kb) {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    AxiomSet smaller = ids;
    smaller.erase(smaller.begin() + static_cast<std::ptrdiff_t>(i));
    const auto kept = withoutIds(kb.size(), smaller);
    if (!violatesIds(kept, kb)) return false;
  }
  return true;
}

}  // namespace

std::optional<Conflict> findMinimalConflict(std::span<const AxiomId> candidates,
                                            const KnowledgeBase& kb) {
  if (!violatesIds(candidates, kb)) return std::nullopt;
  AxiomSet background;
  if (candidates.empty() || violatesIds(background, kb)) return Conflict{};
  return Conflict{quickXplain(background, false, candidates, kb)};
}

double diagnosisProbability(const Diagnosis& d, const FaultProbabilities& probs) {
  double base = 1.0;
  for (std::size_t i = 0; i < probs.size(); ++i) base *= 1.0 - probs[static_cast<AxiomId>(i)];
  return base * relativeWeight(d.axiomIds, probs);
}

DiagnosisSet makeDiagnosisSet(std::vector<Diagnosis> diagnoses, const FaultProbabilities& probs,
                              bool complete) {
  std::vector<std::pair<double, AxiomSet>> weighted;
  weighted.reserve(diagnoses.size());
  for (auto& d : diagnoses) {
    const double w = relativeWeight(d.axiomIds, probs);
    weighted.emplace_back(w, std::move(d.axiomIds));
  }
  std::sort(weighted.begin(), weighted.end(), WeightedOrder{});

  DiagnosisSet out;
  out.complete = complete;
  double total = 0.0;
  for (const auto& [w, ids] : weighted) total += w;
  for (auto& [w, ids] : weighted) {
    out.diagnoses.push_back(Diagnosis{std::move(ids)});
    out.probs.push_back(w / total);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Conflict store

void ConflictStore::refresh(const KnowledgeBase& kb) {
  if (primed_ && seenBackground_ == kb.background.size() &&
      seenPositives_ == kb.positives.size() && seenNegatives_ == kb.negatives.size()) {
    return;
  }
  std::vector<Conflict> fresh;
  for (const auto& c : conflicts_) {
    auto minimal = findMinimalConflict(c.axiomIds, kb);
    if (!minimal || minimal->axiomIds.empty()) continue;
    if (std::find(fresh.begin(), fresh.end(), *minimal) == fresh.end()) {
      fresh.push_back(std::move(*minimal));
    }
  }
  conflicts_ = std::move(fresh);
  seenBackground_ = kb.background.size();
  seenPositives_ = kb.positives.size();
  seenNegatives_ = kb.negatives.size();
  primed_ = true;
}

const Conflict* ConflictStore::disjointFrom(const AxiomSet& path) const {
  for (const auto& c : conflicts_) {
    if (disjoint(c.axiomIds, path)) return &c;
  }
  return nullptr;
}

void ConflictStore::add(Conflict c) {
  if (std::find(conflicts_.begin(), conflicts_.end(), c) == conflicts_.end()) {
    conflicts_.push_back(std::move(c));
  }
}

void ConflictStore::clear() {
  conflicts_.clear();
  primed_ = false;
}

// ---------------------------------------------------------------------------
// Hitting-set tree

DiagnosisSet computeLeadingDiagnoses(const KnowledgeBase& kb, const FaultProbabilities& probs,
                                     std::size_t leading) {
  ConflictStore store;
  return computeLeadingDiagnoses(kb, probs, leading, store);
}

DiagnosisSet computeLeadingDiagnoses(const KnowledgeBase& kb, const FaultProbabilities& probs,
                                     std::size_t leading, ConflictStore& store) {
  if (leading == 0) throw Error("computeLeadingDiagnoses: leading must be positive");
  if (probs.size() != kb.size()) throw Error("fault probabilities do not match |K|");
  if (violatesIds(AxiomSet{}, kb)) {
    throw NoDiagnosisError("background and positive test cases alone violate the requirements");
  }
  const AxiomSet everything = withoutIds(kb.size(), {});
  if (!violatesIds(everything, kb)) return DiagnosisSet{{}, {}, true};

  store.refresh(kb);

  using Node = std::pair<double, AxiomSet>;
  std::set<Node, WeightedOrder> open(WeightedOrder{});
  std::set<AxiomSet> generated;
  std::vector<AxiomSet> found;

  open.emplace(1.0, AxiomSet{});
  generated.insert(AxiomSet{});
  bool complete = true;

  while (!open.empty()) {
    Node node = std::move(open.extract(open.begin()).value());
    const AxiomSet& path = node.second;

    const bool coversFound = std::any_of(found.begin(), found.end(),
                                         [&](const AxiomSet& d) { return isSubset(d, path); });
    if (coversFound) continue;

    AxiomSet label;
    if (const Conflict* reused = store.disjointFrom(path)) {
      label = reused->axiomIds;
    } else {
      const AxiomSet remaining = withoutIds(kb.size(), path);
      auto conflict = findMinimalConflict(remaining, kb);
      if (!conflict) {
        // Supersets of a non-minimal hitting set only hold non-minimal ones.
        if (!isMinimalDiagnosis(path, kb)) continue;
        if (found.size() == leading) {
          complete = false;
          break;
        }
        found.push_back(path);
        continue;
      }
      if (conflict->axiomIds.empty()) {
        throw NoDiagnosisError("background and positive test cases alone violate the requirements");
      }
      label = conflict->axiomIds;
      store.add(std::move(*conflict));
    }

    for (const AxiomId id : label) {
      AxiomSet child = path;
      child.insert(std::upper_bound(child.begin(), child.end(), id), id);
      if (!generated.insert(child).second) continue;
      const double weight = relativeWeight(child, probs);
      open.emplace(weight, std::move(child));
    }
  }

  std::vector<Diagnosis> diagnoses;
  diagnoses.reserve(found.size());
  for (auto& ids : found) diagnoses.push_back(Diagnosis{std::move(ids)});
  return makeDiagnosisSet(std::move(diagnoses), probs, complete);
}

// ---------------------------------------------------------------------------
// Brute force

DiagnosisSet bruteForceDiagnoses(const KnowledgeBase& kb, int maxCard) {
  return bruteForceDiagnoses(kb, maxCard, FaultProbabilities(kb.size()));
}

DiagnosisSet bruteForceDiagnoses(const KnowledgeBase& kb, int maxCard,
                                 const FaultProbabilities& probs) {
  constexpr std::size_t kGuard = 14;
  if (kb.size() > kGuard) throw GuardError("bruteForceDiagnoses: |K| exceeds 14");
  const auto n = static_cast<int>(kb.size());
  const int limit = std::min(maxCard, n);

  std::vector<unsigned> foundMasks;
  std::vector<Diagnosis> diagnoses;
  for (int card = 0; card <= limit; ++card) {
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      if (std::popcount(mask) != card) continue;
      if (std::any_of(foundMasks.begin(), foundMasks.end(),
                      [&](unsigned f) { return (f & mask) == f; })) {
        continue;
      }
      AxiomSet kept;
      AxiomSet removed;
      for (int i = 0; i < n; ++i) ((mask >> i) & 1u ? removed : kept).push_back(i);
      if (violatesIds(kept, kb)) continue;
      if (card == 0) return DiagnosisSet{{}, {}, true};  // already valid
      foundMasks.push_back(mask);
      diagnoses.push_back(Diagnosis{std::move(removed)});
    }
  }
  return makeDiagnosisSet(std::move(diagnoses), probs, maxCard >= n);
}

}  // namespace oracle_loop
