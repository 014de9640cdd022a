#include "oracle_loop/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <tuple>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "oracle_loop/error.hpp"

namespace oracle_loop {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// std::uniform_int_distribution is implementation-defined; this keeps
// scenarios identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::size_t below(std::size_t n) {
    const std::uint64_t bound = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = 0;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
  }

  bool chance(unsigned percent) { return below(100) < percent; }

  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[below(items.size())];
  }

 private:
  std::mt19937_64 engine_;
};

Formula literal(const std::string& name, bool positive) {
  Formula v = Formula::var(name);
  return positive ? v : Formula::negation(v);
}

struct Draft {
  KnowledgeBase kb;
  TargetDiagnosis target;
};

void finishAxioms(KnowledgeBase& kb) {
  for (std::size_t i = 0; i < kb.axioms.size(); ++i) {
    kb.axioms[i].id = static_cast<AxiomId>(i);
    kb.axioms[i].sourceText = kb.axioms[i].formula.toString();
  }
}

Draft draftRandom(const ScenarioParams& p, Rng& rng) {
  const std::size_t nv = std::max<std::size_t>(p.numVars, 3);
  std::vector<std::string> names;
  std::vector<bool> model;
  for (std::size_t v = 0; v < nv; ++v) {
    names.push_back("v" + std::to_string(v));
    model.push_back(rng.chance(50));
  }
  auto trueLit = [&](std::size_t v) { return literal(names[v], model[v]); };
  auto falseLit = [&](std::size_t v) { return literal(names[v], !model[v]); };

  Draft d;
  std::vector<std::size_t> derived;
  std::vector<char> isDerived(nv, 0);
  auto markDerived = [&](std::size_t v) {
    if (!isDerived[v]) {
      isDerived[v] = 1;
      derived.push_back(v);
    }
  };

  const std::size_t facts = std::clamp<std::size_t>(p.numFacts, 1, nv - 1);
  while (derived.size() < facts) {
    const std::size_t v = rng.below(nv);
    if (isDerived[v]) continue;
    markDerived(v);
    d.kb.background.push_back(trueLit(v));
  }

  struct Rule {
    std::vector<std::size_t> body;
    std::size_t head;
    bool derivable;
  };
  std::vector<Rule> rules;
  for (std::size_t k = 0; k < p.numAxioms; ++k) {
    Rule r;
    const std::size_t bodySize = 1 + rng.below(std::max<std::size_t>(p.maxBodyLiterals, 1));
    while (r.body.size() < bodySize) {
      const std::size_t v = rng.chance(85) ? rng.pick(derived) : rng.below(nv);
      if (std::find(r.body.begin(), r.body.end(), v) == r.body.end()) r.body.push_back(v);
    }
    std::vector<std::size_t> heads;
    for (std::size_t v = 0; v < nv; ++v) {
      if (std::find(r.body.begin(), r.body.end(), v) == r.body.end() && !isDerived[v]) heads.push_back(v);
    }
    if (heads.empty() || rng.chance(25)) {
      heads.clear();
      for (std::size_t v = 0; v < nv; ++v) {
        if (std::find(r.body.begin(), r.body.end(), v) == r.body.end()) heads.push_back(v);
      }
    }
    r.head = rng.pick(heads);
    r.derivable = std::all_of(r.body.begin(), r.body.end(), [&](std::size_t v) { return isDerived[v] != 0; });
    if (r.derivable) markDerived(r.head);
    rules.push_back(std::move(r));
  }

  std::vector<std::size_t> candidates;
  for (std::size_t k = 0; k < rules.size(); ++k) {
    if (rules[k].derivable) candidates.push_back(k);
  }
  if (candidates.size() < p.faultCardinality) return d;  // rejected by the caller

  std::set<std::size_t> faulty;
  while (faulty.size() < p.faultCardinality) faulty.insert(rng.pick(candidates));

  for (std::size_t k = 0; k < rules.size(); ++k) {
    const Rule& r = rules[k];
    std::vector<Formula> body;
    for (const std::size_t v : r.body) body.push_back(trueLit(v));
    const bool mutated = faulty.count(k) != 0;
    Formula head = mutated ? falseLit(r.head) : trueLit(r.head);
    d.kb.axioms.push_back(Axiom{0, Formula::implication(Formula::conjunctionOf(body), head), {}});
    if (mutated) {
      d.target.axiomIds.push_back(static_cast<AxiomId>(k));
      if (rng.chance(50)) {
        d.kb.positives.push_back(trueLit(r.head));
      } else {
        d.kb.negatives.push_back(falseLit(r.head));
      }
    }
  }
  finishAxioms(d.kb);
  return d;
}

Draft draftChain(const ScenarioParams& p, Rng& rng) {
  const std::size_t n = std::max<std::size_t>(p.numAxioms, 2);
  auto x = [](std::size_t i) { return Formula::var("x" + std::to_string(i)); };

  std::set<std::size_t> faulty;
  const std::size_t card = std::min(p.faultCardinality, n - 1);
  while (faulty.size() < card) faulty.insert(1 + rng.below(n - 1));

  Draft d;
  for (std::size_t i = 0; i < n; ++i) {
    const bool mutated = faulty.count(i) != 0;
    Formula head = mutated ? Formula::negation(x(i)) : x(i);
    Formula f = i == 0 ? head : Formula::implication(x(i - 1), head);
    d.kb.axioms.push_back(Axiom{0, std::move(f), {}});
    if (mutated) {
      d.target.axiomIds.push_back(static_cast<AxiomId>(i));
      d.kb.positives.push_back(x(i));
    }
  }
  finishAxioms(d.kb);
  return d;
}

bool acceptable(const Draft& d, std::size_t wantedCard) {
  if (d.kb.axioms.empty() || d.target.axiomIds.size() != wantedCard) return false;
  try {
    validateTarget(d.kb, d.target);
    const auto ds = computeLeadingDiagnoses(d.kb, FaultProbabilities(d.kb.size()), 2);
    return ds.size() >= 2;
  } catch (const Error&) {
    return false;
  }
}

constexpr int kRetryBudget = 64;

}  // namespace

Scenario generateScenario(const ScenarioParams& params) {
  if (params.faultCardinality < 1) throw Error("fault cardinality must be at least 1");
  if (params.numAxioms < params.faultCardinality) throw Error("need numAxioms >= fault cardinality");

  std::uint64_t seed = params.seed;
  for (int attempt = 0; attempt < kRetryBudget; ++attempt) {
    Rng rng(seed);
    Draft d = params.family == ScenarioFamily::Chain ? draftChain(params, rng) : draftRandom(params, rng);
    if (acceptable(d, params.faultCardinality)) {
      Scenario s;
      s.params = params;
      s.params.seed = seed;
      s.kb = std::move(d.kb);
      s.target = std::move(d.target);
      return s;
    }
    seed = splitmix64(seed);
  }
  throw GenerationFailedError("no valid scenario after " + std::to_string(kRetryBudget) +
                              " attempts from seed " + std::to_string(params.seed));
}

std::vector<Scenario> generateBatch(std::size_t count, std::uint64_t masterSeed) {
  std::vector<Scenario> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(splitmix64(masterSeed * 0x100000001b3ULL + i));
    ScenarioParams p;
    p.family = i % 5 == 4 ? ScenarioFamily::Chain : ScenarioFamily::Random;
    p.numAxioms = 10 + rng.below(31);
    p.faultCardinality = 1 + rng.below(3);
    p.numVars = std::max<std::size_t>(6, p.numAxioms * 2 / 3);
    p.numFacts = 2 + rng.below(3);
    p.maxBodyLiterals = 2;
    p.seed = splitmix64(masterSeed ^ (0xa5a5a5a5ULL + i));
    Scenario s = generateScenario(p);
    s.id = i;
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiment grid

namespace {

auto rowKey(const ReportRow& r) {
  return std::make_tuple(r.scenarioId, static_cast<int>(r.queryType), static_cast<int>(r.heuristic),
                         static_cast<int>(r.profile));
}

struct Cell {
  std::size_t scenario;
  QueryType type;
  HeuristicKind heuristic;
  ExpertProfile profile;
};

}  // namespace

std::vector<ReportRow> ExperimentResult::rows() const {
  std::vector<ReportRow> out;
  out.reserve(cells.size());
  for (const auto& c : cells) out.push_back(c.row);
  return out;
}

ExperimentResult runExperiment(const std::vector<Scenario>& scenarios, const ExperimentGrid& grid) {
  std::vector<Cell> cells;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    for (const auto t : grid.queryTypes) {
      for (const auto h : grid.heuristics) {
        for (const auto p : grid.profiles) cells.push_back({s, t, h, p});
      }
    }
  }

  std::vector<std::optional<CellOutcome>> outcomes(cells.size());
  std::map<std::size_t, std::string> failed;
  std::mutex failedMutex;
  std::atomic<std::size_t> nextCell{0};

  auto work = [&] {
    for (std::size_t i = nextCell++; i < cells.size(); i = nextCell++) {
      const Cell& cell = cells[i];
      const Scenario& scenario = scenarios[cell.scenario];
      try {
        SessionConfig config;
        config.queryType = cell.type;
        config.heuristic = cell.heuristic;
        config.leadingCap = grid.leadingCap;
        SessionResult session = runAutoSession(scenario.kb, config, cell.profile, scenario.target);
        if (session.finalDiagnosis.axiomIds != scenario.target.axiomIds) {
          throw InvariantBreach("session ended on a diagnosis other than D*");
        }
        ReportRow row;
        row.scenarioId = scenario.id;
        row.queryType = cell.type;
        row.heuristic = cell.heuristic;
        row.profile = cell.profile;
        row.numQueries = session.metrics.numQueries;
        row.numAxioms = session.metrics.numAxioms;
        row.totalSelectionTime = session.metrics.computeTimeNanos;
        row.meanSelectionTime =
            row.numQueries == 0 ? 0 : row.totalSelectionTime / row.numQueries;
        outcomes[i] = CellOutcome{row, std::move(session)};
      } catch (const std::exception& e) {
        std::lock_guard lock(failedMutex);
        const std::string reason = std::string(toString(cell.type)) + "/" +
                                   std::string(toString(cell.heuristic)) + "/" +
                                   std::string(toString(cell.profile)) + ": " + e.what();
        failed.emplace(scenario.id, reason);
      }
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, grid.workers);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  ExperimentResult result;
  for (auto& o : outcomes) {
    if (o && failed.count(o->row.scenarioId) == 0) result.cells.push_back(std::move(*o));
  }
  std::sort(result.cells.begin(), result.cells.end(),
            [](const CellOutcome& a, const CellOutcome& b) { return rowKey(a.row) < rowKey(b.row); });
  result.failures.assign(failed.begin(), failed.end());
  return result;
}

// ---------------------------------------------------------------------------
// CSV

void writeReportCsv(std::ostream& out, const std::vector<ReportRow>& rows, bool includeTimes) {
  out << "scenarioId,queryType,heuristic,profile,#Q,#Ax";
  if (includeTimes) out << ",totalSelectionTime,meanSelectionTime";
  out << '\n';
  for (const auto& r : rows) {
    out << r.scenarioId << ',' << toString(r.queryType) << ',' << toString(r.heuristic) << ','
        << toString(r.profile) << ',' << r.numQueries << ',' << r.numAxioms;
    if (includeTimes) out << ',' << r.totalSelectionTime << ',' << r.meanSelectionTime;
    out << '\n';
  }
}

std::vector<ReportRow> readReportCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty report", 1, 1);
  if (line != "scenarioId,queryType,heuristic,profile,#Q,#Ax,totalSelectionTime,meanSelectionTime") {
    throw ParseError("unexpected report header", 1, 1);
  }
  std::vector<ReportRow> rows;
  std::size_t lineNo = 1;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 8) throw ParseError("expected 8 fields", lineNo, 1);
    try {
      ReportRow r;
      r.scenarioId = std::stoull(fields[0]);
      r.queryType = parseQueryType(fields[1]);
      r.heuristic = parseHeuristic(fields[2]);
      r.profile = parseProfile(fields[3]);
      r.numQueries = std::stoull(fields[4]);
      r.numAxioms = std::stoull(fields[5]);
      r.totalSelectionTime = std::stoull(fields[6]);
      r.meanSelectionTime = std::stoull(fields[7]);
      rows.push_back(r);
    } catch (const std::exception& e) {
      throw ParseError(std::string("bad report row: ") + e.what(), lineNo, 1);
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Summary

namespace {

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;
}

}  // namespace

Summary summarize(const std::vector<ReportRow>& rows) {
  Summary s;

  using GroupKey = std::pair<std::size_t, HeuristicKind>;
  std::map<GroupKey, std::vector<const ReportRow*>> normalGroups;
  std::map<GroupKey, std::vector<const ReportRow*>> sqGroups;
  std::vector<double> sqTimes;
  std::vector<double> normalTimes;
  for (const auto& r : rows) {
    const GroupKey key{r.scenarioId, r.heuristic};
    if (r.queryType == QueryType::Normal) {
      normalGroups[key].push_back(&r);
      normalTimes.push_back(static_cast<double>(r.meanSelectionTime));
    } else {
      sqGroups[key].push_back(&r);
      sqTimes.push_back(static_cast<double>(r.meanSelectionTime));
    }
  }

  // Q1 and Q2
  std::map<ExpertProfile, std::pair<double, std::size_t>> sumQ;
  std::map<ExpertProfile, std::pair<double, std::size_t>> sumAx;
  std::map<ExpertProfile, std::size_t> wins;
  double totalOverQ = 0.0;
  double totalOverAx = 0.0;
  std::size_t overheadCount = 0;
  for (const auto& [key, group] : normalGroups) {
    std::size_t bestQ = std::numeric_limits<std::size_t>::max();
    std::size_t bestAx = std::numeric_limits<std::size_t>::max();
    for (const auto* r : group) {
      bestQ = std::min(bestQ, r->numQueries);
      bestAx = std::min(bestAx, r->numAxioms);
    }
    for (const auto* r : group) {
      auto& q = sumQ[r->profile];
      q.first += static_cast<double>(r->numQueries);
      ++q.second;
      auto& ax = sumAx[r->profile];
      ax.first += static_cast<double>(r->numAxioms);
      ++ax.second;
      if (r->numAxioms == bestAx) ++wins[r->profile];
      if (bestQ == 0 || bestAx == 0) continue;
      const double overQ = 100.0 * static_cast<double>(r->numQueries - bestQ) / static_cast<double>(bestQ);
      const double overAx = 100.0 * static_cast<double>(r->numAxioms - bestAx) / static_cast<double>(bestAx);
      s.maxOverheadQueries = std::max(s.maxOverheadQueries, overQ);
      s.maxOverheadAxioms = std::max(s.maxOverheadAxioms, overAx);
      totalOverQ += overQ;
      totalOverAx += overAx;
      ++overheadCount;
    }
  }
  if (overheadCount > 0) {
    s.meanOverheadQueries = totalOverQ / static_cast<double>(overheadCount);
    s.meanOverheadAxioms = totalOverAx / static_cast<double>(overheadCount);
  }
  auto ranking = [](const std::map<ExpertProfile, std::pair<double, std::size_t>>& sums) {
    std::vector<std::pair<ExpertProfile, double>> out;
    for (const auto& [p, acc] : sums) out.emplace_back(p, acc.first / static_cast<double>(acc.second));
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
    return out;
  };
  s.rankingQueries = ranking(sumQ);
  s.rankingAxioms = ranking(sumAx);
  s.winsAxioms.assign(wins.begin(), wins.end());

  // Q3
  std::size_t betterAx = 0;
  std::size_t betterQ = 0;
  for (const auto& [key, sqRows] : sqGroups) {
    const auto it = normalGroups.find(key);
    if (it == normalGroups.end()) continue;
    std::size_t sqAx = std::numeric_limits<std::size_t>::max();
    std::size_t sqQ = std::numeric_limits<std::size_t>::max();
    for (const auto* r : sqRows) {
      sqAx = std::min(sqAx, r->numAxioms);
      sqQ = std::min(sqQ, r->numQueries);
    }
    std::size_t bestAx = std::numeric_limits<std::size_t>::max();
    std::size_t bestQ = std::numeric_limits<std::size_t>::max();
    for (const auto* r : it->second) {
      bestAx = std::min(bestAx, r->numAxioms);
      bestQ = std::min(bestQ, r->numQueries);
    }
    ++s.comparedGroups;
    if (sqAx < bestAx) ++betterAx;
    if (sqQ < bestQ) ++betterQ;
  }
  if (s.comparedGroups > 0) {
    s.sqBetterAxiomsFraction = static_cast<double>(betterAx) / static_cast<double>(s.comparedGroups);
    s.sqBetterQueriesFraction = static_cast<double>(betterQ) / static_cast<double>(s.comparedGroups);
  }

  // Q4
  s.medianSelectionSq = median(sqTimes);
  s.medianSelectionNormal = median(normalTimes);
  if (s.medianSelectionNormal > 0.0) {
    s.selectionReductionPercent = 100.0 * (1.0 - s.medianSelectionSq / s.medianSelectionNormal);
  }
  return s;
}

void printSummary(std::ostream& out, const Summary& s) {
  const auto flags = out.flags();
  out << std::fixed << std::setprecision(1);
  out << "Q1 expert-profile overhead on normal queries (vs best profile per scenario/heuristic)\n"
      << "   #Q : max " << s.maxOverheadQueries << "%, mean " << s.meanOverheadQueries << "%\n"
      << "   #Ax: max " << s.maxOverheadAxioms << "%, mean " << s.meanOverheadAxioms << "%\n"
      << "   (query-based negative answers are charged up to the first false axiom)\n";
  out << "Q2 profile ranking on normal queries (mean, best first)\n   #Q :";
  for (const auto& [p, v] : s.rankingQueries) out << ' ' << toString(p) << '=' << std::setprecision(2) << v;
  out << "\n   #Ax:";
  for (const auto& [p, v] : s.rankingAxioms) out << ' ' << toString(p) << '=' << std::setprecision(2) << v;
  out << "\n   best-#Ax wins (ties count):";
  for (const auto& [p, n] : s.winsAxioms) out << ' ' << toString(p) << '=' << n;
  out << '\n' << std::setprecision(1);
  out << "Q3 SQ strictly better than best normal profile over " << s.comparedGroups << " groups\n"
      << "   #Ax: " << 100.0 * s.sqBetterAxiomsFraction << "%, #Q: " << 100.0 * s.sqBetterQueriesFraction
      << "%\n";
  out << "Q4 median per-query selection time\n"
      << "   SQ " << s.medianSelectionSq << " ns, normal " << s.medianSelectionNormal << " ns, reduction "
      << s.selectionReductionPercent << "%\n";
  out.flags(flags);
}

}  // namespace oracle_loop
