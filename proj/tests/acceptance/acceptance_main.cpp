// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "oracle_loop/bench.hpp"
#include "oracle_loop/error.hpp"
#include "oracle_loop/sat.hpp"
#include "oracle_loop/session.hpp"
#include "oracles.hpp"

using namespace oracle_loop;
namespace oracles = oracle_loop::testing;

namespace {

int g_failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << " | " << detail << std::endl;
  if (!ok) ++g_failures;
}

struct Instance {
  std::string label;
  KnowledgeBase kb;
  TargetDiagnosis target;
};

std::vector<Instance> smallInstances() {
  std::vector<Instance> out;
  out.push_back({"fixture chain", parseKB("[K]\nx\nx -> y\ny -> z\n[B]\n~z\n"), {{1}}});
  out.push_back({"fixture four", parseKB("[K]\na\n~a\nb\n~b\n"), {{0, 2}}});
  out.push_back({"fixture pair", parseKB("[K]\na\n~a\n"), {{1}}});
  std::mt19937_64 rng(20261016);
  for (int i = 0; i < 60; ++i) {
    ScenarioParams p;
    p.family = i % 5 == 4 ? ScenarioFamily::Chain : ScenarioFamily::Random;
    p.numAxioms = 6 + rng() % 7;
    p.numVars = 5 + rng() % 4;
    p.faultCardinality = 1 + rng() % 3;
    p.numFacts = 2 + rng() % 2;
    p.seed = rng();
    Scenario s = generateScenario(p);
    out.push_back({"random " + std::to_string(i), std::move(s.kb), std::move(s.target)});
  }
  return out;
}

std::vector<AxiomSet> idsOf(const DiagnosisSet& ds) {
  std::vector<AxiomSet> out;
  for (const auto& d : ds.diagnoses) out.push_back(d.axiomIds);
  std::sort(out.begin(), out.end());
  return out;
}

// Test cases an answer adds, built here rather than through the session.
KnowledgeBase withAnswer(const KnowledgeBase& kb, const Query& q, const Answer& a) {
  KnowledgeBase out = kb;
  const auto f = [&](AxiomId id) { return kb.axioms[static_cast<std::size_t>(id)].formula; };
  if (a.kind == AnswerKind::WholeQueryTrue) {
    for (const AxiomId id : q.axiomIds) out.positives.push_back(f(id));
  } else if (a.kind == AnswerKind::WholeQueryFalse) {
    out.negatives.push_back(Formula::conjunctionOf(kb.formulasOf(q.axiomIds)));
  } else {
    for (const auto& l : a.labels) (l.entailed ? out.positives : out.negatives).push_back(f(l.id));
  }
  return out;
}

std::vector<std::size_t> oracleEliminated(const SessionState& s, const Query& q, const Answer& a) {
  const KnowledgeBase updated = withAnswer(s.kb, q, a);
  const oracles::KbOracle o(updated);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < s.ds.size(); ++i) {
    if (o.violates(o.full() & ~oracles::maskOf(s.ds.diagnoses[i].axiomIds))) out.push_back(i);
  }
  return out;
}

bool subset(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

struct SmallStats {
  std::size_t sessions = 0;
  std::size_t queries = 0;
  std::size_t invalidQueries = 0;
  std::size_t noElimination = 0;
  std::size_t wrongResult = 0;
  std::size_t errors = 0;
  std::size_t classifications = 0;
  std::size_t membershipMismatch = 0;
  std::size_t eliminationChecks = 0;
  std::size_t orderingViolations = 0;
  std::size_t oracleEliminationMismatch = 0;
  std::size_t sqSelections = 0;
  std::uint64_t sqSolverCalls = 0;
  std::string firstProblem;

  void note(const std::string& what) {
    if (firstProblem.empty()) firstProblem = what;
  }
};

// Drives one session with per-query cross-checks against the oracles.
void driveChecked(const Instance& inst, QueryType type, HeuristicKind h, ExpertProfile profile,
                  SmallStats& st) {
  SessionConfig config;
  config.queryType = type;
  config.heuristic = h;
  ++st.sessions;
  const std::string where = inst.label + " " + std::string(toString(type)) + "/" +
                            std::string(toString(h)) + "/" + std::string(toString(profile));
  try {
    SessionState state = newSession(inst.kb, config);
    for (std::size_t guard = 0; !state.finished; ++guard) {
      if (guard > 10 * inst.kb.size()) throw IterationCapError("too many queries");

      const auto before = solverCallCount();
      selectBestSQ(state.ds, h);
      st.sqSolverCalls += solverCallCount() - before;
      ++st.sqSelections;

      const auto q = nextQuery(state);
      if (!q) break;
      ++st.queries;

      // Membership vs. solver vs. truth table on the current test cases.
      const auto part = qPartitionByMembership(*q, state.ds);
      if (!part.isValid()) {
        ++st.invalidQueries;
        st.note("invalid query in " + where);
      }
      const oracles::KbOracle o(state.kb);
      std::vector<Formula> queryFormulas = state.kb.formulasOf(q->axiomIds);
      for (std::size_t i = 0; i < state.ds.size(); ++i) {
        const auto& d = state.ds.diagnoses[i].axiomIds;
        const bool memberPlus = std::find(part.dPlus.begin(), part.dPlus.end(), i) != part.dPlus.end();

        std::vector<Formula> kept = state.kb.complementOf(d);
        std::vector<Formula> theory = kept;
        theory.insert(theory.end(), state.kb.background.begin(), state.kb.background.end());
        theory.insert(theory.end(), state.kb.positives.begin(), state.kb.positives.end());
        bool solverPlus = true;
        for (const auto& f : queryFormulas) solverPlus = solverPlus && entails(theory, f);
        std::vector<Formula> extended = kept;
        extended.insert(extended.end(), queryFormulas.begin(), queryFormulas.end());
        const bool solverMinus = !solverPlus && violates(extended, state.kb);

        const auto side = oracles::semanticSide(o, d, q->axiomIds);
        ++st.classifications;
        const bool agree = memberPlus ? (solverPlus && side == oracles::Side::Plus)
                                      : (solverMinus && side == oracles::Side::Minus);
        if (!agree) {
          ++st.membershipMismatch;
          st.note("classification mismatch in " + where);
        }
      }

      // Elimination power of every profile's answer to this same query.
      std::vector<std::vector<std::size_t>> eliminated;
      for (const auto p : kAllProfiles) {
        const Answer a = answerQuery(*q, p, inst.target);
        auto lib = eliminatedDiagnoses(state, *q, a);
        const auto ref = oracleEliminated(state, *q, a);
        if (lib != ref) {
          ++st.oracleEliminationMismatch;
          st.note("elimination differs from oracle in " + where);
        }
        eliminated.push_back(std::move(lib));
      }
      ++st.eliminationChecks;
      for (std::size_t k = 0; k + 1 < eliminated.size(); ++k) {
        if (!subset(eliminated[k], eliminated[k + 1])) {
          ++st.orderingViolations;
          st.note("elimination ordering broken in " + where);
        }
      }

      const Answer answer = answerQuery(*q, profile, inst.target);
      state = integrateAnswer(state, *q, answer);
      if (state.history.back().eliminated == 0) {
        ++st.noElimination;
        st.note("answer eliminated nothing in " + where);
      }
    }
    if (!state.result || state.result->axiomIds != inst.target.axiomIds) {
      ++st.wrongResult;
      st.note("wrong final diagnosis in " + where);
    }
  } catch (const std::exception& e) {
    ++st.errors;
    st.note(where + ": " + e.what());
  }
}

std::string csvWithoutTimes(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  writeReportCsv(out, rows, false);
  return out.str();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();

  // --- 200-scenario batch on the full grid, single worker for timing.
  const std::uint64_t seed = 1;
  const auto batch = generateBatch(200, seed);
  ExperimentGrid grid;
  grid.workers = 1;
  const auto result = runExperiment(batch, grid);
  const auto rows = result.rows();

  {
    std::size_t correct = 0;
    for (const auto& cell : result.cells) {
      const auto& target = batch[cell.row.scenarioId].target.axiomIds;
      if (cell.session.finalDiagnosis.axiomIds == target) ++correct;
    }
    const std::size_t expected = batch.size() * 16;
    std::size_t minK = 1000, maxK = 0, maxCard = 0;
    for (const auto& s : batch) {
      minK = std::min(minK, s.kb.size());
      maxK = std::max(maxK, s.kb.size());
      maxCard = std::max(maxCard, s.target.axiomIds.size());
    }
    std::string detail = std::to_string(correct) + "/" + std::to_string(expected) +
                         " cells returned D* (|K| " + std::to_string(minK) + "-" + std::to_string(maxK) +
                         ", |D*| <= " + std::to_string(maxCard) + ", " + std::to_string(result.failures.size()) +
                         " scenarios dropped)";
    if (!result.failures.empty()) detail += "; first: " + result.failures.front().second;
    report(result.failures.empty() && correct == expected && result.cells.size() == expected && maxCard <= 3,
           "G1 correctness", detail);
  }

  // --- Oracle equivalence on small instances.
  const auto small = smallInstances();
  {
    std::size_t matched = 0;
    std::string problem;
    for (const auto& inst : small) {
      const FaultProbabilities probs(inst.kb.size());
      const auto hs = idsOf(computeLeadingDiagnoses(inst.kb, probs, kAllDiagnoses));
      const auto bf = idsOf(bruteForceDiagnoses(inst.kb, static_cast<int>(inst.kb.size()), probs));
      const auto tt = oracles::oracleDiagnoses(inst.kb);
      if (hs == bf && bf == tt) {
        ++matched;
      } else if (problem.empty()) {
        problem = "; mismatch on " + inst.label;
      }
    }
    report(matched == small.size() && small.size() >= 53, "Oracle equivalence",
           std::to_string(matched) + "/" + std::to_string(small.size()) +
               " instances with |K| <= 12 (3 fixtures) agree with subset enumeration and truth tables" + problem);
  }

  // --- Checked sessions on the small instances.
  SmallStats st;
  for (const auto& inst : small) {
    for (const auto type : {QueryType::SQ, QueryType::Normal}) {
      for (const auto h : {HeuristicKind::ENT, HeuristicKind::SPL}) {
        for (const auto p : kAllProfiles) driveChecked(inst, type, h, p, st);
      }
    }
  }
  const std::string problem = st.firstProblem.empty() ? "" : "; first: " + st.firstProblem;

  {
    std::size_t batchEntries = 0, batchNoElim = 0;
    for (const auto& cell : result.cells) {
      for (const auto& h : cell.session.history) {
        ++batchEntries;
        if (h.eliminated == 0) ++batchNoElim;
      }
    }
    report(st.invalidQueries == 0 && st.noElimination == 0 && st.errors == 0 && batchNoElim == 0,
           "Query validity",
           std::to_string(st.queries) + " checked queries valid, " + std::to_string(batchEntries) +
               " batch answers each eliminated >= 1 diagnosis (" + std::to_string(batchNoElim) + " did not)" +
               problem);
  }

  report(st.membershipMismatch == 0 && st.classifications > 0 && st.errors == 0,
         "Membership/semantic agreement",
         std::to_string(st.classifications) + " classifications, " + std::to_string(st.membershipMismatch) +
             " disagreements between membership, solver and truth table");

  {
    std::size_t sqRows = 0, sqAxMismatch = 0, groups = 0, transcriptMismatch = 0;
    std::map<std::pair<std::size_t, HeuristicKind>, std::vector<std::string>> reference;
    for (const auto& cell : result.cells) {
      if (cell.row.queryType != QueryType::SQ) continue;
      ++sqRows;
      if (cell.row.numAxioms != cell.row.numQueries) ++sqAxMismatch;
      std::vector<std::string> lines;
      for (std::size_t i = 0; i < cell.session.history.size(); ++i) {
        lines.push_back(transcriptLine(i + 1, QueryType::SQ, cell.session.history[i], false));
      }
      const auto key = std::make_pair(cell.row.scenarioId, cell.row.heuristic);
      auto [it, fresh] = reference.try_emplace(key, lines);
      if (fresh) {
        ++groups;
      } else if (it->second != lines) {
        ++transcriptMismatch;
      }
    }
    report(sqRows > 0 && sqAxMismatch == 0 && transcriptMismatch == 0, "SQ identity",
           std::to_string(sqRows) + " SQ rows with #Ax = #Q (" + std::to_string(sqAxMismatch) + " not); " +
               std::to_string(groups) + " (scenario, heuristic) groups, " + std::to_string(transcriptMismatch) +
               " transcripts differing across profiles");
  }

  {
    std::size_t negative = 0, positive = 0, violations = 0;
    for (const auto& cell : result.cells) {
      const auto& target = batch[cell.row.scenarioId].target;
      for (const auto& h : cell.session.history) {
        const Query& q = h.query;
        const auto e = [&](ExpertProfile p) { return answerQuery(q, p, target).effort; };
        const bool isNegative = std::any_of(q.axiomIds.begin(), q.axiomIds.end(),
                                            [&](AxiomId id) { return !oracleLabel(id, target); });
        if (isNegative) {
          ++negative;
          const auto mn = e(ExpertProfile::Minimalist), pr = e(ExpertProfile::Pragmatist), mx = e(ExpertProfile::Maximalist);
          if (!(mn == pr && pr <= mx)) ++violations;
        } else {
          ++positive;
          for (const auto p : {ExpertProfile::Minimalist, ExpertProfile::Pragmatist, ExpertProfile::Maximalist}) {
            if (e(p) != q.size()) ++violations;
          }
        }
      }
    }
    report(violations == 0 && negative > 0 && positive > 0, "Effort ordering",
           std::to_string(negative) + " negative and " + std::to_string(positive) + " positive answers, " +
               std::to_string(violations) + " violations");
  }

  report(st.orderingViolations == 0 && st.oracleEliminationMismatch == 0 && st.eliminationChecks > 0 &&
             st.errors == 0,
         "Elimination-power ordering",
         std::to_string(st.eliminationChecks) + " queries: qb <= min <= prag <= max held in all but " +
             std::to_string(st.orderingViolations) + "; " + std::to_string(st.oracleEliminationMismatch) +
             " eliminations differing from the truth-table oracle");

  const Summary summary = summarize(rows);
  {
    const bool fastEnough = summary.medianSelectionNormal > 0 &&
                            summary.medianSelectionSq <= 0.5 * summary.medianSelectionNormal;
    report(fastEnough && st.sqSolverCalls == 0, "Q4 selection time",
           "median SQ " + fmt(summary.medianSelectionSq) + " ns vs normal " + fmt(summary.medianSelectionNormal) +
               " ns, reduction " + fmt(summary.selectionReductionPercent) + "%; " +
               std::to_string(st.sqSolverCalls) + " solver calls over " + std::to_string(st.sqSelections) +
               " SQ selections");
  }

  // --- Second run of the same batch for reproducibility and report checks.
  const auto rerun = runExperiment(generateBatch(200, seed), grid).rows();
  {
    std::stringstream csv;
    writeReportCsv(csv, rows);
    const Summary fromCsv = summarize(readReportCsv(csv));
    const Summary again = summarize(rerun);
    const bool deterministic = again.maxOverheadQueries == summary.maxOverheadQueries &&
                               again.maxOverheadAxioms == summary.maxOverheadAxioms &&
                               again.meanOverheadQueries == summary.meanOverheadQueries &&
                               again.meanOverheadAxioms == summary.meanOverheadAxioms &&
                               again.sqBetterAxiomsFraction == summary.sqBetterAxiomsFraction &&
                               again.sqBetterQueriesFraction == summary.sqBetterQueriesFraction &&
                               again.rankingAxioms == summary.rankingAxioms &&
                               again.rankingQueries == summary.rankingQueries;
    report(fromCsv == summary && deterministic && summary.comparedGroups > 0, "Q1/Q3 report",
           "max profile overhead #Q " + fmt(summary.maxOverheadQueries) + "%, #Ax " +
               fmt(summary.maxOverheadAxioms) + "%; SQ beats best normal on #Ax in " +
               fmt(100.0 * summary.sqBetterAxiomsFraction) + "% of " + std::to_string(summary.comparedGroups) +
               " groups (#Q " + fmt(100.0 * summary.sqBetterQueriesFraction) +
               "%); recomputed from CSV: " + (fromCsv == summary ? "equal" : "DIFFERENT") +
               "; rerun: " + (deterministic ? "equal" : "DIFFERENT"));
  }

  {
    const bool same = csvWithoutTimes(rows) == csvWithoutTimes(rerun);
    report(same && !rows.empty(), "Reproducibility",
           std::to_string(rows.size()) + " rows, CSV without time columns " +
               (same ? "identical" : "different") + " across two runs with seed " + std::to_string(seed));
  }

  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(std::chrono::steady_clock::now() - start).count();
  std::cout << "elapsed " << seconds << " s, " << g_failures << " failed" << std::endl;
  return g_failures == 0 ? 0 : 1;
}
