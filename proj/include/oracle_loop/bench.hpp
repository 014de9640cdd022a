#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "oracle_loop/expert.hpp"
#include "oracle_loop/kb.hpp"
#include "oracle_loop/session.hpp"

namespace oracle_loop {

enum class ScenarioFamily {
  Random,  // implication clauses over a hidden model, faults by head negation
  Chain,   // x0, x0 -> x1, ..., with the mutated heads pinned as positive tests
};

struct ScenarioParams {
  ScenarioFamily family = ScenarioFamily::Random;
  std::size_t numVars = 12;
  std::size_t numAxioms = 16;
  std::size_t faultCardinality = 1;
  std::size_t maxBodyLiterals = 2;
  std::size_t numFacts = 3;
  std::uint64_t seed = 1;
};

struct Scenario {
  std::size_t id = 0;
  ScenarioParams params;
  KnowledgeBase kb;
  TargetDiagnosis target;
};

/// Deterministic in the seed. The mutated axioms are verified to form a
/// minimal diagnosis the oracle can defend, and the KB must have at least two
/// minimal diagnoses. Retries with derived seeds, then throws
/// GenerationFailedError.
Scenario generateScenario(const ScenarioParams& params);

/// The default batch: |K| in [10, 40], |D*| in {1, 2, 3}, every fifth
/// scenario from the chain family.
std::vector<Scenario> generateBatch(std::size_t count, std::uint64_t masterSeed);

struct ExperimentGrid {
  std::vector<QueryType> queryTypes{QueryType::SQ, QueryType::Normal};
  std::vector<HeuristicKind> heuristics{HeuristicKind::ENT, HeuristicKind::SPL};
  std::vector<ExpertProfile> profiles{std::begin(kAllProfiles), std::end(kAllProfiles)};
  std::size_t leadingCap = 9;
  std::size_t workers = 1;
};

struct ReportRow {
  std::size_t scenarioId = 0;
  QueryType queryType = QueryType::SQ;
  HeuristicKind heuristic = HeuristicKind::ENT;
  ExpertProfile profile = ExpertProfile::QueryBased;
  std::size_t numQueries = 0;
  std::size_t numAxioms = 0;
  std::uint64_t totalSelectionTime = 0;  // nanoseconds
  std::uint64_t meanSelectionTime = 0;   // nanoseconds per query, rounded down
};

/// Per-cell detail that does not go into the CSV.
struct CellOutcome {
  ReportRow row;
  SessionResult session;
};

struct ExperimentResult {
  std::vector<CellOutcome> cells;  // sorted like the rows
  std::vector<std::pair<std::size_t, std::string>> failures;  // scenario id, reason

  std::vector<ReportRow> rows() const;
};

/// Runs every (scenario × query type × heuristic × profile) cell. A cell
/// that throws, or ends on anything but D*, drops its whole scenario and is
/// listed in `failures`.
ExperimentResult runExperiment(const std::vector<Scenario>& scenarios, const ExperimentGrid& grid);

/// CSV with header `scenarioId,queryType,heuristic,profile,#Q,#Ax,
/// totalSelectionTime,meanSelectionTime`.
void writeReportCsv(std::ostream& out, const std::vector<ReportRow>& rows, bool includeTimes = true);
std::vector<ReportRow> readReportCsv(std::istream& in);

struct Summary {
  // Q1: overhead of each profile over the best profile of the same
  // (scenario, heuristic), normal queries only, in percent.
  double maxOverheadQueries = 0.0;
  double meanOverheadQueries = 0.0;
  double maxOverheadAxioms = 0.0;
  double meanOverheadAxioms = 0.0;

  // Q2: mean metric per profile on normal queries, best first, plus the
  // number of (scenario, heuristic) groups each profile wins or ties.
  std::vector<std::pair<ExpertProfile, double>> rankingQueries;
  std::vector<std::pair<ExpertProfile, double>> rankingAxioms;
  std::vector<std::pair<ExpertProfile, std::size_t>> winsAxioms;

  // Q3: share of (scenario, heuristic) groups where SQ beats the best
  // normal-query profile strictly.
  std::size_t comparedGroups = 0;
  double sqBetterAxiomsFraction = 0.0;
  double sqBetterQueriesFraction = 0.0;

  // Q4: medians over rows of the mean per-query selection time.
  double medianSelectionSq = 0.0;
  double medianSelectionNormal = 0.0;
  double selectionReductionPercent = 0.0;

  friend bool operator==(const Summary&, const Summary&) = default;
};

Summary summarize(const std::vector<ReportRow>& rows);

void printSummary(std::ostream& out, const Summary& s);

}  // namespace oracle_loop
