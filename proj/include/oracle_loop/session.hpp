#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oracle_loop/diagnosis.hpp"
#include "oracle_loop/expert.hpp"
#include "oracle_loop/kb.hpp"
#include "oracle_loop/query.hpp"

namespace oracle_loop {

enum class QueryType { SQ, Normal };

std::string_view toString(QueryType t);
QueryType parseQueryType(std::string_view text);

struct SessionConfig {
  QueryType queryType = QueryType::SQ;
  HeuristicKind heuristic = HeuristicKind::ENT;
  std::size_t leadingCap = 9;
  /// Defaults to p = 0.1 for every axiom.
  std::optional<FaultProbabilities> faultProbs;
  std::uint64_t randomSeed = 0;
  /// Stop early once the top diagnosis reaches this probability. Off by default.
  std::optional<double> stopThreshold;
  /// runAutoSession gives up after iterationCapFactor · |K| queries.
  std::size_t iterationCapFactor = 10;
};

struct Metrics {
  std::size_t numQueries = 0;  // #Q
  std::size_t numAxioms = 0;   // #Ax, sum of answer efforts
  std::uint64_t computeTimeNanos = 0;
  std::vector<std::uint64_t> perIterationTimes;
};

struct HistoryEntry {
  Query query;
  Answer answer;
  std::size_t eliminated = 0;  // leading diagnoses ruled out by this answer
  std::uint64_t selectionNanos = 0;
  std::size_t cumulativeQueries = 0;
  std::size_t cumulativeAxioms = 0;
};

struct PendingQuery {
  Query query;
  std::uint64_t selectionNanos = 0;
};

/// State of one debugging session. Owned by a single writer at a time.
struct SessionState {
  KnowledgeBase kb;  // P and N grow as answers arrive
  SessionConfig config;
  FaultProbabilities probs{0};
  DiagnosisSet ds;
  std::vector<HistoryEntry> history;
  Metrics metrics;
  bool finished = false;
  std::optional<Diagnosis> result;
  std::optional<PendingQuery> pending;
  ConflictStore conflicts;
};

/// Throws KbAlreadyValidError if K meets all requirements and
/// NoDiagnosisError if B ∪ P cannot be repaired.
SessionState newSession(KnowledgeBase kb, SessionConfig config);

/// Query for the current iteration, nullopt once finished. Repeated calls
/// before an answer return the same query and charge selection time once.
std::optional<Query> nextQuery(SessionState& state);

/// Indices into state.ds of the leading diagnoses the answer rules out,
/// by the semantic retention test. Does not modify the state.
std::vector<std::size_t> eliminatedDiagnoses(const SessionState& state, const Query& q,
                                             const Answer& a);

/// Turns the answer into test cases, drops refuted diagnoses and refills the
/// leading set. Strong guarantee: the input is left untouched on error.
SessionState integrateAnswer(const SessionState& state, const Query& q, const Answer& a);

/// Answer for a human-supplied label list; effort is the position of the
/// last labelled axiom. Throws AnswerMismatchError for foreign or
/// out-of-order labels.
Answer answerFromLabels(const Query& q, std::vector<AxiomLabel> labels);

/// Whole-query answer; effort defaults to |Q|.
Answer answerFromWhole(const Query& q, bool entailed, std::optional<std::size_t> effort = {});

struct SessionResult {
  Diagnosis finalDiagnosis;
  Metrics metrics;
  std::vector<HistoryEntry> history;
  std::vector<std::string> transcript;
};

/// Checks that the target is a minimal diagnosis the oracle can defend.
void validateTarget(const KnowledgeBase& kb, const TargetDiagnosis& target);

/// Full simulated session. Throws IterationCapError if the loop does not
/// converge within the cap, which indicates a bug.
SessionResult runAutoSession(const KnowledgeBase& kb, const SessionConfig& config,
                             ExpertProfile profile, const TargetDiagnosis& target);

/// One transcript record, tab separated: iteration, queryType, axiomIds,
/// answerKind, labels, effort, cumulative #Q, cumulative #Ax and
/// (optionally) selection time in nanoseconds.
std::string transcriptLine(std::size_t iteration, QueryType type, const HistoryEntry& entry,
                           bool includeTiming = true);

}  // namespace oracle_loop
