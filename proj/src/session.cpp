#include "oracle_loop/session.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include "oracle_loop/error.hpp"
#include "oracle_loop/sat.hpp"

namespace oracle_loop {

std::string_view toString(QueryType t) { return t == QueryType::SQ ? "sq" : "normal"; }

QueryType parseQueryType(std::string_view text) {
  if (text == "sq") return QueryType::SQ;
  if (text == "normal") return QueryType::Normal;
  throw Error("unknown query type '" + std::string(text) + "'");
}

namespace {

using Clock = std::chrono::steady_clock;

void checkFinished(SessionState& s) {
  s.finished = s.ds.size() == 1 && s.ds.complete;
  if (!s.finished && s.config.stopThreshold && !s.ds.empty() &&
      s.ds.probs.front() >= *s.config.stopThreshold) {
    s.finished = true;
  }
  if (s.finished) s.result = s.ds.diagnoses.front();
}

// A singleton whole-query answer carries exactly the information of a
// one-label answer; storing it that way keeps transcripts profile-free.
Answer normalized(const Query& q, const Answer& a) {
  if (!q.isSingleton() || a.kind == AnswerKind::AxiomLabels) return a;
  Answer out;
  out.kind = AnswerKind::AxiomLabels;
  out.labels = {{q.axiomIds.front(), a.kind == AnswerKind::WholeQueryTrue}};
  out.effort = a.effort;
  return out;
}

void checkAnswerShape(const Query& q, const Answer& a) {
  if (a.kind != AnswerKind::AxiomLabels) {
    if (!a.labels.empty()) throw AnswerMismatchError("whole-query answer must not carry labels");
    return;
  }
  if (a.labels.empty()) throw AnswerMismatchError("label answer without labels");
  std::size_t cursor = 0;
  for (const auto& label : a.labels) {
    while (cursor < q.size() && q.axiomIds[cursor] != label.id) ++cursor;
    if (cursor == q.size()) {
      throw AnswerMismatchError("label for axiom " + std::to_string(label.id) +
                                " is not part of the query or out of order");
    }
    ++cursor;
  }
}

KnowledgeBase withTestCases(const KnowledgeBase& kb, const Query& q, const Answer& a) {
  KnowledgeBase out = kb;
  switch (a.kind) {
    case AnswerKind::WholeQueryTrue:
      for (const AxiomId id : q.axiomIds) out.positives.push_back(kb.axioms.at(static_cast<std::size_t>(id)).formula);
      break;
    case AnswerKind::WholeQueryFalse:
      out.negatives.push_back(Formula::conjunctionOf(kb.formulasOf(q.axiomIds)));
      break;
    case AnswerKind::AxiomLabels:
      for (const auto& label : a.labels) {
        const auto& f = kb.axioms.at(static_cast<std::size_t>(label.id)).formula;
        (label.entailed ? out.positives : out.negatives).push_back(f);
      }
      break;
  }
  return out;
}

std::string joinIds(const std::vector<AxiomId>& ids) {
  std::ostringstream out;
  for (std::size_t i = 0; i < ids.size(); ++i) out << (i ? "," : "") << ids[i];
  return out.str();
}

}  // namespace

SessionState newSession(KnowledgeBase kb, SessionConfig config) {
  if (config.leadingCap < 2) throw Error("leading-diagnoses cap must be at least 2");
  SessionState s;
  s.probs = config.faultProbs ? *config.faultProbs : FaultProbabilities(kb.size());
  if (s.probs.size() != kb.size()) throw Error("fault probabilities do not match |K|");
  s.kb = std::move(kb);
  s.config = std::move(config);
  s.ds = computeLeadingDiagnoses(s.kb, s.probs, s.config.leadingCap, s.conflicts);
  if (s.ds.empty()) throw KbAlreadyValidError("the knowledge base already meets every requirement");
  checkFinished(s);
  return s;
}

std::optional<Query> nextQuery(SessionState& state) {
  if (state.finished) return std::nullopt;
  if (state.pending) return state.pending->query;

  const auto start = Clock::now();
  std::optional<Query> q = state.config.queryType == QueryType::SQ
                               ? selectBestSQ(state.ds, state.config.heuristic)
                               : selectBestNormalQuery(state.ds, state.config.heuristic, state.kb.size());
  const auto nanos = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count());

  if (!q) throw InvariantBreach("no valid query although several diagnoses remain");
  if (!qPartitionByMembership(*q, state.ds).isValid()) {
    throw InvariantBreach("selected query does not split the leading diagnoses");
  }
  state.pending = PendingQuery{*q, nanos};
  state.metrics.computeTimeNanos += nanos;
  state.metrics.perIterationTimes.push_back(nanos);
  return q;
}

std::vector<std::size_t> eliminatedDiagnoses(const SessionState& state, const Query& q,
                                             const Answer& a) {
  const KnowledgeBase updated = withTestCases(state.kb, q, normalized(q, a));
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < state.ds.size(); ++i) {
    const auto kept = updated.complementOf(state.ds.diagnoses[i].axiomIds);
    if (violates(kept, updated)) out.push_back(i);
  }
  return out;
}

SessionState integrateAnswer(const SessionState& state, const Query& q, const Answer& a) {
  if (state.finished) throw AnswerMismatchError("session already finished");
  if (!state.pending || state.pending->query != q) {
    throw AnswerMismatchError("answer does not belong to the pending query");
  }
  checkAnswerShape(q, a);
  const Answer answer = normalized(q, a);

  SessionState next = state;
  const auto eliminated = eliminatedDiagnoses(state, q, answer);
  if (eliminated.empty()) throw InvariantBreach("answer ruled out no leading diagnosis");

  next.kb = withTestCases(state.kb, q, answer);
  next.ds = computeLeadingDiagnoses(next.kb, next.probs, next.config.leadingCap, next.conflicts);
  if (next.ds.empty()) throw InvariantBreach("answers left no diagnosis");

  next.metrics.numQueries += 1;
  next.metrics.numAxioms += answer.effort;
  next.history.push_back(HistoryEntry{q, answer, eliminated.size(), state.pending->selectionNanos,
                                      next.metrics.numQueries, next.metrics.numAxioms});
  next.pending.reset();
  checkFinished(next);
  return next;
}

Answer answerFromLabels(const Query& q, std::vector<AxiomLabel> labels) {
  Answer a;
  a.kind = AnswerKind::AxiomLabels;
  a.labels = std::move(labels);
  checkAnswerShape(q, a);
  const auto last = std::find(q.axiomIds.begin(), q.axiomIds.end(), a.labels.back().id);
  a.effort = static_cast<std::size_t>(last - q.axiomIds.begin()) + 1;
  return a;
}

Answer answerFromWhole(const Query& q, bool entailed, std::optional<std::size_t> effort) {
  Answer a;
  a.kind = entailed ? AnswerKind::WholeQueryTrue : AnswerKind::WholeQueryFalse;
  a.effort = effort.value_or(q.size());
  if (a.effort == 0 || a.effort > q.size()) throw AnswerMismatchError("effort outside 1..|Q|");
  return a;
}

void validateTarget(const KnowledgeBase& kb, const TargetDiagnosis& target) {
  const auto& ids = target.axiomIds;
  if (!std::is_sorted(ids.begin(), ids.end()) ||
      std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw Error("target diagnosis ids must be sorted and unique");
  }
  for (const AxiomId id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= kb.size()) throw Error("target id outside K");
  }
  const auto kept = kb.complementOf(ids);
  if (violates(kept, kb)) throw Error("target is not a diagnosis: K \\ D* still violates");
  for (std::size_t i = 0; i < ids.size(); ++i) {
    AxiomSet smaller = ids;
    smaller.erase(smaller.begin() + static_cast<std::ptrdiff_t>(i));
    if (!violates(kb.complementOf(smaller), kb)) throw Error("target diagnosis is not minimal");
  }
  // The intended KB K \ D* (with B, P) must leave each faulty axiom open,
  // otherwise a "false" label would contradict the expert's own KB.
  std::vector<Formula> intended = kept;
  intended.insert(intended.end(), kb.background.begin(), kb.background.end());
  intended.insert(intended.end(), kb.positives.begin(), kb.positives.end());
  for (const AxiomId id : ids) {
    if (entails(intended, kb.axioms[static_cast<std::size_t>(id)].formula)) {
      throw Error("axiom " + std::to_string(id) + " of the target is entailed by K \\ D*");
    }
  }
}

SessionResult runAutoSession(const KnowledgeBase& kb, const SessionConfig& config,
                             ExpertProfile profile, const TargetDiagnosis& target) {
  validateTarget(kb, target);
  SessionState state = newSession(kb, config);
  const std::size_t cap = std::max<std::size_t>(1, config.iterationCapFactor * kb.size());

  while (!state.finished) {
    if (state.history.size() >= cap) {
      throw IterationCapError("session did not converge within " + std::to_string(cap) + " queries");
    }
    const auto q = nextQuery(state);
    if (!q) break;
    state = integrateAnswer(state, *q, answerQuery(*q, profile, target));
  }

  SessionResult result;
  result.finalDiagnosis = state.result.value_or(Diagnosis{});
  result.metrics = state.metrics;
  result.history = state.history;
  for (std::size_t i = 0; i < state.history.size(); ++i) {
    result.transcript.push_back(transcriptLine(i + 1, config.queryType, state.history[i]));
  }
  return result;
}

std::string transcriptLine(std::size_t iteration, QueryType type, const HistoryEntry& entry,
                           bool includeTiming) {
  std::ostringstream out;
  out << iteration << '\t' << toString(type) << '\t' << joinIds(entry.query.axiomIds) << '\t'
      << toString(entry.answer.kind) << '\t';
  if (entry.answer.labels.empty()) out << '-';
  for (std::size_t i = 0; i < entry.answer.labels.size(); ++i) {
    const auto& l = entry.answer.labels[i];
    out << (i ? "," : "") << l.id << ':' << (l.entailed ? 'T' : 'F');
  }
  out << '\t' << entry.answer.effort << '\t' << entry.cumulativeQueries << '\t'
      << entry.cumulativeAxioms;
  if (includeTiming) out << '\t' << entry.selectionNanos;
  return out.str();
}

}  // namespace oracle_loop
