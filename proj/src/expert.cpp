#include "oracle_loop/expert.hpp"

#include <algorithm>
#include <string>

#include "oracle_loop/error.hpp"

namespace oracle_loop {

std::string_view toString(ExpertProfile p) {
  switch (p) {
    case ExpertProfile::QueryBased: return "qb";
    case ExpertProfile::Minimalist: return "min";
    case ExpertProfile::Pragmatist: return "prag";
    case ExpertProfile::Maximalist: return "max";
  }
  return "?";
}

ExpertProfile parseProfile(std::string_view text) {
  for (const auto p : kAllProfiles) {
    if (text == toString(p)) return p;
  }
  throw Error("unknown expert profile '" + std::string(text) + "'");
}

std::string_view toString(AnswerKind k) {
  switch (k) {
    case AnswerKind::WholeQueryTrue: return "whole-true";
    case AnswerKind::WholeQueryFalse: return "whole-false";
    case AnswerKind::AxiomLabels: return "labels";
  }
  return "?";
}

bool oracleLabel(AxiomId id, const TargetDiagnosis& target) {
  return !std::binary_search(target.axiomIds.begin(), target.axiomIds.end(), id);
}

Answer answerQuery(const Query& q, ExpertProfile profile, const TargetDiagnosis& target) {
  if (q.axiomIds.empty()) throw Error("answerQuery: empty query");

  std::vector<AxiomLabel> labels;
  labels.reserve(q.size());
  for (const AxiomId id : q.axiomIds) labels.push_back({id, oracleLabel(id, target)});
  const auto firstFalse =
      std::find_if(labels.begin(), labels.end(), [](const AxiomLabel& l) { return !l.entailed; });

  Answer a;
  if (firstFalse == labels.end()) {
    a.effort = q.size();
    if (profile == ExpertProfile::QueryBased) {
      a.kind = AnswerKind::WholeQueryTrue;
    } else {
      a.labels = std::move(labels);
    }
    return a;
  }

  const auto position = static_cast<std::size_t>(firstFalse - labels.begin()) + 1;
  switch (profile) {
    case ExpertProfile::QueryBased:
      a.kind = AnswerKind::WholeQueryFalse;
      a.effort = position;
      break;
    case ExpertProfile::Minimalist:
      a.labels = {*firstFalse};
      a.effort = position;
      break;
    case ExpertProfile::Pragmatist:
      a.labels.assign(labels.begin(), firstFalse + 1);
      a.effort = position;
      break;
    case ExpertProfile::Maximalist:
      a.labels = std::move(labels);
      a.effort = q.size();
      break;
  }
  return a;
}

}  // namespace oracle_loop
