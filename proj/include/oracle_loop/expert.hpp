#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "oracle_loop/diagnosis.hpp"
#include "oracle_loop/query.hpp"

namespace oracle_loop {

/// How a simulated expert answers a query whose conjunction is not entailed.
/// All four answer a fully entailed query by confirming every axiom.
enum class ExpertProfile {
  QueryBased,  // one boolean for the whole query
  Minimalist,  // names a single non-entailed axiom
  Pragmatist,  // labels axioms in order up to and including the first false one
  Maximalist,  // labels every axiom
};

inline constexpr ExpertProfile kAllProfiles[] = {ExpertProfile::QueryBased, ExpertProfile::Minimalist,
                                                 ExpertProfile::Pragmatist, ExpertProfile::Maximalist};

std::string_view toString(ExpertProfile p);
ExpertProfile parseProfile(std::string_view text);

/// The seeded, actually faulty axioms.
struct TargetDiagnosis {
  AxiomSet axiomIds;
};

enum class AnswerKind { WholeQueryTrue, WholeQueryFalse, AxiomLabels };

std::string_view toString(AnswerKind k);

struct AxiomLabel {
  AxiomId id = 0;
  bool entailed = false;
  friend bool operator==(const AxiomLabel&, const AxiomLabel&) = default;
};

struct Answer {
  AnswerKind kind = AnswerKind::AxiomLabels;
  std::vector<AxiomLabel> labels;  // empty unless kind == AxiomLabels
  std::size_t effort = 0;          // axioms the expert had to evaluate
  friend bool operator==(const Answer&, const Answer&) = default;
};

/// The intended KB keeps exactly K \ D*, so an axiom is entailed iff it is
/// not one of the faulty ones.
bool oracleLabel(AxiomId id, const TargetDiagnosis& target);

/// Simulated answer. Effort on a negative answer is the 1-based position of
/// the first false axiom, except for the maximalist, who pays |Q|.
Answer answerQuery(const Query& q, ExpertProfile profile, const TargetDiagnosis& target);

}  // namespace oracle_loop
