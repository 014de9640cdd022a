#include "oracle_loop/kb.hpp"

#include <algorithm>
#include <sstream>

#include "oracle_loop/error.hpp"
#include "oracle_loop/sat.hpp"

namespace oracle_loop {

std::vector<Formula> KnowledgeBase::formulasOf(std::span<const AxiomId> ids) const {
  std::vector<Formula> out;
  out.reserve(ids.size());
  for (const AxiomId id : ids) out.push_back(axioms.at(static_cast<std::size_t>(id)).formula);
  return out;
}

std::vector<Formula> KnowledgeBase::complementOf(std::span<const AxiomId> ids) const {
  std::vector<char> removed(axioms.size(), 0);
  for (const AxiomId id : ids) removed.at(static_cast<std::size_t>(id)) = 1;
  std::vector<Formula> out;
  out.reserve(axioms.size());
  for (std::size_t i = 0; i < axioms.size(); ++i) {
    if (!removed[i]) out.push_back(axioms[i].formula);
  }
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

KnowledgeBase parseKB(std::string_view text) {
  KnowledgeBase kb;
  std::vector<Formula>* target = nullptr;
  bool inK = false;
  bool seen[4] = {false, false, false, false};

  std::istringstream in{std::string(text)};
  std::string rawLine;
  std::size_t lineNo = 0;
  while (std::getline(in, rawLine)) {
    ++lineNo;
    std::string_view raw = rawLine;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    const auto indent = static_cast<std::size_t>(line.data() - raw.data());

    if (line.front() == '[') {
      static constexpr std::string_view kHeaders[4] = {"[K]", "[B]", "[P]", "[N]"};
      const auto it = std::find(std::begin(kHeaders), std::end(kHeaders), line);
      if (it == std::end(kHeaders)) {
        throw ParseError("unknown section header '" + std::string(line) + "'", lineNo, indent + 1);
      }
      const auto section = static_cast<std::size_t>(it - std::begin(kHeaders));
      if (seen[section]) {
        throw ParseError("duplicate section " + std::string(line), lineNo, indent + 1);
      }
      seen[section] = true;
      inK = section == 0;
      std::vector<Formula>* targets[4] = {nullptr, &kb.background, &kb.positives, &kb.negatives};
      target = targets[section];
      continue;
    }

    if (!inK && target == nullptr) {
      throw ParseError("formula outside of any section", lineNo, indent + 1);
    }
    Formula f = [&] {
      try {
        return parseFormula(line);
      } catch (const ParseError& e) {
        throw ParseError(e.detail(), lineNo, indent + e.column());
      }
    }();
    if (inK) {
      kb.axioms.push_back(Axiom{static_cast<AxiomId>(kb.axioms.size()), std::move(f), std::string(line)});
    } else {
      target->push_back(std::move(f));
    }
  }
  if (kb.axioms.empty()) throw ParseError("no axioms in section [K]", lineNo + 1, 1);
  return kb;
}

std::string serializeKB(const KnowledgeBase& kb) {
  std::ostringstream out;
  out << "[K]\n";
  for (const auto& ax : kb.axioms) out << ax.formula.toString() << '\n';
  auto section = [&](const char* header, const std::vector<Formula>& fs) {
    if (fs.empty()) return;
    out << header << '\n';
    for (const auto& f : fs) out << f.toString() << '\n';
  };
  section("[B]", kb.background);
  section("[P]", kb.positives);
  section("[N]", kb.negatives);
  return out.str();
}

bool violates(std::span<const Formula> kPart, const KnowledgeBase& kb) {
  sat::Solver solver;
  sat::CnfEncoder encoder(solver);
  for (const auto& f : kPart) encoder.assertFormula(f);
  for (const auto& f : kb.background) encoder.assertFormula(f);
  for (const auto& f : kb.positives) encoder.assertFormula(f);

  // One selector per negative test case: selector -> ¬n.
  std::vector<sat::Lit> selectors;
  selectors.reserve(kb.negatives.size());
  for (const auto& n : kb.negatives) {
    const sat::Lit nLit = encoder.define(n);
    const sat::Lit selector = sat::mkLit(solver.newVar());
    solver.addClause({sat::negate(selector), sat::negate(nLit)});
    selectors.push_back(selector);
  }

  if (!solver.solve()) return true;
  for (const sat::Lit selector : selectors) {
    const sat::Lit assumption[1] = {selector};
    if (!solver.solve(assumption)) return true;
  }
  return false;
}

bool violatesIds(std::span<const AxiomId> ids, const KnowledgeBase& kb) {
  const auto formulas = kb.formulasOf(ids);
  return violates(formulas, kb);
}

}  // namespace oracle_loop
