#include "oracle_loop/sat.hpp"

#include <algorithm>

namespace oracle_loop {

namespace {

thread_local std::uint64_t tSolverCalls = 0;

// Luby sequence 1,1,2,1,1,2,4,...; i is 0-based.
double luby(int i) {
  int size = 1;
  int seq = 0;
  while (size < i + 1) {
    ++seq;
    size = 2 * size + 1;
  }
  while (size - 1 != i) {
    size = (size - 1) >> 1;
    --seq;
    i = i % size;
  }
  double result = 1.0;
  for (int k = 0; k < seq; ++k) result *= 2.0;
  return result;
}

constexpr double kVarDecay = 0.95;
constexpr int kRestartBase = 64;

}  // namespace

std::uint64_t solverCallCount() { return tSolverCalls; }

namespace sat {

int Solver::newVar() {
  const int v = numVars();
  assigns_.push_back(kUndef);
  phase_.push_back(false);
  level_.push_back(0);
  reason_.push_back(-1);
  activity_.push_back(0.0);
  seen_.push_back(0);
  watches_.emplace_back();
  watches_.emplace_back();
  return v;
}

int Solver::attach(std::vector<Lit> lits) {
  const int index = static_cast<int>(clauses_.size());
  watches_[static_cast<std::size_t>(lits[0])].push_back(index);
  watches_[static_cast<std::size_t>(lits[1])].push_back(index);
  clauses_.push_back(std::move(lits));
  return index;
}

void Solver::addClause(std::vector<Lit> lits) {
  if (unsat_) return;
  std::sort(lits.begin(), lits.end());
  lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
  for (std::size_t i = 1; i < lits.size(); ++i) {
    if (lits[i] == negate(lits[i - 1])) return;  // tautology
  }
  // Everything on the trail here is a level-0 fact.
  std::size_t kept = 0;
  for (const Lit l : lits) {
    const auto v = value(l);
    if (v == kTrue) return;
    if (v == kUndef) lits[kept++] = l;
  }
  lits.resize(kept);
  if (lits.empty()) {
    unsat_ = true;
    return;
  }
  if (lits.size() == 1) {
    enqueue(lits[0], -1);
    return;
  }
  attach(std::move(lits));
}

void Solver::enqueue(Lit l, int reason) {
  const auto v = static_cast<std::size_t>(varOf(l));
  assigns_[v] = static_cast<std::int8_t>((l & 1) ? kFalse : kTrue);
  level_[v] = decisionLevel();
  reason_[v] = reason;
  trail_.push_back(l);
}

int Solver::propagate() {
  while (qhead_ < trail_.size()) {
    const Lit falseLit = negate(trail_[qhead_++]);
    auto& ws = watches_[static_cast<std::size_t>(falseLit)];
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < ws.size()) {
      const int ci = ws[i++];
      auto& c = clauses_[static_cast<std::size_t>(ci)];
      if (c[0] == falseLit) std::swap(c[0], c[1]);
      if (value(c[0]) == kTrue) {
        ws[j++] = ci;
        continue;
      }
      bool moved = false;
      for (std::size_t k = 2; k < c.size(); ++k) {
        if (value(c[k]) != kFalse) {
          std::swap(c[1], c[k]);
          watches_[static_cast<std::size_t>(c[1])].push_back(ci);
          moved = true;
          break;
        }
      }
      if (moved) continue;
      ws[j++] = ci;
      if (value(c[0]) == kFalse) {
        while (i < ws.size()) ws[j++] = ws[i++];
        ws.resize(j);
        qhead_ = trail_.size();
        return ci;
      }
      enqueue(c[0], ci);
    }
    ws.resize(j);
  }
  return -1;
}

void Solver::bump(int var) {
  auto& a = activity_[static_cast<std::size_t>(var)];
  a += varInc_;
  if (a > 1e100) {
    for (auto& x : activity_) x *= 1e-100;
    varInc_ *= 1e-100;
  }
}

void Solver::analyze(int conflict, std::vector<Lit>& learnt, int& backtrackLevel) {
  learnt.clear();
  learnt.push_back(0);  // slot for the asserting literal
  int pathCount = 0;
  Lit p = -1;
  std::size_t index = trail_.size();
  int clauseIndex = conflict;
  do {
    const auto& c = clauses_[static_cast<std::size_t>(clauseIndex)];
    for (std::size_t k = (p == -1 ? 0 : 1); k < c.size(); ++k) {
      const Lit q = c[k];
      const auto v = static_cast<std::size_t>(varOf(q));
      if (seen_[v] || level_[v] == 0) continue;
      seen_[v] = 1;
      bump(varOf(q));
      if (level_[v] >= decisionLevel()) {
        ++pathCount;
      } else {
        learnt.push_back(q);
      }
    }
    do {
      --index;
    } while (!seen_[static_cast<std::size_t>(varOf(trail_[index]))]);
    p = trail_[index];
    clauseIndex = reason_[static_cast<std::size_t>(varOf(p))];
    seen_[static_cast<std::size_t>(varOf(p))] = 0;
    --pathCount;
  } while (pathCount > 0);
  learnt[0] = negate(p);

  backtrackLevel = 0;
  std::size_t maxIndex = 1;
  for (std::size_t k = 1; k < learnt.size(); ++k) {
    const int lvl = level_[static_cast<std::size_t>(varOf(learnt[k]))];
    if (lvl > backtrackLevel) {
      backtrackLevel = lvl;
      maxIndex = k;
    }
  }
  if (learnt.size() > 1) std::swap(learnt[1], learnt[maxIndex]);
  for (const Lit l : learnt) seen_[static_cast<std::size_t>(varOf(l))] = 0;
}

void Solver::cancelUntil(int level) {
  if (decisionLevel() <= level) return;
  const auto stop = static_cast<std::size_t>(trailLim_[static_cast<std::size_t>(level)]);
  for (std::size_t k = trail_.size(); k > stop; --k) {
    const auto v = static_cast<std::size_t>(varOf(trail_[k - 1]));
    phase_[v] = (trail_[k - 1] & 1) != 0;
    assigns_[v] = kUndef;
    reason_[v] = -1;
  }
  trail_.resize(stop);
  trailLim_.resize(static_cast<std::size_t>(level));
  qhead_ = trail_.size();
}

int Solver::pickBranchVar() const {
  int best = -1;
  double bestActivity = -1.0;
  for (int v = 0; v < numVars(); ++v) {
    if (assigns_[static_cast<std::size_t>(v)] != kUndef) continue;
    if (activity_[static_cast<std::size_t>(v)] > bestActivity) {
      bestActivity = activity_[static_cast<std::size_t>(v)];
      best = v;
    }
  }
  return best;
}

bool Solver::solve(std::span<const Lit> assumptions) {
  ++tSolverCalls;
  if (unsat_) return false;
  cancelUntil(0);
  if (propagate() != -1) {
    unsat_ = true;
    return false;
  }

  std::vector<Lit> learnt;
  int restarts = 0;
  long conflictsUntilRestart = static_cast<long>(luby(restarts) * kRestartBase);
  for (;;) {
    const int conflict = propagate();
    if (conflict != -1) {
      if (decisionLevel() == 0) {
        unsat_ = true;
        return false;
      }
      int backtrackLevel = 0;
      analyze(conflict, learnt, backtrackLevel);
      cancelUntil(backtrackLevel);
      if (learnt.size() == 1) {
        enqueue(learnt[0], -1);
      } else {
        const int ci = attach(learnt);
        enqueue(learnt[0], ci);
      }
      varInc_ /= kVarDecay;
      if (--conflictsUntilRestart <= 0) {
        ++restarts;
        conflictsUntilRestart = static_cast<long>(luby(restarts) * kRestartBase);
        cancelUntil(0);
      }
      continue;
    }

    Lit next = -1;
    while (decisionLevel() < static_cast<int>(assumptions.size())) {
      const Lit a = assumptions[static_cast<std::size_t>(decisionLevel())];
      const auto v = value(a);
      if (v == kTrue) {
        trailLim_.push_back(static_cast<int>(trail_.size()));
      } else if (v == kFalse) {
        cancelUntil(0);
        return false;
      } else {
        next = a;
        break;
      }
    }
    if (next == -1) {
      const int var = pickBranchVar();
      if (var == -1) {
        model_.assign(assigns_.size(), false);
        for (std::size_t v = 0; v < assigns_.size(); ++v) model_[v] = assigns_[v] == kTrue;
        cancelUntil(0);
        return true;
      }
      next = mkLit(var, phase_[static_cast<std::size_t>(var)]);
    }
    trailLim_.push_back(static_cast<int>(trail_.size()));
    enqueue(next, -1);
  }
}

// ---------------------------------------------------------------------------

Lit CnfEncoder::symbolLit(int symbol) {
  auto it = symbolVars_.find(symbol);
  if (it == symbolVars_.end()) it = symbolVars_.emplace(symbol, solver_.newVar()).first;
  return mkLit(it->second);
}

Lit CnfEncoder::define(const Formula& f) {
  switch (f.kind()) {
    case Connective::Var:
      return symbolLit(f.symbol());
    case Connective::Not:
      return negate(define(f.operand()));
    default:
      break;
  }
  const Lit a = define(f.lhs());
  const Lit b = define(f.rhs());
  const Lit x = mkLit(solver_.newVar());
  const Lit nx = negate(x);
  switch (f.kind()) {
    case Connective::And:
      solver_.addClause({nx, a});
      solver_.addClause({nx, b});
      solver_.addClause({x, negate(a), negate(b)});
      break;
    case Connective::Or:
      solver_.addClause({nx, a, b});
      solver_.addClause({x, negate(a)});
      solver_.addClause({x, negate(b)});
      break;
    case Connective::Implies:
      solver_.addClause({nx, negate(a), b});
      solver_.addClause({x, a});
      solver_.addClause({x, negate(b)});
      break;
    case Connective::Iff:
      solver_.addClause({nx, negate(a), b});
      solver_.addClause({nx, a, negate(b)});
      solver_.addClause({x, a, b});
      solver_.addClause({x, negate(a), negate(b)});
      break;
    default:
      break;
  }
  return x;
}

void CnfEncoder::collectDisjuncts(const Formula& f, bool positive, std::vector<Lit>& out) {
  switch (f.kind()) {
    case Connective::Not:
      collectDisjuncts(f.operand(), !positive, out);
      return;
    case Connective::Or:
      if (positive) {
        collectDisjuncts(f.lhs(), true, out);
        collectDisjuncts(f.rhs(), true, out);
        return;
      }
      break;
    case Connective::And:
      if (!positive) {
        collectDisjuncts(f.lhs(), false, out);
        collectDisjuncts(f.rhs(), false, out);
        return;
      }
      break;
    case Connective::Implies:
      if (positive) {
        collectDisjuncts(f.lhs(), false, out);
        collectDisjuncts(f.rhs(), true, out);
        return;
      }
      break;
    default:
      break;
  }
  const Lit l = define(f);
  out.push_back(positive ? l : negate(l));
}

void CnfEncoder::assertPolarity(const Formula& f, bool positive) {
  switch (f.kind()) {
    case Connective::Not:
      assertPolarity(f.operand(), !positive);
      return;
    case Connective::And:
      if (positive) {
        assertPolarity(f.lhs(), true);
        assertPolarity(f.rhs(), true);
        return;
      }
      break;
    case Connective::Or:
      if (!positive) {
        assertPolarity(f.lhs(), false);
        assertPolarity(f.rhs(), false);
        return;
      }
      break;
    case Connective::Implies:
      if (!positive) {
        assertPolarity(f.lhs(), true);
        assertPolarity(f.rhs(), false);
        return;
      }
      break;
    case Connective::Iff: {
      const Lit a = define(f.lhs());
      const Lit b = define(f.rhs());
      if (positive) {
        solver_.addClause({negate(a), b});
        solver_.addClause({a, negate(b)});
      } else {
        solver_.addClause({a, b});
        solver_.addClause({negate(a), negate(b)});
      }
      return;
    }
    default:
      break;
  }
  std::vector<Lit> clause;
  collectDisjuncts(f, positive, clause);
  solver_.addClause(std::move(clause));
}

}  // namespace sat

bool isSatisfiable(std::span<const Formula> formulas) {
  sat::Solver solver;
  sat::CnfEncoder encoder(solver);
  for (const auto& f : formulas) encoder.assertFormula(f);
  return solver.solve();
}

bool entails(std::span<const Formula> formulas, const Formula& f) {
  sat::Solver solver;
  sat::CnfEncoder encoder(solver);
  for (const auto& g : formulas) encoder.assertFormula(g);
  encoder.assertFormula(Formula::negation(f));
  return !solver.solve();
}

}  // namespace oracle_loop
