#include <gtest/gtest.h>

#include <random>

#include "oracle_loop/error.hpp"
#include "oracle_loop/kb.hpp"
#include "oracle_loop/sat.hpp"
#include "oracles.hpp"

using namespace oracle_loop;
using oracle_loop::testing::tableEntails;
using oracle_loop::testing::tableSatisfiable;

namespace {

std::vector<Formula> parseAll(std::initializer_list<const char*> texts) {
  std::vector<Formula> out;
  for (const char* t : texts) out.push_back(parseFormula(t));
  return out;
}

Formula randomFormula(std::mt19937_64& rng, int numVars, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 0 : 5);
  const int k = pick(rng);
  if (k == 0) return Formula::var("r" + std::to_string(std::uniform_int_distribution<int>(0, numVars - 1)(rng)));
  if (k == 1) return Formula::negation(randomFormula(rng, numVars, depth - 1));
  Formula a = randomFormula(rng, numVars, depth - 1);
  Formula b = randomFormula(rng, numVars, depth - 1);
  switch (k) {
    case 2: return Formula::conjunction(a, b);
    case 3: return Formula::disjunction(a, b);
    case 4: return Formula::implication(a, b);
    default: return Formula::equivalence(a, b);
  }
}

}  // namespace

TEST(Formula, PrecedenceAndAssociativity) {
  const Formula f = parseFormula("a | b & c -> d <-> e");
  ASSERT_EQ(f.kind(), Connective::Iff);
  ASSERT_EQ(f.lhs().kind(), Connective::Implies);
  EXPECT_EQ(f.lhs().lhs().kind(), Connective::Or);
  EXPECT_EQ(f.lhs().lhs().rhs().kind(), Connective::And);

  const Formula r = parseFormula("a -> b -> c");
  ASSERT_EQ(r.kind(), Connective::Implies);
  EXPECT_EQ(r.rhs().kind(), Connective::Implies);
  EXPECT_EQ(r.toString(), "a -> b -> c");
  EXPECT_EQ(parseFormula("(a -> b) -> c").toString(), "(a -> b) -> c");
  EXPECT_EQ(parseFormula("~(a & b)").toString(), "~(a & b)");
  EXPECT_EQ(parseFormula("~~a").toString(), "~~a");
}

TEST(Formula, ParseErrorsCarryColumn) {
  try {
    parseFormula("a & (b | ");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 0);
    EXPECT_GE(e.column(), 9);
  }
  EXPECT_THROW(parseFormula(""), ParseError);
  EXPECT_THROW(parseFormula("a b"), ParseError);
  EXPECT_THROW(parseFormula("a $ b"), ParseError);
}

TEST(Formula, PrintThenParseIsIdentity) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    const Formula f = randomFormula(rng, 6, 5);
    EXPECT_EQ(parseFormula(f.toString()), f) << f.toString();
  }
}

TEST(Solver, SmallExamples) {
  EXPECT_TRUE(isSatisfiable(std::vector<Formula>{}));
  EXPECT_FALSE(isSatisfiable(parseAll({"a", "~a"})));
  EXPECT_FALSE(isSatisfiable(parseAll({"x", "x -> y", "y -> z", "~z"})));
  EXPECT_TRUE(entails(parseAll({"a"}), parseFormula("a")));
  EXPECT_TRUE(entails(parseAll({"x", "x -> y"}), parseFormula("y")));
  EXPECT_FALSE(entails(std::vector<Formula>{}, parseFormula("a")));
  EXPECT_TRUE(entails(std::vector<Formula>{}, parseFormula("a | ~a")));
}

TEST(Solver, AgreesWithTruthTablesOnRandomSets) {
  std::mt19937_64 rng(2024);
  for (int round = 0; round < 400; ++round) {
    const int numVars = 2 + static_cast<int>(rng() % 15);
    const std::size_t count = 1 + rng() % 8;
    std::vector<Formula> fs;
    for (std::size_t i = 0; i < count; ++i) fs.push_back(randomFormula(rng, numVars, 3));
    const Formula goal = randomFormula(rng, numVars, 2);
    ASSERT_EQ(isSatisfiable(fs), tableSatisfiable(fs)) << "round " << round;
    ASSERT_EQ(entails(fs, goal), tableEntails(fs, goal)) << "round " << round;
    std::vector<Formula> withNegation = fs;
    withNegation.push_back(Formula::negation(goal));
    ASSERT_EQ(entails(fs, goal), !isSatisfiable(withNegation));
  }
}

TEST(Solver, HardUnsatPigeonhole) {
  // 6 pigeons, 5 holes.
  std::vector<Formula> fs;
  auto p = [](int i, int j) { return Formula::var("p" + std::to_string(i) + "_" + std::to_string(j)); };
  for (int i = 0; i < 6; ++i) {
    Formula some = p(i, 0);
    for (int j = 1; j < 5; ++j) some = Formula::disjunction(some, p(i, j));
    fs.push_back(some);
  }
  for (int j = 0; j < 5; ++j) {
    for (int a = 0; a < 6; ++a) {
      for (int b = a + 1; b < 6; ++b) fs.push_back(Formula::negation(Formula::conjunction(p(a, j), p(b, j))));
    }
  }
  EXPECT_FALSE(isSatisfiable(fs));
  fs.erase(fs.begin());
  EXPECT_TRUE(isSatisfiable(fs));
}

TEST(Solver, CountsCalls) {
  const auto before = solverCallCount();
  isSatisfiable(parseAll({"a"}));
  EXPECT_GT(solverCallCount(), before);
}

TEST(KbFormat, MinimalFile) {
  const KnowledgeBase kb = parseKB("[K]\na\n~a\n");
  ASSERT_EQ(kb.size(), 2u);
  EXPECT_EQ(kb.axioms[0].id, 0);
  EXPECT_EQ(kb.axioms[1].formula, parseFormula("~a"));
  EXPECT_TRUE(kb.background.empty());
  EXPECT_TRUE(kb.positives.empty());
  EXPECT_TRUE(kb.negatives.empty());
}

TEST(KbFormat, SectionRouting) {
  const KnowledgeBase kb = parseKB("[K]\nx\nx -> y\ny -> z\n[B]\n~z\n");
  EXPECT_EQ(kb.size(), 3u);
  ASSERT_EQ(kb.background.size(), 1u);
  EXPECT_EQ(kb.background[0], parseFormula("~z"));
  EXPECT_EQ(kb.axioms[1].sourceText, "x -> y");
}

TEST(KbFormat, CommentsAndAllSections) {
  const KnowledgeBase kb = parseKB("# demo\n[K]\na  # first\n\nb\n[P]\nc\n[N]\nd & e\n");
  EXPECT_EQ(kb.size(), 2u);
  EXPECT_EQ(kb.positives.size(), 1u);
  EXPECT_EQ(kb.negatives.size(), 1u);
}

TEST(KbFormat, ErrorLines) {
  try {
    parseKB("[K]\na &");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
  try {
    parseKB("[K]\na\n[X]\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_THROW(parseKB("a\n[K]\nb\n"), ParseError);
  EXPECT_THROW(parseKB("[K]\na\n[K]\nb\n"), ParseError);
  EXPECT_THROW(parseKB("[B]\na\n"), ParseError);
}

TEST(KbFormat, SerializeRoundTrip) {
  const KnowledgeBase kb = parseKB("[K]\n(a)\na -> (b -> c)\n[B]\n~c\n[P]\nb\n[N]\na & b\n");
  const KnowledgeBase again = parseKB(serializeKB(kb));
  ASSERT_EQ(again.size(), kb.size());
  for (std::size_t i = 0; i < kb.size(); ++i) EXPECT_EQ(again.axioms[i].formula, kb.axioms[i].formula);
  EXPECT_EQ(again.background, kb.background);
  EXPECT_EQ(again.positives, kb.positives);
  EXPECT_EQ(again.negatives, kb.negatives);
}

TEST(Violates, Examples) {
  const KnowledgeBase contradiction = parseKB("[K]\na\n~a\n");
  EXPECT_FALSE(violatesIds(std::vector<AxiomId>{0}, contradiction));
  EXPECT_TRUE(violatesIds(std::vector<AxiomId>{0, 1}, contradiction));

  const KnowledgeBase negative = parseKB("[K]\nx\nx -> y\n[N]\ny\n");
  EXPECT_TRUE(violatesIds(std::vector<AxiomId>{0, 1}, negative));
  EXPECT_FALSE(violatesIds(std::vector<AxiomId>{1}, negative));
}

TEST(Violates, MonotoneAndMatchesTables) {
  std::mt19937_64 rng(99);
  for (int round = 0; round < 60; ++round) {
    KnowledgeBase kb;
    const int numVars = 4 + static_cast<int>(rng() % 5);
    for (int i = 0; i < 7; ++i) kb.axioms.push_back({i, randomFormula(rng, numVars, 2), {}});
    if (rng() % 2) kb.background.push_back(randomFormula(rng, numVars, 1));
    if (rng() % 2) kb.negatives.push_back(randomFormula(rng, numVars, 1));
    const oracle_loop::testing::KbOracle oracle(kb);
    for (std::uint64_t mask = 0; mask < 128; ++mask) {
      const auto ids = oracle_loop::testing::idsOfMask(mask);
      const bool v = violatesIds(ids, kb);
      ASSERT_EQ(v, oracle.violates(mask));
      if (v) {
        for (int extra = 0; extra < 7; ++extra) ASSERT_TRUE(oracle.violates(mask | (1ULL << extra)));
      }
    }
  }
}
