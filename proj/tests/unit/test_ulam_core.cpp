#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "oracles.hpp"
#include "ursqs/ulam_core.hpp"

using namespace ursqs;

namespace {

GameStatus status(std::size_t M, std::vector<LabelSet> classes) { return GameStatus(M, std::move(classes)); }

}  // namespace

TEST(InitialStatus, FullSetThenEmptyClasses) {
  EXPECT_EQ(initial_status(4, 1), status(4, {{1, 2, 3, 4}, {}}));
  EXPECT_EQ(initial_status(2, 0), status(2, {{1, 2}}));
  EXPECT_EQ(initial_status(9, 2), status(9, {{1, 2, 3, 4, 5, 6, 7, 8, 9}, {}, {}}));
}

TEST(InitialStatus, RejectsSingleState) { EXPECT_THROW(initial_status(1, 0), std::invalid_argument); }

TEST(GameStatus, RejectsOverlapAndOutOfRange) {
  EXPECT_THROW(status(4, {{1, 2}, {2}}), std::invalid_argument);
  EXPECT_THROW(status(4, {{1, 5}}), std::invalid_argument);
  EXPECT_THROW(status(4, {{0, 1}}), std::invalid_argument);
  EXPECT_THROW(status(4, {{2, 1}}), std::invalid_argument);
}

TEST(QuestionTuple, SortsPartsAndRejectsOverlap) {
  QuestionTuple t({{3, 1}, {2}});
  EXPECT_EQ(t.part(0), (LabelSet{1, 3}));
  EXPECT_EQ(*t.part_of(3), 0u);
  EXPECT_FALSE(t.part_of(4).has_value());
  EXPECT_THROW(QuestionTuple({{1, 2}, {2}}), std::invalid_argument);
  EXPECT_THROW(QuestionTuple({{1, 2}}), std::invalid_argument);
}

TEST(UpdateStatus, WalkthroughTranscript) {
  GameStatus s = initial_status(4, 1);
  s = update_status(s, QuestionTuple({{1, 2}, {3, 4}}), 1);
  EXPECT_EQ(s, status(4, {{3, 4}, {1, 2}}));
  s = update_status(s, QuestionTuple({{1, 3}, {2, 4}}), 0);
  EXPECT_EQ(s, status(4, {{3}, {1, 4}}));
  s = update_status(s, QuestionTuple({{1}, {3, 4}}), 0);
  // 3 drops to A_1; 4 would need a second lie and is eliminated.
  EXPECT_EQ(s, status(4, {{}, {1, 3}}));
  s = update_status(s, QuestionTuple({{1}, {3}}), 0);
  EXPECT_EQ(s, status(4, {{}, {1}}));
  const Verdict v = is_final(s);
  EXPECT_TRUE(v.final);
  EXPECT_EQ(v.winner, Label{1});
}

TEST(UpdateStatus, RejectsBadAnswerAndNonCovering) {
  const GameStatus s = initial_status(4, 1);
  EXPECT_THROW(update_status(s, QuestionTuple({{1, 2}, {3, 4}}), 2), std::invalid_argument);
  EXPECT_THROW(update_status(s, QuestionTuple({{1, 2}, {3}}), 0), std::invalid_argument);
}

TEST(UpdateStatus, MatchesSetOracleOnRandomInstances) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t M = 2 + rng() % 11, q = 2 + rng() % 3, e = rng() % 4;
    std::vector<LabelSet> classes(e + 1);
    std::vector<std::set<Label>> sets(e + 1);
    for (Label h = 1; h <= M; ++h) {
      const std::size_t c = rng() % (e + 2);
      if (c <= e) {
        classes[c].push_back(h);
        sets[c].insert(h);
      }
    }
    const GameStatus s(M, classes);
    const LabelSet support = s.support();
    std::vector<LabelSet> parts(q);
    for (Label h : support) parts[rng() % q].push_back(h);
    const QuestionTuple t(parts);
    for (std::size_t j = 0; j < q; ++j) {
      const GameStatus next = update_status(s, t, j);
      const auto expect = oracle::update(sets, std::set<Label>(parts[j].begin(), parts[j].end()));
      for (std::size_t i = 0; i <= e; ++i)
        ASSERT_EQ(next.lie_class(i), LabelSet(expect[i].begin(), expect[i].end()));
      ASSERT_LE(next.total(), s.total());
    }
  }
}

TEST(UpdateStatus, IndependentOfPartLabelOrder) {
  const GameStatus s = status(6, {{1, 2, 3}, {4, 5, 6}});
  const QuestionTuple a({{3, 1, 5}, {2, 6, 4}});
  const QuestionTuple b({{1, 5, 3}, {6, 4, 2}});
  for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(update_status(s, a, j), update_status(s, b, j));
}

TEST(ElementWeight, PublishedValues) {
  EXPECT_EQ(element_weight(0, 10, 4, 7), BigInt(497452));
  EXPECT_EQ(element_weight(7, 10, 4, 7), BigInt(1));
  EXPECT_EQ(element_weight(0, 5, 2, 1), BigInt(6));
}

TEST(ElementWeight, MatchesBinomialOracleAndIsMonotone) {
  for (std::size_t q = 2; q <= 6; ++q)
    for (std::size_t e = 0; e <= 5; ++e)
      for (std::size_t w = 0; w <= 30; ++w)
        for (std::size_t i = 0; i <= e; ++i) {
          const BigInt v = element_weight(i, w, q, e);
          ASSERT_EQ(v, oracle::element_weight(i, w, q, e)) << q << ' ' << e << ' ' << w << ' ' << i;
          if (i > 0) ASSERT_LE(v, element_weight(i - 1, w, q, e));
          if (w > 0) ASSERT_GE(v, element_weight(i, w - 1, q, e));
        }
}

TEST(ElementWeight, ExceedsSixtyFourBits) {
  const BigInt v = element_weight(0, 200, 16, 30);
  EXPECT_EQ(v, oracle::element_weight(0, 200, 16, 30));
  EXPECT_GT(v, BigInt(std::numeric_limits<std::uint64_t>::max()));
}

TEST(StatusWeight, Examples) {
  EXPECT_EQ(status_weight(StatusType{{4, 0}}, 5, 2), BigInt(24));
  EXPECT_EQ(status_weight(StatusType{{0, 0, 0}}, 7, 3), BigInt(0));
}

TEST(StatusWeight, ConservedAcrossEveryAnswer) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 1500; ++trial) {
    const std::size_t M = 2 + rng() % 11, q = 2 + rng() % 3, e = rng() % 4, w = 1 + rng() % 12;
    std::vector<LabelSet> classes(e + 1);
    for (Label h = 1; h <= M; ++h) {
      const std::size_t c = rng() % (e + 2);
      if (c <= e) classes[c].push_back(h);
    }
    const GameStatus s(M, classes);
    std::vector<LabelSet> parts(q);
    for (Label h : s.support()) parts[rng() % q].push_back(h);
    const QuestionTuple t(parts);
    BigInt children = 0;
    for (std::size_t j = 0; j < q; ++j) children += status_weight(update_status(s, t, j).type(), w - 1, q);
    ASSERT_EQ(status_weight(s.type(), w, q), children);
  }
}

TEST(IsFinal, Cases) {
  EXPECT_FALSE(is_final(status(4, {{1, 2}, {}})).final);
  const Verdict empty = is_final(status(4, {{}, {}}));
  EXPECT_TRUE(empty.final);
  EXPECT_FALSE(empty.winner.has_value());
  EXPECT_EQ(is_final(status(4, {{}, {3}})).winner, Label{3});
}

TEST(FastWeights, AgreeWithBigInt) {
  for (std::size_t q : {2u, 3u, 7u})
    for (std::size_t e : {0u, 2u, 5u})
      for (std::size_t w : {0u, 1u, 9u, 20u}) {
        const auto row = weights::element_row<__int128>(w, q, e);
        ASSERT_EQ(row.size(), e + 2);
        EXPECT_EQ(row.back(), 0);
        for (std::size_t i = 0; i <= e; ++i)
          EXPECT_EQ(BigInt(static_cast<long long>(row[i])), element_weight(i, w, q, e));
      }
}
