#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ursqs/belief.hpp"

using namespace ursqs;

namespace {

PerformanceMatrix symmetric(double diag) {
  PerformanceMatrix p(2);
  p.at(0, 0) = p.at(1, 1) = diag;
  p.at(0, 1) = p.at(1, 0) = 1.0 - diag;
  return p;
}

PerformanceMatrix identity(std::size_t q) {
  PerformanceMatrix p(q);
  for (std::size_t l = 0; l < q; ++l) p.at(l, l) = 1.0;
  return p;
}

double total(const Belief& b) { return std::accumulate(b.probs.begin(), b.probs.end(), 0.0); }

}  // namespace

TEST(UniformBelief, EqualMass) {
  EXPECT_EQ(uniform_belief(4).probs, (std::vector<double>{0.25, 0.25, 0.25, 0.25}));
  EXPECT_EQ(uniform_belief(2).probs, (std::vector<double>{0.5, 0.5}));
  for (std::size_t M : {3u, 7u, 101u}) EXPECT_NEAR(total(uniform_belief(M)), 1.0, 1e-12);
}

TEST(UpdateBelief, HandComputedExample) {
  const Belief b = update_belief(uniform_belief(4), QuestionTuple({{1, 2}, {3, 4}}), symmetric(0.9), 0);
  const std::vector<double> expect{0.45, 0.45, 0.05, 0.05};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(b.probs[i], expect[i], 1e-12);
  EXPECT_EQ(map_decision(b), Label{1});
}

TEST(UpdateBelief, NoiselessCollapsesOntoAnsweredPart) {
  Belief p{{0.1, 0.2, 0.3, 0.4}};
  const Belief b = update_belief(p, QuestionTuple({{1}, {2, 3}}), identity(2), 1);
  EXPECT_NEAR(b.probs[0], 0.0, 1e-15);
  EXPECT_NEAR(b.probs[1], 0.6 * 0.2 / 0.5, 1e-12);
  EXPECT_NEAR(b.probs[2], 0.6 * 0.3 / 0.5, 1e-12);
  EXPECT_NEAR(b.probs[3], 0.4, 1e-15);
}

TEST(UpdateBelief, OutsideMassUnchanged) {
  const Belief b = update_belief(uniform_belief(4), QuestionTuple({{1}, {2}}), symmetric(0.7), 1);
  EXPECT_DOUBLE_EQ(b(3), 0.25);
  EXPECT_DOUBLE_EQ(b(4), 0.25);
  EXPECT_NEAR(b(1) + b(2), 0.5, 1e-15);
}

TEST(UpdateBelief, ImpossibleObservationThrows) {
  Belief p{{1.0, 0.0, 0.0}};
  EXPECT_THROW(update_belief(p, QuestionTuple({{1}, {2}}), identity(2), 1), std::domain_error);
  EXPECT_THROW(update_belief(p, QuestionTuple({{2}, {3}}), symmetric(0.8), 0), std::domain_error);
}

TEST(Predictive, InsideConditionalLaw) {
  Belief p{{0.2, 0.3, 0.5}};
  const auto z = predictive(p, QuestionTuple({{1}, {2}}), symmetric(0.8));
  EXPECT_NEAR(z[0], (0.8 * 0.2 + 0.2 * 0.3) / 0.5, 1e-12);
  EXPECT_NEAR(z[0] + z[1], 1.0, 1e-12);
}

TEST(UpdateBelief, MartingaleUnderPredictive) {
  std::mt19937_64 rng(3);
  PerformanceMatrix chan(3);
  const double rows[3][3] = {{0.7, 0.2, 0.1}, {0.15, 0.7, 0.15}, {0.1, 0.3, 0.6}};
  for (std::size_t l = 0; l < 3; ++l)
    for (std::size_t o = 0; o < 3; ++o) chan.at(l, o) = rows[l][o];
  Belief p{{0.05, 0.1, 0.2, 0.15, 0.3, 0.2}};
  const QuestionTuple t({{1, 4}, {2}, {3, 5}});
  const auto z = predictive(p, t, chan);
  std::vector<double> mean(6, 0.0);
  for (std::size_t o = 0; o < 3; ++o) {
    const Belief b = update_belief(p, t, chan, o);
    for (std::size_t h = 0; h < 6; ++h) mean[h] += z[o] * b.probs[h];
  }
  for (std::size_t h = 0; h < 6; ++h) EXPECT_NEAR(mean[h], p.probs[h], 1e-12);

  // Same check by sampling o from Z.
  std::discrete_distribution<std::size_t> draw(z.begin(), z.end());
  std::vector<double> mc(6, 0.0);
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const Belief b = update_belief(p, t, chan, draw(rng));
    for (std::size_t h = 0; h < 6; ++h) mc[h] += b.probs[h] / n;
  }
  for (std::size_t h = 0; h < 6; ++h) EXPECT_NEAR(mc[h], p.probs[h], 5e-3);
}

TEST(UpdateBelief, LongRandomChainsStayNormalized) {
  std::mt19937_64 rng(21);
  const std::size_t M = 16;
  Belief b = uniform_belief(M);
  for (int step = 0; step < 20000; ++step) {
    const std::size_t q = 2 + rng() % 3;
    std::vector<LabelSet> parts(q);
    for (Label h = 1; h <= M; ++h)
      if (const std::size_t j = rng() % (q + 1); j < q) parts[j].push_back(h);
    PerformanceMatrix chan(q);
    for (std::size_t l = 0; l < q; ++l) {
      double s = 0;
      for (std::size_t o = 0; o < q; ++o) s += chan.at(l, o) = 0.05 + std::uniform_real_distribution<>(0, 1)(rng);
      for (std::size_t o = 0; o < q; ++o) chan.at(l, o) /= s;
    }
    try {
      update_belief_in_place(b, QuestionTuple(parts), chan, rng() % q);
    } catch (const std::domain_error&) {
      continue;
    }
    ASSERT_NEAR(total(b), 1.0, 1e-9);
    for (double v : b.probs) ASSERT_GE(v, 0.0);
  }
}

TEST(UpdateBelief, BisectionReachesPointMass) {
  const std::size_t M = 16;
  const Label truth = 11;
  Belief b = uniform_belief(M);
  LabelSet alive(M);
  std::iota(alive.begin(), alive.end(), 1);
  int steps = 0;
  while (alive.size() > 1) {
    const std::size_t half = alive.size() / 2;
    LabelSet lo(alive.begin(), alive.begin() + half), hi(alive.begin() + half, alive.end());
    LabelSet rest;
    for (Label h = 1; h <= M; ++h)
      if (!std::binary_search(alive.begin(), alive.end(), h)) rest.push_back(h);
    // Cover all of S so no mass sits outside the question.
    LabelSet lo_all = lo;
    lo_all.insert(lo_all.end(), rest.begin(), rest.end());
    std::sort(lo_all.begin(), lo_all.end());
    const bool in_hi = std::binary_search(hi.begin(), hi.end(), truth);
    update_belief_in_place(b, QuestionTuple({lo_all, hi}), identity(2), in_hi ? 1 : 0);
    alive = in_hi ? hi : lo;
    ++steps;
  }
  EXPECT_EQ(steps, 4);
  EXPECT_NEAR(b(truth), 1.0, 1e-12);
}

TEST(MapDecision, ArgmaxLowestLabelOnTies) {
  EXPECT_EQ(map_decision(Belief{{0.1, 0.7, 0.2}}), Label{2});
  EXPECT_EQ(map_decision(uniform_belief(5)), Label{1});
  EXPECT_EQ(map_decision(Belief{{0.2, 0.4, 0.4}}), Label{2});
}
