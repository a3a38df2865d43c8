#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ursqs/coding.hpp"
#include "ursqs/worker_sim.hpp"

using namespace ursqs;

TEST(MeanReliability, PowerLaw) {
  WorkerModel m;
  EXPECT_NEAR(mean_reliability(m, 2), 0.75 * std::pow(2.0, -0.2), 1e-15);
  EXPECT_NEAR(mean_reliability(m, 2), 0.652913, 1e-6);
  for (std::size_t q = 2; q < 10; ++q) EXPECT_GT(mean_reliability(m, q), mean_reliability(m, q + 1));
  EXPECT_THROW(mean_reliability(m, 1), std::invalid_argument);
  m.reliability_scale = 0.3;  // 0.3 * 3^-0.2 < 1/3
  EXPECT_THROW(mean_reliability(m, 3), std::invalid_argument);
  m.reliability_scale = 1.5;
  EXPECT_THROW(mean_reliability(m, 2), std::invalid_argument);
}

TEST(SampleOpinion, Extremes) {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    EXPECT_EQ(sample_opinion(2, 4, 1.0, rng), 2u);
    EXPECT_EQ(sample_opinion(0, 2, 0.0, rng), 1u);
  }
}

TEST(SampleOpinion, FrequenciesFollowTheResponseLaw) {
  Rng rng(2);
  std::array<int, 3> counts{};
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[sample_opinion(0, 3, 0.6, rng)];
  const std::array<double, 3> expect{0.6, 0.2, 0.2};
  double chi2 = 0;
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(counts[k] / double(n), expect[k], 0.01);
    chi2 += std::pow(counts[k] - n * expect[k], 2) / (n * expect[k]);
  }
  EXPECT_LT(chi2, 13.8);  // 2 dof, p = 0.001
}

TEST(GroupAnswer, PerfectWorkersNeverErr) {
  WorkerModel m;
  m.reliability_scale = 1.0;
  m.exponent = 0.0;
  m.group_size = 4;
  const CodeMatrix g = CodeMatrix::from_rows({{0, 0, 1, 1}, {0, 1, 0, 1}, {1, 0, 0, 1}});
  const QuestionTuple t({{1, 4}, {2}, {3, 5}});
  Rng rng(3);
  for (Label h = 1; h <= 5; ++h) {
    const GroupAnswer a = group_answer(t, h, m, g, rng);
    EXPECT_EQ(a.decoded, *t.part_of(h));
    EXPECT_EQ(a.true_part, a.decoded);
  }
}

TEST(GroupAnswer, RejectsBadInputs) {
  WorkerModel m;
  m.group_size = 3;
  const CodeMatrix g = CodeMatrix::from_rows({{0, 0, 0}, {1, 1, 1}});
  Rng rng(4);
  EXPECT_THROW(group_answer(QuestionTuple({{1}, {2}}), 3, m, g, rng), std::invalid_argument);
  EXPECT_THROW(group_answer(QuestionTuple({{1}, {2}, {3}}), 1, m, g, rng), std::invalid_argument);
  m.group_size = 4;
  EXPECT_THROW(group_answer(QuestionTuple({{1}, {2}}), 1, m, g, rng), std::invalid_argument);
}

TEST(GroupAnswer, EmpiricalChannelMatchesPerformanceMatrix) {
  // 10^5 groups per true part; 38 entries, so 4 standard errors per entry.
  WorkerModel m;
  m.group_size = 10;
  ChannelCache cache(77);
  for (std::size_t q : {2u, 3u, 5u}) {
    const double mu = mean_reliability(m, q);
    const auto channel = cache.get(q, 10, mu);
    const PerformanceMatrix& p = *channel->performance;
    std::vector<LabelSet> parts(q);
    for (std::size_t j = 0; j < q; ++j) parts[j] = {static_cast<Label>(j + 1)};
    const QuestionTuple t(parts);
    Rng rng(100 + q);
    const int n = 100000;
    for (std::size_t l = 0; l < q; ++l) {
      std::vector<int> counts(q, 0);
      for (int i = 0; i < n; ++i) ++counts[group_answer(t, static_cast<Label>(l + 1), m, channel->matrix, rng).decoded];
      for (std::size_t o = 0; o < q; ++o) {
        const double pr = p.at(l, o);
        const double se = std::sqrt(std::max(pr * (1 - pr), 1e-12) / n);
        EXPECT_NEAR(counts[o] / double(n), pr, 4 * se + 1e-9) << "q=" << q << " l=" << l << " o=" << o;
      }
    }
  }
}

TEST(GroupAnswer, BitsIndependentGivenReliabilities) {
  // Deterministic-mean mode: worker bits for a fixed part are independent,
  // so the sample covariance of two columns is ~0.
  WorkerModel m;
  m.group_size = 6;
  const CodeMatrix g = CodeMatrix::from_rows({{0, 0, 0, 1, 1, 0}, {1, 1, 0, 0, 1, 1}, {0, 1, 1, 1, 0, 1}});
  const QuestionTuple t({{1}, {2}, {3}});
  Rng rng(6);
  const int n = 50000;
  double s0 = 0, s1 = 0, s01 = 0;
  for (int i = 0; i < n; ++i) {
    const GroupAnswer a = group_answer(t, 1, m, g, rng);
    s0 += a.bits[0];
    s1 += a.bits[1];
    s01 += a.bits[0] * a.bits[1];
  }
  const double cov = s01 / n - (s0 / n) * (s1 / n);
  EXPECT_NEAR(cov, 0.0, 4.0 * 0.25 / std::sqrt(double(n)));
}

TEST(GroupAnswer, FreshGroupsAreUncorrelated) {
  // Beta reliabilities: consecutive group accuracies show no autocorrelation.
  WorkerModel m;
  m.group_size = 10;
  m.distribution = ReliabilityDistribution::kBeta;
  ChannelCache cache(5);
  const auto channel = cache.get(2, 10, mean_reliability(m, 2));
  const QuestionTuple t({{1}, {2}});
  Rng rng(8);
  const int n = 40000;
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = group_answer(t, 1, m, channel->matrix, rng).decoded == 0;
  const auto mom = oracle::moments(x);
  double num = 0, den = 0;
  for (int i = 0; i < n; ++i) {
    den += (x[i] - mom.mean) * (x[i] - mom.mean);
    if (i + 1 < n) num += (x[i] - mom.mean) * (x[i + 1] - mom.mean);
  }
  EXPECT_NEAR(num / den, 0.0, 4.0 / std::sqrt(double(n)));
}

TEST(DrawReliability, BetaHasTheRightMean) {
  WorkerModel m;
  m.distribution = ReliabilityDistribution::kBeta;
  Rng rng(9);
  double s = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double v = draw_reliability(m, 3, rng);
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
    s += v;
  }
  EXPECT_NEAR(s / n, mean_reliability(m, 3), 0.003);
}

TEST(GroupAnswerUnanchored, MatchesChanceChannel) {
  WorkerModel m;
  ChannelCache cache(6);
  const auto channel = cache.get(3, 10, mean_reliability(m, 3));
  const auto law = unanchored_answer_distribution(channel->matrix);
  Rng rng(10);
  const int n = 60000;
  std::vector<int> counts(3, 0);
  for (int i = 0; i < n; ++i) {
    const GroupAnswer a = group_answer_unanchored(m, channel->matrix, rng);
    EXPECT_EQ(a.true_part, 3u);
    ++counts[a.decoded];
  }
  for (std::size_t o = 0; o < 3; ++o) {
    const double se = std::sqrt(law[o] * (1 - law[o]) / n);
    EXPECT_NEAR(counts[o] / double(n), law[o], 4 * se);
  }
}
