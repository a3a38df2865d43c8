#include <gtest/gtest.h>

#include <nlohmann/json.hpp>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "ursqs/coding.hpp"

using namespace ursqs;

namespace {

CodeMatrix random_distinct(std::size_t q, std::size_t n, std::mt19937_64& rng) {
  for (;;) {
    CodeMatrix g(q, n);
    for (std::size_t l = 0; l < q; ++l)
      for (std::size_t j = 0; j < n; ++j) g.set(l, j, rng() & 1);
    if (g.distinct_rows()) return g;
  }
}

double average_error(const std::vector<std::vector<double>>& p) {
  double s = 0;
  for (std::size_t l = 0; l < p.size(); ++l)
    for (std::size_t o = 0; o < p.size(); ++o)
      if (o != l) s += p[l][o];
  return s / static_cast<double>(p.size());
}

}  // namespace

TEST(CodeMatrix, RoundTripAndBits) {
  const std::vector<std::vector<int>> rows{{0, 1, 1}, {1, 0, 0}};
  const CodeMatrix g = CodeMatrix::from_rows(rows);
  EXPECT_EQ(g.rows(), 2u);
  EXPECT_EQ(g.cols(), 3u);
  EXPECT_TRUE(g.get(0, 2));
  EXPECT_FALSE(g.get(1, 2));
  EXPECT_EQ(g.to_rows(), rows);
  EXPECT_TRUE(g.distinct_rows());
  EXPECT_FALSE(CodeMatrix::from_rows({{1, 0}, {1, 0}}).distinct_rows());
  CodeMatrix wide(3, 130);
  wide.set(2, 129, true);
  wide.flip(2, 129);
  EXPECT_FALSE(wide.get(2, 129));
}

TEST(ColumnQuestion, PartitionsRows) {
  const CodeMatrix g = CodeMatrix::from_rows({{0, 0, 0}, {1, 1, 1}});
  const BinaryQuestion b = column_question(g, 0);
  EXPECT_EQ(b.zero, (std::vector<std::size_t>{0}));
  EXPECT_EQ(b.one, (std::vector<std::size_t>{1}));
  const BinaryQuestion flat = column_question(CodeMatrix::from_rows({{0, 1}, {0, 0}, {0, 1}}), 0);
  EXPECT_TRUE(flat.one.empty());
  EXPECT_EQ(flat.zero.size(), 3u);
  EXPECT_THROW(column_question(g, 3), std::out_of_range);
}

TEST(ResponseVectorProb, Examples) {
  const CodeMatrix g = CodeMatrix::from_rows({{0, 0, 0}, {1, 1, 1}});
  const Bits u{1, 1, 0};
  EXPECT_NEAR(response_vector_prob(g, 1, 0.8, u), 0.8 * 0.8 * 0.2, 1e-15);
  EXPECT_DOUBLE_EQ(response_vector_prob(g, 1, 1.0, Bits{1, 1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(response_vector_prob(g, 1, 1.0, u), 0.0);
  EXPECT_NEAR(bit_one_probability(g, 0, 0, 0.8), 0.2, 1e-15);
}

TEST(HammingDecode, NearestRowAndFairTies) {
  const CodeMatrix g = CodeMatrix::from_rows({{0, 0, 0}, {1, 1, 1}});
  Rng rng(7);
  EXPECT_EQ(hamming_decode(g, Bits{1, 1, 0}, rng), 1u);
  EXPECT_EQ(hamming_decode(g, Bits{0, 0, 0}, rng), 0u);
  const CodeMatrix h = CodeMatrix::from_rows({{0, 0}, {1, 1}});
  int first = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) first += hamming_decode(h, Bits{0, 1}, rng) == 0;
  EXPECT_NEAR(first / double(n), 0.5, 0.02);
}

TEST(PerformanceMatrix, Examples) {
  const CodeMatrix g = CodeMatrix::from_rows({{0, 0, 0}, {1, 1, 1}});
  const PerformanceMatrix p = performance_matrix(g, 0.8);
  const double diag = 0.8 * 0.8 * 0.8 + 3 * 0.8 * 0.8 * 0.2;
  EXPECT_NEAR(p.at(0, 0), diag, 1e-12);
  EXPECT_NEAR(p.at(1, 1), diag, 1e-12);
  EXPECT_NEAR(p.min_diagonal(), 0.896, 1e-12);
  const PerformanceMatrix id = performance_matrix(CodeMatrix::from_rows({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}}), 1.0);
  for (std::size_t l = 0; l < 3; ++l)
    for (std::size_t o = 0; o < 3; ++o) EXPECT_DOUBLE_EQ(id.at(l, o), l == o ? 1.0 : 0.0);
  EXPECT_THROW(performance_matrix(CodeMatrix(2, 21), 0.7), std::invalid_argument);
}

TEST(PerformanceMatrix, MatchesEnumerationOracle) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t q = 2 + rng() % 5, n = 3 + rng() % 8;
    if (q > (std::size_t{1} << n)) continue;
    const CodeMatrix g = random_distinct(q, n, rng);
    const double mu = 1.0 / q + (1.0 - 1.0 / q) * std::uniform_real_distribution<>(0, 1)(rng);
    const PerformanceMatrix p = performance_matrix(g, mu);
    const auto ref = oracle::performance_matrix(g.to_rows(), mu);
    for (std::size_t l = 0; l < q; ++l) {
      double sum = 0;
      for (std::size_t o = 0; o < q; ++o) {
        ASSERT_NEAR(p.at(l, o), ref[l][o], 1e-12);
        sum += p.at(l, o);
      }
      ASSERT_NEAR(sum, 1.0, 1e-12);
    }
    ASSERT_NEAR(p.average_error(), average_error(ref), 1e-12);
  }
}

TEST(PerformanceMatrix, RowPermutationPermutesChannel) {
  std::mt19937_64 rng(4);
  const CodeMatrix g = random_distinct(4, 8, rng);
  auto rows = g.to_rows();
  const std::vector<std::size_t> perm{2, 0, 3, 1};
  std::vector<std::vector<int>> permuted(4);
  for (std::size_t l = 0; l < 4; ++l) permuted[l] = rows[perm[l]];
  const PerformanceMatrix a = performance_matrix(g, 0.65);
  const PerformanceMatrix b = performance_matrix(CodeMatrix::from_rows(permuted), 0.65);
  for (std::size_t l = 0; l < 4; ++l)
    for (std::size_t o = 0; o < 4; ++o) EXPECT_NEAR(b.at(l, o), a.at(perm[l], perm[o]), 1e-12);
}

TEST(SearchCodeMatrix, ExhaustiveSmallCase) {
  Rng rng(1);
  const CodeSearchResult r = search_code_matrix(2, 3, 0.8, rng);
  EXPECT_TRUE(r.exact);
  EXPECT_NEAR(r.cost, 0.104, 1e-12);
  // Complementary rows.
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NE(r.matrix.get(0, j), r.matrix.get(1, j));
}

TEST(SearchCodeMatrix, PerfectWorkersCostNothing) {
  Rng rng(2);
  for (std::size_t q : {2u, 3u, 5u, 8u}) {
    const CodeSearchResult r = search_code_matrix(q, 3, 1.0, rng);
    EXPECT_NEAR(r.cost, 0.0, 1e-15);
    EXPECT_TRUE(r.matrix.distinct_rows());
  }
}

TEST(SearchCodeMatrix, BeatsOneVersusRestRepetition) {
  const std::size_t q = 3, n = 10;
  const double mu = 0.7;
  CodeMatrix baseline(q, n);
  for (std::size_t j = 0; j < n; ++j) baseline.set(j % q, j, true);
  const double base_cost = performance_matrix(baseline, mu).average_error();
  Rng rng(3);
  const CodeSearchResult r = search_code_matrix(q, n, mu, rng);
  EXPECT_LE(r.cost, base_cost + 1e-12);
  EXPECT_NEAR(r.cost, performance_matrix(r.matrix, mu).average_error(), 1e-12);
}

TEST(SearchCodeMatrix, RowsStayDistinct) {
  Rng rng(5);
  for (auto [q, n] : {std::pair{4u, 2u}, {5u, 3u}, {7u, 10u}, {16u, 10u}, {32u, 24u}}) {
    const CodeSearchResult r = search_code_matrix(q, n, 0.75 * std::pow(q, -0.2), rng);
    EXPECT_TRUE(r.matrix.distinct_rows()) << q << 'x' << n;
    EXPECT_EQ(r.exact, n <= kMaxExactWorkers);
  }
  EXPECT_THROW(search_code_matrix(5, 2, 0.8, rng), std::invalid_argument);
}

TEST(UnionBound, ClosedFormForRepetitionCode) {
  for (std::size_t n : {1u, 4u, 9u})
    for (double mu : {0.6, 0.8, 1.0}) {
      CodeMatrix g(2, n);
      for (std::size_t j = 0; j < n; ++j) g.set(1, j, true);
      const double bc = 2.0 * std::sqrt(mu * (1.0 - mu));
      EXPECT_NEAR(union_bound_cost(g, mu), 2.0 * std::pow(bc, double(n)), 1e-12);
    }
}

TEST(ChannelCache, SameKeySameChannel) {
  ChannelCache cache(9);
  const auto a = cache.get(3, 10, 0.6);
  const auto b = cache.get(3, 10, 0.6000001);
  EXPECT_EQ(a.get(), b.get());
  ChannelCache other(9);
  EXPECT_EQ(other.get(3, 10, 0.6)->matrix, a->matrix);
  ASSERT_TRUE(a->performance.has_value());
  EXPECT_FALSE(cache.get(3, 40, 0.6)->performance.has_value());
}

TEST(Unanchored, ChannelAtChanceReliability) {
  const CodeMatrix g = CodeMatrix::from_rows({{0, 0, 1}, {0, 1, 1}, {1, 1, 0}});
  const auto u = unanchored_answer_distribution(g);
  // Each bit is 1 w.p. (column ones)/q, independent of the true part.
  std::vector<std::vector<int>> rows = g.to_rows();
  const auto ref = oracle::performance_matrix(rows, 1.0 / 3.0);
  double sum = 0;
  for (std::size_t o = 0; o < 3; ++o) {
    EXPECT_NEAR(u[o], ref[0][o], 1e-12);
    EXPECT_NEAR(ref[1][o], ref[0][o], 1e-12);
    sum += u[o];
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(ChannelJson, HasMatrixAndPerformance) {
  ChannelCache cache;
  std::ostringstream out;
  write_channel_json(out, *cache.get(3, 6, 0.7));
  const auto doc = nlohmann::json::parse(out.str());
  EXPECT_EQ(doc["q"], 3);
  EXPECT_EQ(doc["matrix"].size(), 3u);
  EXPECT_EQ(doc["matrix"][0].size(), 6u);
  EXPECT_EQ(doc["performance"].size(), 3u);
}
