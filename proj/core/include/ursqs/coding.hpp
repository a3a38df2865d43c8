#pragma once

// Code matrices that turn one q-ary question into N binary worker questions,
// Hamming decoding of the workers' bits, and the exact q x q channel that a
// (matrix, mean reliability) pair induces. Parts and workers are 0-based.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "ursqs/rng.hpp"

namespace ursqs {

using Bits = std::vector<std::uint8_t>;  // one 0/1 entry per worker

class CodeMatrix {
 public:
  CodeMatrix() = default;
  CodeMatrix(std::size_t rows, std::size_t cols);
  static CodeMatrix from_rows(const std::vector<std::vector<int>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool get(std::size_t row, std::size_t col) const {
    return (words_[row * stride_ + col / 64] >> (col % 64)) & 1U;
  }
  void set(std::size_t row, std::size_t col, bool bit);
  void flip(std::size_t row, std::size_t col) { set(row, col, !get(row, col)); }
  std::span<const std::uint64_t> row_words(std::size_t row) const {
    return {words_.data() + row * stride_, stride_};
  }
  std::size_t words_per_row() const noexcept { return stride_; }
  bool distinct_rows() const;
  std::vector<std::vector<int>> to_rows() const;

  bool operator==(const CodeMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t stride_ = 0;
  std::vector<std::uint64_t> words_;
};

/// The binary question handed to worker `col`: rows with a 0 in that column
/// versus rows with a 1.
struct BinaryQuestion {
  std::vector<std::size_t> zero;
  std::vector<std::size_t> one;
};
BinaryQuestion column_question(const CodeMatrix& g, std::size_t col);

/// P(worker `col` reports 1 | true part `part`) at mean reliability mu.
double bit_one_probability(const CodeMatrix& g, std::size_t part, std::size_t col, double mu);

/// P(u | H in T_part): product over workers of 1 - u_j + (2u_j - 1) p_j.
double response_vector_prob(const CodeMatrix& g, std::size_t part, double mu, std::span<const std::uint8_t> u);

/// Row nearest to u in Hamming distance; ties broken uniformly at random.
std::size_t hamming_decode(const CodeMatrix& g, std::span<const std::uint8_t> u, Rng& rng);

class PerformanceMatrix {
 public:
  PerformanceMatrix() = default;
  explicit PerformanceMatrix(std::size_t q) : q_(q), probs_(q * q, 0.0) {}

  std::size_t arity() const noexcept { return q_; }
  double& at(std::size_t part, std::size_t answer) { return probs_[part * q_ + answer]; }
  double at(std::size_t part, std::size_t answer) const { return probs_[part * q_ + answer]; }
  std::span<const double> row(std::size_t part) const { return {probs_.data() + part * q_, q_}; }
  double min_diagonal() const;
  /// sum_l sum_{o != l} p(o | l) / q
  double average_error() const;

 private:
  std::size_t q_ = 0;
  std::vector<double> probs_;
};

inline constexpr std::size_t kMaxExactWorkers = 20;

/// Exact sum over all 2^N response vectors, tie mass split evenly.
/// Throws std::invalid_argument when N > 20.
PerformanceMatrix performance_matrix(const CodeMatrix& g, double mu);

struct CodeSearchOptions {
  std::size_t restarts = 20;
  std::size_t max_sweeps = 6;
  /// Rough cap on arithmetic work per search (q * 2^N per exact evaluation).
  double work_budget = 6e7;
};

struct CodeSearchResult {
  CodeMatrix matrix;
  double cost = 0.0;  // average error; a union-bound proxy when N > 20
  bool exact = true;  // false when `cost` is the proxy
};

/// Coordinate descent over columns from random distinct-row starts, or an
/// exhaustive scan when q*N <= 16. Throws if q > 2^N (rows cannot be distinct).
CodeSearchResult search_code_matrix(std::size_t q, std::size_t workers, double mu, Rng& rng,
                                    const CodeSearchOptions& options = {});

/// sum_{l != k} prod_j BC_j(l,k), BC the Bhattacharyya coefficient of the
/// two classes' bit distributions at worker j. Bounds the decoding error
/// times q; used in place of the exact cost when 2^N is out of reach.
double union_bound_cost(const CodeMatrix& g, double mu);

struct Channel {
  CodeMatrix matrix;
  std::optional<PerformanceMatrix> performance;  // absent when N > 20
  double mu = 0.0;
  double cost = 0.0;
};

/// Channels keyed by (q, N, mu rounded to 1e-3) so every strategy in a run
/// sees the same code matrix. Thread-safe; searches are seeded from the key.
class ChannelCache {
 public:
  explicit ChannelCache(std::uint64_t seed = 0x5eedc0deULL, CodeSearchOptions options = {})
      : seed_(seed), options_(options) {}

  std::shared_ptr<const Channel> get(std::size_t q, std::size_t workers, double mu);

 private:
  using Key = std::tuple<std::size_t, std::size_t, long long>;
  std::uint64_t seed_;
  CodeSearchOptions options_;
  std::mutex mutex_;
  std::map<Key, std::shared_ptr<const Channel>> entries_;
};

/// Decoded-answer law when the true state lies outside the question: every
/// worker picks a part uniformly and independently, which is any row of the
/// channel at mu = 1/q.
std::vector<double> unanchored_answer_distribution(const CodeMatrix& g);

void write_channel_json(std::ostream& out, const Channel& channel);

}  // namespace ursqs
