#pragma once

// State algebra of the (M, q, e) Ulam-Renyi game: statuses, their types,
// question tuples, element/status weights and the answer-driven update.
//
// Labels are the hidden-state names 1..M. Part and lie-class indices are
// zero-based: answer j selects part j of a question, lie class i holds the
// candidates that would imply exactly i lies.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace ursqs {

using Label = std::uint32_t;
using LabelSet = std::vector<Label>;  // sorted ascending, no duplicates
using BigInt = boost::multiprecision::cpp_int;

/// Count vector (|A_0|, ..., |A_e|) of a status.
struct StatusType {
  std::vector<std::size_t> counts;

  std::size_t lie_budget() const noexcept { return counts.empty() ? 0 : counts.size() - 1; }
  std::size_t total() const noexcept;
  bool operator==(const StatusType&) const = default;
};

class GameStatus {
 public:
  /// Throws std::invalid_argument unless the classes are sorted, pairwise
  /// disjoint and contained in [1, num_states].
  GameStatus(std::size_t num_states, std::vector<LabelSet> classes_by_lies);

  std::size_t num_states() const noexcept { return num_states_; }
  std::size_t lie_budget() const noexcept { return classes_.size() - 1; }
  const LabelSet& lie_class(std::size_t i) const { return classes_.at(i); }
  const std::vector<LabelSet>& lie_classes() const noexcept { return classes_; }

  StatusType type() const;
  std::size_t total() const noexcept;
  /// Union of all lie classes, sorted.
  LabelSet support() const;

  bool operator==(const GameStatus&) const = default;

 private:
  std::size_t num_states_;
  std::vector<LabelSet> classes_;
};

/// A q-ary question (T_1, ..., T_q): pairwise disjoint label sets.
class QuestionTuple {
 public:
  QuestionTuple() = default;
  /// Sorts each part; throws std::invalid_argument on overlap, q < 2, or label 0.
  explicit QuestionTuple(std::vector<LabelSet> parts);

  std::size_t arity() const noexcept { return parts_.size(); }
  const LabelSet& part(std::size_t j) const { return parts_.at(j); }
  const std::vector<LabelSet>& parts() const noexcept { return parts_; }
  LabelSet support() const;
  std::size_t support_size() const noexcept;
  std::size_t nonempty_parts() const noexcept;

  /// Index of the part containing `h`, if any. O(1).
  std::optional<std::size_t> part_of(Label h) const noexcept {
    if (h >= part_index_.size() || part_index_[h] < 0) return std::nullopt;
    return static_cast<std::size_t>(part_index_[h]);
  }

  bool operator==(const QuestionTuple& other) const { return parts_ == other.parts_; }

 private:
  std::vector<LabelSet> parts_;
  std::vector<std::int32_t> part_index_;  // label -> part, -1 outside
};

GameStatus initial_status(std::size_t num_states, std::size_t lie_budget);

/// sigma^j. Throws std::invalid_argument if `answer` >= q or the question
/// does not cover exactly the support of `status`.
GameStatus update_status(const GameStatus& status, const QuestionTuple& question,
                         std::size_t answer);

/// W_w(i) = sum_{k=0}^{e-i} C(w,k) (q-1)^k.
BigInt element_weight(std::size_t lie_index, std::size_t questions_left, std::size_t q,
                      std::size_t lie_budget);

/// V_w(|sigma|) = sum_i |A_i| W_w(i); e is taken from the type's length.
BigInt status_weight(const StatusType& type, std::size_t questions_left, std::size_t q);

struct Verdict {
  bool final = false;
  std::optional<Label> winner;  // empty on a final status means every candidate was eliminated
};

Verdict is_final(const GameStatus& status);

// Fixed-width weight arithmetic for the hot paths (question planning, tree
// construction). Int is any integer type closed under + - * / %; callers are
// responsible for picking one wide enough (see fits_fast_weights).
namespace weights {

/// Row (W_w(0), ..., W_w(e), 0).
template <class Int>
std::vector<Int> element_row(std::size_t questions_left, std::size_t q, std::size_t lie_budget) {
  // terms[k] = C(w,k) (q-1)^k, k = 0..e
  std::vector<Int> terms(lie_budget + 1, Int(0));
  Int term = 1;
  for (std::size_t k = 0; k <= lie_budget; ++k) {
    if (k > 0) {
      if (k > questions_left) break;
      term = term * Int(static_cast<long long>(questions_left - k + 1)) /
             Int(static_cast<long long>(k)) * Int(static_cast<long long>(q - 1));
    }
    terms[k] = term;
  }
  std::vector<Int> row(lie_budget + 2, Int(0));
  Int acc = 0;
  for (std::size_t i = lie_budget + 1; i-- > 0;) {
    acc = acc + terms[lie_budget - i];
    row[i] = acc;
  }
  return row;
}

template <class Int>
Int status_value(std::span<const std::size_t> counts, std::span<const Int> row) {
  Int v = 0;
  for (std::size_t i = 0; i < counts.size(); ++i)
    v = v + Int(static_cast<long long>(counts[i])) * row[i];
  return v;
}

}  // namespace weights

}  // namespace ursqs
