#pragma once

// Next-question construction for a game status: split the lowest non-empty
// lie class evenly, then fill each higher lie class so that the children's
// weights V_{w-1}(|sigma^j|) are as balanced as possible.

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "ursqs/rng.hpp"
#include "ursqs/ulam_core.hpp"

namespace ursqs {

using Allocation = std::vector<std::size_t>;

/// One row of the balancing problem:
///   minimize   sum_{j,l} (V_j - V_l + alpha (x_j - x_l))^2
///   subject to sum_j x_j = budget,  0 <= x_j <= cap.
template <class Int>
struct BasicAllocationProblem {
  std::vector<Int> loads;  // V_j
  Int alpha = 0;           // W_{w-1}(i) - W_{w-1}(i+1), >= 0
  std::size_t budget = 0;  // |A_i|
  std::size_t cap = 0;     // per-part bound, |A_i| in the game
};

using AllocationProblem = BasicAllocationProblem<BigInt>;

/// Exact minimizer with ties broken towards the lexicographically smallest x.
///
/// Since sum_j y_j (y_j = V_j + alpha x_j) is fixed by the budget, the
/// objective equals 2q sum_j y_j^2 minus a constant, which is separable and
/// convex. Giving part j its k-th unit costs V_j + (k-1) alpha, so an
/// allocation is optimal iff it takes the `budget` cheapest units. Units
/// priced strictly below the threshold price are forced; the rest go to the
/// highest-indexed parts that still have a unit at the threshold price.
template <class Int>
Allocation solve_allocation(const BasicAllocationProblem<Int>& p) {
  const std::size_t q = p.loads.size();
  if (q == 0) throw std::invalid_argument("solve_allocation: no parts");
  if (p.alpha < Int(0)) throw std::invalid_argument("solve_allocation: alpha must be >= 0");
  if (p.cap * q < p.budget) throw std::invalid_argument("solve_allocation: infeasible (q*cap < budget)");

  Allocation x(q, 0);
  if (p.budget == 0) return x;

  if (p.alpha == Int(0)) {
    // Objective is constant; lexicographically smallest feasible point.
    std::size_t left = p.budget;
    for (std::size_t j = q; j-- > 0 && left > 0;) {
      x[j] = std::min(p.cap, left);
      left -= x[j];
    }
    return x;
  }

  const Int cap = Int(static_cast<long long>(p.cap));
  // Units of part j priced <= price, clipped to cap.
  auto units_upto = [&](const Int& price, std::size_t j) -> Int {
    if (price < p.loads[j]) return Int(0);
    Int n = (price - p.loads[j]) / p.alpha + Int(1);
    return n < cap ? n : cap;
  };
  auto count_upto = [&](const Int& price) {
    Int n = 0;
    for (std::size_t j = 0; j < q; ++j) n = n + units_upto(price, j);
    return n;
  };

  const Int need = Int(static_cast<long long>(p.budget));
  Int lo = *std::min_element(p.loads.begin(), p.loads.end());
  Int hi = *std::max_element(p.loads.begin(), p.loads.end()) + cap * p.alpha;
  while (lo < hi) {
    Int mid = lo + (hi - lo) / Int(2);
    if (count_upto(mid) >= need)
      hi = mid;
    else
      lo = mid + Int(1);
  }
  const Int threshold = lo;

  std::size_t taken = 0;
  for (std::size_t j = 0; j < q; ++j) {
    x[j] = static_cast<std::size_t>(units_upto(threshold - Int(1), j));
    taken += x[j];
  }
  std::size_t extra = p.budget - taken;
  for (std::size_t j = q; j-- > 0 && extra > 0;) {
    if (units_upto(threshold, j) > Int(static_cast<long long>(x[j]))) {
      ++x[j];
      --extra;
    }
  }
  return x;
}

/// Pairwise-difference objective of `x`, evaluated exactly.
BigInt allocation_objective(const AllocationProblem& p, const Allocation& x);

/// Matrix form of the same objective: returns (x^T F x, c^T x) with
/// F = alpha (q I - 1 1^T) (diagonal (q-1) alpha, off-diagonal -alpha) and
/// c_j = sum_k (V_j - V_k). The pairwise objective equals
/// sum_{j,l}(V_j - V_l)^2 + 2 alpha x^T F x + 4 alpha c^T x.
struct QuadraticTerms {
  BigInt quadratic;  // x^T F x
  BigInt linear;     // c^T x
};
QuadraticTerms allocation_quadratic_terms(const AllocationProblem& p, const Allocation& x);

/// |T_{j,i}| for j in [0,q), i in [0,e].
class PartitionPlan {
 public:
  PartitionPlan() = default;
  PartitionPlan(std::size_t parts, std::size_t lie_classes)
      : parts_(parts), classes_(lie_classes), counts_(parts * lie_classes, 0) {}

  std::size_t parts() const noexcept { return parts_; }
  std::size_t lie_classes() const noexcept { return classes_; }
  std::size_t& at(std::size_t part, std::size_t lie_class) { return counts_[part * classes_ + lie_class]; }
  std::size_t at(std::size_t part, std::size_t lie_class) const { return counts_[part * classes_ + lie_class]; }
  std::size_t column_sum(std::size_t lie_class) const;
  std::size_t part_size(std::size_t part) const;

  bool operator==(const PartitionPlan&) const = default;

 private:
  std::size_t parts_ = 0;
  std::size_t classes_ = 0;
  std::vector<std::size_t> counts_;
};

struct EvenSplit {
  std::size_t lowest_class = 0;  // m
  std::vector<std::size_t> counts;  // |T_{j,m}|, first (|A_m| mod q) parts get one extra
};

/// Throws std::invalid_argument on an all-zero type.
EvenSplit even_split_lowest(const StatusType& type, std::size_t q);

/// Count plan for the next question; Int must hold every weight involved
/// (see plan_question(StatusType, ...) for the checked entry point).
/// `row` is weights::element_row(w - 1, q, e).
template <class Int>
PartitionPlan plan_question(std::span<const std::size_t> counts, std::size_t q,
                            std::span<const Int> row) {
  const std::size_t classes = counts.size();
  std::size_t m = 0;
  while (m < classes && counts[m] == 0) ++m;
  if (m == classes) throw std::invalid_argument("plan_question: empty status type");

  PartitionPlan plan(q, classes);
  const std::size_t omega = counts[m] / q;
  const std::size_t delta = counts[m] % q;
  for (std::size_t j = 0; j < q; ++j) plan.at(j, m) = omega + (j < delta ? 1 : 0);

  BasicAllocationProblem<Int> problem;
  problem.loads.assign(q, Int(0));
  {
    const Int alpha = row[m] - row[m + 1];
    for (std::size_t j = 0; j < q; ++j)
      problem.loads[j] = alpha * Int(static_cast<long long>(plan.at(j, m)));
  }
  for (std::size_t i = m + 1; i < classes; ++i) {
    if (counts[i] == 0) continue;
    problem.alpha = row[i] - row[i + 1];
    problem.budget = counts[i];
    problem.cap = counts[i];
    const Allocation x = solve_allocation(problem);
    for (std::size_t j = 0; j < q; ++j) {
      plan.at(j, i) = x[j];
      problem.loads[j] = problem.loads[j] + problem.alpha * Int(static_cast<long long>(x[j]));
    }
  }
  return plan;
}

/// Plan for a status of this type with `questions_left` >= 1 questions left.
/// Uses 128-bit arithmetic when all weights provably fit, big integers otherwise.
PartitionPlan plan_question(const StatusType& type, std::size_t questions_left, std::size_t q);

/// Types |sigma^j| of the children produced by `plan`.
std::vector<StatusType> child_types(const StatusType& type, const PartitionPlan& plan);

/// Draws |T_{j,i}| labels from each A_i. With `shuffle` the draw is a seeded
/// random permutation; without it the smallest labels go to the lowest part.
QuestionTuple materialize_question(const GameStatus& status, const PartitionPlan& plan,
                                   Rng* shuffle = nullptr);

/// Deterministic labelling (smallest labels to lowest part index).
QuestionTuple design_question(const GameStatus& status, std::size_t questions_left, std::size_t q);
/// Seeded random labelling.
QuestionTuple design_question(const GameStatus& status, std::size_t questions_left, std::size_t q,
                              Rng& rng);

/// Disjoint parts with at least two of them non-empty.
bool is_playable(const QuestionTuple& question);

}  // namespace ursqs
