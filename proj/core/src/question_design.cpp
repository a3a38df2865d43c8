#include "ursqs/question_design.hpp"

#include <algorithm>
#include <numeric>

namespace ursqs {

namespace {

using Wide = __int128;

// Every quantity plan_question touches is bounded by a small multiple of
// total * W_{w-1}(0); keep that well inside the signed 128-bit range.
bool fits_wide(const StatusType& type, std::size_t questions_left, std::size_t q) {
  const BigInt top = element_weight(0, questions_left - 1, q, type.lie_budget());
  const BigInt bound = top * BigInt(type.total() + 1) * 4;
  return boost::multiprecision::msb(bound) < 120;
}

template <class Int>
PartitionPlan plan_with(const StatusType& type, std::size_t questions_left, std::size_t q) {
  const auto row = weights::element_row<Int>(questions_left - 1, q, type.lie_budget());
  return plan_question<Int>(type.counts, q, row);
}

}  // namespace

BigInt allocation_objective(const AllocationProblem& p, const Allocation& x) {
  const std::size_t q = p.loads.size();
  if (x.size() != q) throw std::invalid_argument("allocation_objective: size mismatch");
  BigInt total = 0;
  for (std::size_t j = 0; j < q; ++j) {
    for (std::size_t l = 0; l < q; ++l) {
      BigInt d = p.loads[j] - p.loads[l] +
                 p.alpha * (BigInt(x[j]) - BigInt(x[l]));
      total += d * d;
    }
  }
  return total;
}

QuadraticTerms allocation_quadratic_terms(const AllocationProblem& p, const Allocation& x) {
  const std::size_t q = p.loads.size();
  if (x.size() != q) throw std::invalid_argument("allocation_quadratic_terms: size mismatch");
  QuadraticTerms out;
  for (std::size_t j = 0; j < q; ++j) {
    for (std::size_t k = 0; k < q; ++k) {
      const BigInt f = (j == k) ? p.alpha * BigInt(q - 1) : BigInt(-p.alpha);
      out.quadratic += BigInt(x[j]) * f * BigInt(x[k]);
    }
    BigInt c = 0;
    for (std::size_t k = 0; k < q; ++k) c += p.loads[j] - p.loads[k];
    out.linear += c * BigInt(x[j]);
  }
  return out;
}

std::size_t PartitionPlan::column_sum(std::size_t lie_class) const {
  std::size_t s = 0;
  for (std::size_t j = 0; j < parts_; ++j) s += at(j, lie_class);
  return s;
}

std::size_t PartitionPlan::part_size(std::size_t part) const {
  std::size_t s = 0;
  for (std::size_t i = 0; i < classes_; ++i) s += at(part, i);
  return s;
}

EvenSplit even_split_lowest(const StatusType& type, std::size_t q) {
  if (q < 2) throw std::invalid_argument("even_split_lowest: q must be >= 2");
  const auto it = std::find_if(type.counts.begin(), type.counts.end(),
                               [](std::size_t c) { return c != 0; });
  if (it == type.counts.end()) throw std::invalid_argument("even_split_lowest: all-zero type");
  EvenSplit out;
  out.lowest_class = static_cast<std::size_t>(it - type.counts.begin());
  const std::size_t omega = *it / q;
  const std::size_t delta = *it % q;
  out.counts.resize(q);
  for (std::size_t j = 0; j < q; ++j) out.counts[j] = omega + (j < delta ? 1 : 0);
  return out;
}

PartitionPlan plan_question(const StatusType& type, std::size_t questions_left, std::size_t q) {
  if (q < 2) throw std::invalid_argument("plan_question: q must be >= 2");
  if (questions_left == 0) throw std::invalid_argument("plan_question: no questions left");
  if (type.total() == 0) throw std::invalid_argument("plan_question: empty status type");
  if (fits_wide(type, questions_left, q)) return plan_with<Wide>(type, questions_left, q);
  return plan_with<BigInt>(type, questions_left, q);
}

std::vector<StatusType> child_types(const StatusType& type, const PartitionPlan& plan) {
  const std::size_t classes = type.counts.size();
  std::vector<StatusType> kids(plan.parts());
  for (std::size_t j = 0; j < plan.parts(); ++j) {
    auto& c = kids[j].counts;
    c.resize(classes);
    c[0] = plan.at(j, 0);
    for (std::size_t k = 1; k < classes; ++k)
      c[k] = type.counts[k - 1] - plan.at(j, k - 1) + plan.at(j, k);
  }
  return kids;
}

QuestionTuple materialize_question(const GameStatus& status, const PartitionPlan& plan,
                                   Rng* shuffle) {
  if (plan.lie_classes() != status.lie_budget() + 1)
    throw std::invalid_argument("materialize_question: plan/status lie budget mismatch");
  std::vector<LabelSet> parts(plan.parts());
  for (std::size_t i = 0; i < plan.lie_classes(); ++i) {
    LabelSet pool = status.lie_class(i);
    if (plan.column_sum(i) != pool.size())
      throw std::invalid_argument("materialize_question: plan does not match status type");
    if (shuffle != nullptr) std::shuffle(pool.begin(), pool.end(), *shuffle);
    auto next = pool.begin();
    for (std::size_t j = 0; j < plan.parts(); ++j) {
      const auto n = static_cast<std::ptrdiff_t>(plan.at(j, i));
      parts[j].insert(parts[j].end(), next, next + n);
      next += n;
    }
  }
  return QuestionTuple(std::move(parts));
}

namespace {

void check_askable(const GameStatus& status, std::size_t questions_left) {
  if (status.total() <= 1) throw std::invalid_argument("design_question: status is already final");
  if (questions_left == 0) throw std::invalid_argument("design_question: no questions left");
}

}  // namespace

QuestionTuple design_question(const GameStatus& status, std::size_t questions_left, std::size_t q) {
  check_askable(status, questions_left);
  return materialize_question(status, plan_question(status.type(), questions_left, q));
}

QuestionTuple design_question(const GameStatus& status, std::size_t questions_left, std::size_t q,
                              Rng& rng) {
  check_askable(status, questions_left);
  return materialize_question(status, plan_question(status.type(), questions_left, q), &rng);
}

bool is_playable(const QuestionTuple& question) {
  // QuestionTuple's constructor already guarantees disjointness.
  return question.nonempty_parts() >= 2;
}

}  // namespace ursqs
