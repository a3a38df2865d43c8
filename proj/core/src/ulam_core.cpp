#include "ursqs/ulam_core.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ursqs {

namespace {

bool strictly_sorted(const LabelSet& s) {
  return std::adjacent_find(s.begin(), s.end(), std::greater_equal<>()) == s.end();
}

LabelSet set_union(const LabelSet& a, const LabelSet& b) {
  LabelSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

LabelSet set_intersection(const LabelSet& a, const LabelSet& b) {
  LabelSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

LabelSet set_difference(const LabelSet& a, const LabelSet& b) {
  LabelSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

std::size_t StatusType::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

GameStatus::GameStatus(std::size_t num_states, std::vector<LabelSet> classes_by_lies)
    : num_states_(num_states), classes_(std::move(classes_by_lies)) {
  if (classes_.empty()) throw std::invalid_argument("GameStatus: need at least one lie class");
  std::vector<bool> seen(num_states + 1, false);
  for (const auto& cls : classes_) {
    if (!strictly_sorted(cls)) throw std::invalid_argument("GameStatus: lie class not sorted/unique");
    for (Label h : cls) {
      if (h == 0 || h > num_states)
        throw std::invalid_argument("GameStatus: label " + std::to_string(h) + " outside [1,M]");
      if (seen[h]) throw std::invalid_argument("GameStatus: lie classes overlap at " + std::to_string(h));
      seen[h] = true;
    }
  }
}

StatusType GameStatus::type() const {
  StatusType t;
  t.counts.reserve(classes_.size());
  for (const auto& cls : classes_) t.counts.push_back(cls.size());
  return t;
}

std::size_t GameStatus::total() const noexcept {
  std::size_t n = 0;
  for (const auto& cls : classes_) n += cls.size();
  return n;
}

LabelSet GameStatus::support() const {
  LabelSet out;
  for (const auto& cls : classes_) out.insert(out.end(), cls.begin(), cls.end());
  std::sort(out.begin(), out.end());
  return out;
}

QuestionTuple::QuestionTuple(std::vector<LabelSet> parts) : parts_(std::move(parts)) {
  if (parts_.size() < 2) throw std::invalid_argument("QuestionTuple: need at least two parts");
  Label max_label = 0;
  for (auto& p : parts_) {
    std::sort(p.begin(), p.end());
    if (std::adjacent_find(p.begin(), p.end()) != p.end())
      throw std::invalid_argument("QuestionTuple: duplicate label within a part");
    if (!p.empty()) {
      if (p.front() == 0) throw std::invalid_argument("QuestionTuple: label 0 is not a state");
      max_label = std::max(max_label, p.back());
    }
  }
  part_index_.assign(static_cast<std::size_t>(max_label) + 1, -1);
  for (std::size_t j = 0; j < parts_.size(); ++j) {
    for (Label h : parts_[j]) {
      if (part_index_[h] >= 0)
        throw std::invalid_argument("QuestionTuple: parts overlap at " + std::to_string(h));
      part_index_[h] = static_cast<std::int32_t>(j);
    }
  }
}

LabelSet QuestionTuple::support() const {
  LabelSet out;
  for (const auto& p : parts_) out.insert(out.end(), p.begin(), p.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t QuestionTuple::support_size() const noexcept {
  std::size_t n = 0;
  for (const auto& p : parts_) n += p.size();
  return n;
}

std::size_t QuestionTuple::nonempty_parts() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(parts_.begin(), parts_.end(), [](const LabelSet& p) { return !p.empty(); }));
}

GameStatus initial_status(std::size_t num_states, std::size_t lie_budget) {
  if (num_states < 2) throw std::invalid_argument("initial_status: need M >= 2");
  std::vector<LabelSet> classes(lie_budget + 1);
  classes[0].resize(num_states);
  std::iota(classes[0].begin(), classes[0].end(), Label{1});
  return GameStatus(num_states, std::move(classes));
}

GameStatus update_status(const GameStatus& status, const QuestionTuple& question,
                         std::size_t answer) {
  if (answer >= question.arity())
    throw std::invalid_argument("update_status: answer index " + std::to_string(answer) +
                                " outside [0," + std::to_string(question.arity()) + ")");
  if (question.support() != status.support())
    throw std::invalid_argument("update_status: question does not cover the status support");

  const LabelSet& chosen = question.part(answer);
  const std::size_t e = status.lie_budget();
  std::vector<LabelSet> next(e + 1);
  next[0] = set_intersection(status.lie_class(0), chosen);
  for (std::size_t i = 1; i <= e; ++i) {
    next[i] = set_union(set_difference(status.lie_class(i - 1), chosen),
                        set_intersection(status.lie_class(i), chosen));
  }
  return GameStatus(status.num_states(), std::move(next));
}

BigInt element_weight(std::size_t lie_index, std::size_t questions_left, std::size_t q,
                      std::size_t lie_budget) {
  if (lie_index > lie_budget) throw std::invalid_argument("element_weight: lie index exceeds e");
  if (q < 2) throw std::invalid_argument("element_weight: q must be >= 2");
  return weights::element_row<BigInt>(questions_left, q, lie_budget)[lie_index];
}

BigInt status_weight(const StatusType& type, std::size_t questions_left, std::size_t q) {
  if (type.counts.empty()) return 0;
  if (q < 2) throw std::invalid_argument("status_weight: q must be >= 2");
  auto row = weights::element_row<BigInt>(questions_left, q, type.lie_budget());
  return weights::status_value<BigInt>(type.counts, row);
}

Verdict is_final(const GameStatus& status) {
  const std::size_t n = status.total();
  if (n > 1) return {};
  Verdict v{true, std::nullopt};
  if (n == 1) {
    for (const auto& cls : status.lie_classes())
      if (!cls.empty()) v.winner = cls.front();
  }
  return v;
}

}  // namespace ursqs
