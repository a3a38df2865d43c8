#include "ursqs/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace ursqs {

double r_hat(std::size_t e, std::size_t b_hat, double p_min) {
  if (p_min < 0.0 || p_min > 1.0) throw std::invalid_argument("r_hat: p_min outside [0,1]");
  double total = 0.0;
  double binom = 1.0;
  for (std::size_t k = 0; k <= std::min(e, b_hat); ++k) {
    if (k > 0) binom = binom * static_cast<double>(b_hat - k + 1) / static_cast<double>(k);
    total += binom * std::pow(1.0 - p_min, static_cast<double>(k)) *
             std::pow(p_min, static_cast<double>(b_hat - k));
  }
  return std::min(total, 1.0);
}

namespace {

struct Evaluated {
  PlanCandidate candidate;
  std::shared_ptr<const UlamTree> tree;
  std::shared_ptr<const Channel> channel;
};

std::optional<double> usable_mu(const WorkerModel& workers, std::size_t q) {
  try {
    return mean_reliability(workers, q);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

// nullopt once B-hat(q, e) > b - 1.
std::optional<Evaluated> evaluate(std::size_t num_states, std::size_t q, std::size_t e, std::size_t budget,
                                  double gamma, const Channel& channel_ref,
                                  std::shared_ptr<const Channel> channel, const PlanOptions& options) {
  TreeOptions tree_opts;
  tree_opts.max_questions = budget - 1;
  tree_opts.label_seed = options.label_seed;
  auto tree = try_compute_B(num_states, q, e, tree_opts);
  if (!tree) return std::nullopt;
  Evaluated out;
  out.candidate.q = q;
  out.candidate.e = e;
  out.candidate.b_hat = tree->question_bound();
  out.candidate.p_min = channel_ref.performance->min_diagonal();
  out.candidate.r_hat = r_hat(e, out.candidate.b_hat, out.candidate.p_min);
  out.candidate.objective = out.candidate.r_hat - gamma * static_cast<double>(out.candidate.b_hat);
  out.tree = std::make_shared<const UlamTree>(std::move(*tree));
  out.channel = std::move(channel);
  return out;
}

UrsqsPlan base_plan(std::size_t num_states, std::size_t budget, double gamma, const WorkerModel& workers) {
  if (num_states < 2) throw std::invalid_argument("plan: need M >= 2");
  if (budget < 1) throw std::invalid_argument("plan: need b >= 1");
  if (gamma < 0.0) throw std::invalid_argument("plan: need gamma >= 0");
  UrsqsPlan plan;
  plan.num_states = num_states;
  plan.budget = budget;
  plan.gamma = gamma;
  plan.workers = workers;
  plan.degenerate = true;
  plan.chosen.objective = 1.0 / static_cast<double>(num_states);
  return plan;
}

void adopt(UrsqsPlan& plan, Evaluated&& best) {
  plan.degenerate = false;
  plan.chosen = best.candidate;
  plan.tree = std::move(best.tree);
  plan.channel = std::move(best.channel);
}

}  // namespace

UrsqsPlan make_ursqs_plan(std::size_t num_states, std::size_t q, std::size_t e, std::size_t budget, double gamma,
                          const WorkerModel& workers, ChannelCache& cache, const PlanOptions& options) {
  UrsqsPlan plan = base_plan(num_states, budget, gamma, workers);
  if (budget < 2) throw std::invalid_argument("make_ursqs_plan: b = 1 allows no questions");
  if (q < 2 || q > num_states) throw std::invalid_argument("make_ursqs_plan: need q in [2, M]");
  const double mu = mean_reliability(workers, q);
  auto channel = cache.get(q, workers.group_size, mu);
  auto found = evaluate(num_states, q, e, budget, gamma, *channel, channel, options);
  if (!found)
    throw std::invalid_argument("make_ursqs_plan: B-hat(" + std::to_string(q) + "," + std::to_string(e) +
                                ") exceeds b - 1 = " + std::to_string(budget - 1));
  plan.candidates.push_back(found->candidate);
  adopt(plan, std::move(*found));
  return plan;
}

UrsqsPlan optimize_qe(std::size_t num_states, std::size_t budget, double gamma, const WorkerModel& workers,
                      ChannelCache& cache, const PlanOptions& options) {
  UrsqsPlan plan = base_plan(num_states, budget, gamma, workers);
  if (budget == 1) return plan;

  std::optional<Evaluated> best;
  const std::size_t top = std::min(num_states, options.max_arity.value_or(num_states));
  for (std::size_t q = 2; q <= top; ++q) {
    const auto mu = usable_mu(workers, q);
    if (!mu) continue;
    auto channel = cache.get(q, workers.group_size, *mu);
    std::size_t previous = 0;
    for (std::size_t e = 0; e <= budget; ++e) {
      auto found = evaluate(num_states, q, e, budget, gamma, *channel, channel, options);
      if (!found) break;
      if (found->candidate.b_hat < previous)
        throw std::logic_error("optimize_qe: B-hat decreased in e at q=" + std::to_string(q));
      previous = found->candidate.b_hat;
      plan.candidates.push_back(found->candidate);
      if (!best || found->candidate.objective > best->candidate.objective) best = std::move(found);
    }
  }
  if (best) adopt(plan, std::move(*best));
  return plan;
}

void write_plan_json(std::ostream& out, const UrsqsPlan& plan) {
  nlohmann::json doc;
  doc["M"] = plan.num_states;
  doc["b"] = plan.budget;
  doc["gamma"] = plan.gamma;
  doc["degenerate"] = plan.degenerate;
  if (!plan.degenerate) {
    doc["q"] = plan.chosen.q;
    doc["e"] = plan.chosen.e;
    doc["B_hat"] = plan.chosen.b_hat;
    doc["R_hat"] = plan.chosen.r_hat;
    doc["L"] = plan.chosen.objective;
    doc["p_min"] = plan.chosen.p_min;
    doc["label_seed"] = plan.tree->label_seed();
    doc["matrix"] = plan.channel->matrix.to_rows();
  }
  auto list = nlohmann::json::array();
  for (const auto& c : plan.candidates)
    list.push_back({{"q", c.q}, {"e", c.e}, {"B_hat", c.b_hat}, {"p_min", c.p_min}, {"R_hat", c.r_hat},
                    {"L", c.objective}});
  doc["candidates"] = list;
  out << doc.dump(1) << '\n';
}

namespace {

void check_truth(std::size_t num_states, Label truth) {
  if (truth < 1 || truth > num_states)
    throw std::invalid_argument("trial: true state " + std::to_string(truth) + " outside [1,M]");
}

}  // namespace

TrialResult run_ursqs_trial(const UrsqsPlan& plan, Label truth, Rng& rng) {
  check_truth(plan.num_states, truth);
  TrialResult result;
  result.true_state = truth;
  Belief belief = uniform_belief(plan.num_states);
  if (plan.degenerate) {
    result.declared = map_decision(belief);
    result.reward = result.correct() ? 1.0 : 0.0;
    return result;
  }

  const UlamTree& tree = *plan.tree;
  const Channel& channel = *plan.channel;
  GameStatus status = initial_status(plan.num_states, plan.chosen.e);
  NodeId id = tree.root();
  while (status.total() > 1 && result.questions < plan.chosen.b_hat) {
    const TreeNode& node = tree.node(id);
    if (!node.internal()) break;
    const QuestionTuple question = materialize_question(status, *node.plan, &rng);
    GroupAnswer answer = question.part_of(truth)
                             ? group_answer(question, truth, plan.workers, channel.matrix, rng)
                             : group_answer_unanchored(plan.workers, channel.matrix, rng);
    if (answer.decoded != answer.true_part) ++result.decode_errors;
    update_belief_in_place(belief, question, *channel.performance, answer.decoded);
    status = update_status(status, question, answer.decoded);
    result.trace.push_back({id, answer.decoded});
    id = node.children[answer.decoded];
    ++result.questions;
  }
  const Verdict verdict = is_final(status);
  result.declared = verdict.winner ? *verdict.winner : map_decision(belief);
  result.reward = (result.correct() ? 1.0 : 0.0) - plan.gamma * static_cast<double>(result.questions);
  return result;
}

DcfeccPlan make_dcfecc_plan(std::size_t num_states, std::size_t budget, double gamma, const WorkerModel& workers,
                            ChannelCache& cache) {
  if (num_states < 2) throw std::invalid_argument("dcfecc: need M >= 2");
  if (budget < 2) throw std::invalid_argument("dcfecc: need b >= 2 (at least one worker)");
  DcfeccPlan plan;
  plan.num_states = num_states;
  plan.budget = budget;
  plan.gamma = gamma;
  plan.workers = workers;
  plan.workers.group_size = workers.group_size * (budget - 1);
  plan.channel = cache.get(num_states, plan.workers.group_size, mean_reliability(workers, num_states));
  return plan;
}

TrialResult run_dcfecc_trial(const DcfeccPlan& plan, Label truth, Rng& rng) {
  check_truth(plan.num_states, truth);
  std::vector<LabelSet> parts(plan.num_states);
  for (std::size_t h = 0; h < plan.num_states; ++h) parts[h] = {static_cast<Label>(h + 1)};
  const QuestionTuple question(std::move(parts));
  const GroupAnswer answer = group_answer(question, truth, plan.workers, plan.channel->matrix, rng);

  TrialResult result;
  result.true_state = truth;
  result.declared = static_cast<Label>(answer.decoded + 1);
  result.questions = plan.budget - 1;
  result.decode_errors = answer.decoded != answer.true_part ? 1 : 0;
  result.trace.push_back({0, answer.decoded});
  result.reward = (result.correct() ? 1.0 : 0.0) - plan.gamma * static_cast<double>(plan.budget - 1);
  return result;
}

UStarResult exhaustive_u_star(std::size_t q, std::size_t num_states, std::size_t budget, double gamma,
                              const WorkerModel& workers, ChannelCache& cache, std::size_t trials,
                              std::uint64_t seed, const PlanOptions& options) {
  if (trials < 1) throw std::invalid_argument("exhaustive_u_star: need trials >= 1");
  UStarResult out;
  out.q = q;
  out.reward = -std::numeric_limits<double>::infinity();
  if (budget < 2) return out;
  for (std::size_t e = 0; e <= budget; ++e) {
    UrsqsPlan plan;
    try {
      plan = make_ursqs_plan(num_states, q, e, budget, gamma, workers, cache, options);
    } catch (const std::invalid_argument&) {
      break;
    }
    double sum = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      Rng rng = make_stream(seed, t);
      const auto truth = static_cast<Label>(std::uniform_int_distribution<std::size_t>(1, num_states)(rng));
      sum += run_ursqs_trial(plan, truth, rng).reward;
    }
    const double mean = sum / static_cast<double>(trials);
    out.by_e.emplace_back(e, mean);
    if (!out.best_e || mean > out.reward) {
      out.best_e = e;
      out.reward = mean;
    }
  }
  return out;
}

}  // namespace ursqs
