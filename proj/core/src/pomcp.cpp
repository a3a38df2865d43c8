#include "ursqs/pomcp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ursqs/ulam_tree.hpp"

namespace ursqs {

namespace {

std::vector<QuestionTuple> uniform_questions(std::size_t num_states, std::size_t q, std::size_t k, Rng& rng) {
  std::vector<QuestionTuple> out;
  std::vector<Label> labels(num_states);
  std::iota(labels.begin(), labels.end(), Label{1});
  for (std::size_t n = 0; n < k; ++n) {
    const std::size_t size = std::uniform_int_distribution<std::size_t>(q, num_states)(rng);
    std::shuffle(labels.begin(), labels.end(), rng);
    std::vector<LabelSet> parts(q);
    for (std::size_t j = 0; j < q; ++j) parts[j].push_back(labels[j]);
    std::uniform_int_distribution<std::size_t> pick(0, q - 1);
    for (std::size_t i = q; i < size; ++i) parts[pick(rng)].push_back(labels[i]);
    out.emplace_back(std::move(parts));
  }
  return out;
}

}  // namespace

PomdpModel build_model(const UrsqsPlan& plan, std::int64_t k, ActionSampler sampler, Rng& rng) {
  if (k <= 0) throw std::invalid_argument("build_model: need k >= 1");
  PomdpModel model;
  model.num_states = plan.num_states;
  model.horizon = plan.budget;
  model.gamma = plan.gamma;
  model.workers = plan.workers;
  if (plan.degenerate) return model;  // declare only

  model.channel = plan.channel;
  model.unanchored = unanchored_answer_distribution(plan.channel->matrix);
  if (sampler == ActionSampler::kUrt)
    model.questions = sample_actions_urt(*plan.tree, k, rng, UrtSampling::kUniformNodes);
  else if (sampler == ActionSampler::kUrtStratified)
    model.questions = sample_actions_urt(*plan.tree, k, rng, UrtSampling::kDepthStratified);
  else
    model.questions = uniform_questions(plan.num_states, plan.chosen.q, static_cast<std::size_t>(k), rng);
  return model;
}

namespace {

constexpr std::int32_t kNone = -1;

struct Edge {
  std::size_t action = 0;
  std::size_t visits = 0;
  double value = 0.0;
  std::vector<std::int32_t> children;  // by observation; empty for declare
};

struct Node {
  std::vector<double> belief;
  std::size_t visits = 0;
  std::vector<Edge> edges;
  std::vector<std::uint32_t> untried;  // popped from the back
  bool ordered = false;
};

class Search {
 public:
  Search(const PomdpModel& model, const PomcpOptions& options, Rng& rng)
      : model_(model), options_(options), rng_(rng) {
    q_ = model.channel ? model.channel->performance->arity() : 0;
  }

  std::size_t run(const Belief& root_belief, std::size_t steps_left) {
    nodes_.clear();
    add_node(root_belief.probs);
    std::discrete_distribution<std::size_t> prior(root_belief.probs.begin(), root_belief.probs.end());
    for (std::size_t s = 0; s < options_.simulations; ++s) {
      const auto truth = static_cast<Label>(prior(rng_) + 1);
      simulate(0, truth, steps_left);
    }
    const Node& root = nodes_[0];
    std::size_t best = model_.declare_action();
    std::size_t most = 0;
    for (const Edge& e : root.edges)
      if (e.visits > most) {
        most = e.visits;
        best = e.action;
      }
    return best;
  }

 private:
  std::int32_t add_node(std::vector<double> belief) {
    Node n;
    n.belief = std::move(belief);
    if (options_.widening <= 0.0) {
      n.untried.resize(model_.action_count());
      std::iota(n.untried.begin(), n.untried.end(), 0U);
      std::shuffle(n.untried.begin(), n.untried.end(), rng_);
      n.ordered = true;
    }
    nodes_.push_back(std::move(n));
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }

  bool legal(const std::vector<double>& belief, std::size_t action) const {
    if (action == model_.declare_action()) return true;
    for (const auto& part : model_.questions[action].parts())
      for (Label h : part)
        if (belief[h - 1] > 0.0) return true;
    return false;
  }

  std::size_t observe(const QuestionTuple& question, Label truth) {
    const auto part = question.part_of(truth);
    if (part) {
      const auto row = model_.channel->performance->row(*part);
      return std::discrete_distribution<std::size_t>(row.begin(), row.end())(rng_);
    }
    return std::discrete_distribution<std::size_t>(model_.unanchored.begin(), model_.unanchored.end())(rng_);
  }

  // In-place verbatim update; an impossible observation leaves the belief as is.
  void update(std::vector<double>& belief, const QuestionTuple& question, std::size_t o) const {
    const PerformanceMatrix& p = *model_.channel->performance;
    double inside = 0.0;
    double weighted = 0.0;
    for (std::size_t l = 0; l < question.arity(); ++l)
      for (Label h : question.part(l)) {
        inside += belief[h - 1];
        weighted += p.at(l, o) * belief[h - 1];
      }
    if (!(inside > 0.0) || !(weighted > 0.0)) return;
    const double z = weighted / inside;
    for (std::size_t l = 0; l < question.arity(); ++l) {
      const double scale = p.at(l, o) / z;
      for (Label h : question.part(l)) belief[h - 1] *= scale;
    }
  }

  static Label map_of(const std::vector<double>& belief) {
    return static_cast<Label>(std::max_element(belief.begin(), belief.end()) - belief.begin() + 1);
  }

  double declare_value(const std::vector<double>& belief, Label truth) const {
    return map_of(belief) == truth ? 1.0 : 0.0;
  }

  std::size_t random_legal(const std::vector<double>& belief) {
    std::uniform_int_distribution<std::size_t> pick(0, model_.questions.size() - 1);
    for (int attempt = 0; attempt < 32; ++attempt) {
      const std::size_t a = pick(rng_);
      if (legal(belief, a)) return a;
    }
    return model_.declare_action();
  }

  double answer_prob(const QuestionTuple& question, Label h, std::size_t o) const {
    const auto part = question.part_of(h);
    return part ? model_.channel->performance->at(*part, o) : model_.unanchored[o];
  }

  // P(MAP after asking is right) - P(MAP now is right), under the search's
  // generative model.
  double map_gain(const std::vector<double>& belief, const QuestionTuple& question) {
    scratch_ = belief;
    double after = 0.0;
    for (std::size_t o = 0; o < q_; ++o) {
      scratch_ = belief;
      update(scratch_, question, o);
      const auto h = static_cast<Label>(std::max_element(scratch_.begin(), scratch_.end()) - scratch_.begin() + 1);
      after += belief[h - 1] * answer_prob(question, h, o);
    }
    return after - *std::max_element(belief.begin(), belief.end());
  }

  std::size_t greedy_action(const std::vector<double>& belief) {
    std::size_t best = model_.declare_action();
    double best_gain = model_.gamma;
    for (std::size_t c = 0; c < options_.rollout_candidates; ++c) {
      const std::size_t a = random_legal(belief);
      if (a == model_.declare_action()) continue;
      const double gain = map_gain(belief, model_.questions[a]);
      if (gain > best_gain) {
        best_gain = gain;
        best = a;
      }
    }
    return best;
  }

  double rollout(std::vector<double> belief, Label truth, std::size_t steps_left) {
    double total = 0.0;
    while (steps_left > 1 && !model_.questions.empty()) {
      const std::size_t action =
          options_.rollout == RolloutPolicy::kGreedy ? greedy_action(belief) : random_legal(belief);
      if (action == model_.declare_action()) break;
      const QuestionTuple& question = model_.questions[action];
      update(belief, question, observe(question, truth));
      total -= model_.gamma;
      --steps_left;
    }
    return total + declare_value(belief, truth);
  }

  // Declare ends up last so it is opened first; questions by ascending gain.
  void order_actions(Node& node) {
    std::vector<std::pair<double, std::uint32_t>> scored;
    for (std::size_t a = 0; a < model_.questions.size(); ++a)
      if (legal(node.belief, a)) scored.emplace_back(map_gain(node.belief, model_.questions[a]), a);
    std::sort(scored.begin(), scored.end());
    node.untried.clear();
    for (const auto& [gain, a] : scored) node.untried.push_back(a);
    node.untried.push_back(static_cast<std::uint32_t>(model_.declare_action()));
    node.ordered = true;
  }

  bool may_widen(const Node& node) const {
    if (options_.widening <= 0.0) return true;
    const double cap = std::ceil(options_.widening *
                                 std::pow(static_cast<double>(node.visits + 1), options_.widening_exponent));
    return static_cast<double>(node.edges.size()) < cap;
  }

  Edge* select(std::int32_t id) {
    Node& node = nodes_[id];
    if (!node.ordered) order_actions(node);
    while (!node.untried.empty() && (node.edges.empty() || may_widen(node))) {
      const std::size_t action = node.untried.back();
      node.untried.pop_back();
      if (!legal(node.belief, action)) continue;
      Edge e;
      e.action = action;
      if (action != model_.declare_action()) e.children.assign(q_, kNone);
      node.edges.push_back(std::move(e));
      return &node.edges.back();
    }
    Edge* best = nullptr;
    double best_score = -std::numeric_limits<double>::infinity();
    const double log_n = std::log(static_cast<double>(std::max<std::size_t>(node.visits, 1)));
    for (Edge& e : node.edges) {
      const double score = e.visits == 0 ? std::numeric_limits<double>::infinity()
                                         : e.value + options_.exploration * std::sqrt(log_n / e.visits);
      if (score > best_score) {
        best_score = score;
        best = &e;
      }
    }
    return best;
  }

  double simulate(std::int32_t id, Label truth, std::size_t steps_left) {
    if (steps_left <= 1 || model_.questions.empty()) {
      ++nodes_[id].visits;
      return declare_value(nodes_[id].belief, truth);
    }
    Edge* edge = select(id);
    const std::size_t action = edge->action;
    double ret = 0.0;
    if (action == model_.declare_action()) {
      ret = declare_value(nodes_[id].belief, truth);
    } else {
      const QuestionTuple& question = model_.questions[action];
      const std::size_t o = observe(question, truth);
      const std::int32_t child = edge->children[o];
      if (child == kNone) {
        std::vector<double> next = nodes_[id].belief;
        update(next, question, o);
        const std::int32_t created = add_node(next);  // invalidates `edge`
        edge = find_edge(id, action);
        edge->children[o] = created;
        ++nodes_[created].visits;
        ret = -model_.gamma + rollout(std::move(next), truth, steps_left - 1);
      } else {
        ret = -model_.gamma + simulate(child, truth, steps_left - 1);
        edge = find_edge(id, action);
      }
    }
    ++edge->visits;
    edge->value += (ret - edge->value) / static_cast<double>(edge->visits);
    ++nodes_[id].visits;
    return ret;
  }

  Edge* find_edge(std::int32_t id, std::size_t action) {
    for (Edge& e : nodes_[id].edges)
      if (e.action == action) return &e;
    throw std::logic_error("pomcp: edge vanished");
  }

  const PomdpModel& model_;
  const PomcpOptions& options_;
  Rng& rng_;
  std::size_t q_ = 0;
  std::vector<Node> nodes_;
  std::vector<double> scratch_;
};

}  // namespace

std::size_t plan_action(const PomdpModel& model, const Belief& belief, std::size_t steps_left,
                        const PomcpOptions& options, Rng& rng) {
  if (steps_left < 1) throw std::invalid_argument("plan_action: need steps_left >= 1");
  if (belief.num_states() != model.num_states) throw std::invalid_argument("plan_action: belief size mismatch");
  if (steps_left == 1 || model.questions.empty()) return model.declare_action();
  Search search(model, options, rng);
  return search.run(belief, steps_left);
}

TrialResult run_pomcp_trial(const PomdpModel& model, Label truth, const PomcpOptions& options, Rng& rng) {
  if (truth < 1 || truth > model.num_states) throw std::invalid_argument("run_pomcp_trial: true state outside [1,M]");
  TrialResult result;
  result.true_state = truth;
  Belief belief = uniform_belief(model.num_states);
  std::size_t steps_left = model.horizon;
  for (;;) {
    const std::size_t action = plan_action(model, belief, steps_left, options, rng);
    if (action == model.declare_action()) break;
    const QuestionTuple& question = model.questions[action];
    const GroupAnswer answer = question.part_of(truth)
                                   ? group_answer(question, truth, model.workers, model.channel->matrix, rng)
                                   : group_answer_unanchored(model.workers, model.channel->matrix, rng);
    if (answer.decoded != answer.true_part) ++result.decode_errors;
    try {
      update_belief_in_place(belief, question, *model.channel->performance, answer.decoded);
    } catch (const std::domain_error&) {
      // The answer is impossible under the channel; keep the belief.
    }
    result.trace.push_back({action, answer.decoded});
    ++result.questions;
    --steps_left;
  }
  result.declared = map_decision(belief);
  result.reward = (result.correct() ? 1.0 : 0.0) - model.gamma * static_cast<double>(result.questions);
  return result;
}

}  // namespace ursqs
