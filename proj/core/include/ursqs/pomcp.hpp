#pragma once

// Online Monte-Carlo tree search over a sampled question set plus a single
// declare action. Search nodes carry exact beliefs; observation branches are
// sampled as in POMCP.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "ursqs/belief.hpp"
#include "ursqs/coding.hpp"
#include "ursqs/policies.hpp"
#include "ursqs/rng.hpp"
#include "ursqs/ulam_core.hpp"
#include "ursqs/worker_sim.hpp"

namespace ursqs {

enum class ActionSampler { kUrt, kUrtStratified, kUniform };

struct PomdpModel {
  std::size_t num_states = 0;
  std::size_t horizon = 1;  // b
  double gamma = 0.0;
  WorkerModel workers;
  std::vector<QuestionTuple> questions;  // action i < questions.size(); declare is questions.size()
  std::shared_ptr<const Channel> channel;
  std::vector<double> unanchored;  // answer law when H is in no part

  std::size_t declare_action() const noexcept { return questions.size(); }
  std::size_t action_count() const noexcept { return questions.size() + 1; }
};

/// Action set drawn from the plan's (q*, e*) tree (uniform over its nodes, or
/// uniform over depths first), or `k` random q*-ary covers of random subsets
/// of the states. Throws for k <= 0.
PomdpModel build_model(const UrsqsPlan& plan, std::int64_t k, ActionSampler sampler, Rng& rng);

enum class RolloutPolicy {
  kRandom,  // uniformly random legal question until the horizon forces a declare
  kGreedy,  // best of a few random questions by one-step MAP gain; declare once no gain beats gamma
};

struct PomcpOptions {
  std::size_t simulations = 4096;
  double exploration = 1.0;
  RolloutPolicy rollout = RolloutPolicy::kRandom;
  std::size_t rollout_candidates = 8;
  /// > 0 enables progressive widening: a node visited n times keeps at most
  /// ceil(widening * n^widening_exponent) edges, opened in order of one-step
  /// MAP gain (declare first). 0 opens every action in random order.
  double widening = 0.0;
  double widening_exponent = 0.5;
};

/// Root action with the most visits after `simulations` searches from the
/// belief; declare when steps_left == 1.
std::size_t plan_action(const PomdpModel& model, const Belief& belief, std::size_t steps_left,
                        const PomcpOptions& options, Rng& rng);

TrialResult run_pomcp_trial(const PomdpModel& model, Label truth, const PomcpOptions& options, Rng& rng);

}  // namespace ursqs
