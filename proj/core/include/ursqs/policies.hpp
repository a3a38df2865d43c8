#pragma once

// URSQS: pick (q, e) by maximizing R-hat - gamma B-hat under the question
// budget, then play the Ulam-Renyi strategy against simulated groups. Also
// the one-shot DCFECC baseline and the per-q exhaustive benchmark U*(q).

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "ursqs/belief.hpp"
#include "ursqs/coding.hpp"
#include "ursqs/rng.hpp"
#include "ursqs/ulam_tree.hpp"
#include "ursqs/worker_sim.hpp"

namespace ursqs {

/// P(at most e errors in B-hat answers) with per-answer success p_min.
double r_hat(std::size_t e, std::size_t b_hat, double p_min);

struct PlanCandidate {
  std::size_t q = 0;
  std::size_t e = 0;
  std::size_t b_hat = 0;
  double p_min = 0.0;
  double r_hat = 0.0;
  double objective = 0.0;  // L
};

struct UrsqsPlan {
  std::size_t num_states = 0;
  std::size_t budget = 1;  // b
  double gamma = 0.0;
  WorkerModel workers;

  bool degenerate = false;  // b = 1 or nothing feasible: declare from the prior
  PlanCandidate chosen;
  std::shared_ptr<const UlamTree> tree;
  std::shared_ptr<const Channel> channel;
  std::vector<PlanCandidate> candidates;  // every feasible (q, e) examined
};

struct PlanOptions {
  std::uint64_t label_seed = 0;
  /// Largest arity tried; defaults to M.
  std::optional<std::size_t> max_arity;
};

/// Plan for a fixed (q, e). Throws std::invalid_argument if B-hat(q, e) > b - 1.
UrsqsPlan make_ursqs_plan(std::size_t num_states, std::size_t q, std::size_t e, std::size_t budget, double gamma,
                          const WorkerModel& workers, ChannelCache& cache, const PlanOptions& options = {});

/// Enumerates q ascending and e = 0, 1, ... while B-hat(q, e) <= b - 1 (and
/// e <= b); keeps the first pair with the largest L.
UrsqsPlan optimize_qe(std::size_t num_states, std::size_t budget, double gamma, const WorkerModel& workers,
                      ChannelCache& cache, const PlanOptions& options = {});

void write_plan_json(std::ostream& out, const UrsqsPlan& plan);

struct TraceStep {
  std::size_t action = 0;  // tree node id for URSQS, action index for POMCP
  std::size_t observation = 0;
};

struct TrialResult {
  Label true_state = 0;
  Label declared = 0;
  std::size_t questions = 0;  // tau - 1
  double reward = 0.0;
  std::size_t decode_errors = 0;
  std::vector<TraceStep> trace;

  bool correct() const noexcept { return declared == true_state; }
};

/// Plays the plan's Ulam-Renyi strategy; declares the lone survivor, or the
/// MAP state of a belief tracked alongside when no state survives.
TrialResult run_ursqs_trial(const UrsqsPlan& plan, Label truth, Rng& rng);

struct DcfeccPlan {
  std::size_t num_states = 0;
  std::size_t budget = 2;
  double gamma = 0.0;
  WorkerModel workers;  // group_size = N (b - 1)
  std::shared_ptr<const Channel> channel;
};

/// One M-ary question split over N (b - 1) workers. Throws for b < 2 or when
/// M exceeds 2^(workers).
DcfeccPlan make_dcfecc_plan(std::size_t num_states, std::size_t budget, double gamma, const WorkerModel& workers,
                            ChannelCache& cache);
/// Charged gamma (b - 1): the same worker spend as a full sequential run.
TrialResult run_dcfecc_trial(const DcfeccPlan& plan, Label truth, Rng& rng);

struct UStarResult {
  std::size_t q = 0;
  std::optional<std::size_t> best_e;  // empty when no e is feasible
  double reward = 0.0;
  std::vector<std::pair<std::size_t, double>> by_e;  // (e, mean reward)
};

/// Best simulated mean reward of the fixed-q strategy over all feasible e.
UStarResult exhaustive_u_star(std::size_t q, std::size_t num_states, std::size_t budget, double gamma,
                              const WorkerModel& workers, ChannelCache& cache, std::size_t trials,
                              std::uint64_t seed, const PlanOptions& options = {});

}  // namespace ursqs
