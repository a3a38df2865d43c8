#pragma once

// Posterior over the M hidden states, its Bayes update after a decoded group
// answer, and the MAP decision.

#include <cstddef>
#include <vector>

#include "ursqs/coding.hpp"
#include "ursqs/ulam_core.hpp"

namespace ursqs {

struct Belief {
  std::vector<double> probs;  // probs[h - 1] = p(h)

  std::size_t num_states() const noexcept { return probs.size(); }
  double operator()(Label h) const { return probs.at(h - 1); }
};

Belief uniform_belief(std::size_t num_states);

/// States in the question are reweighted by P_q(l(h), o) and rescaled so the
/// question's total mass is unchanged; states outside it keep their mass.
/// Throws std::domain_error when the observation has zero probability.
Belief update_belief(const Belief& p, const QuestionTuple& question, const PerformanceMatrix& channel,
                     std::size_t observation);
void update_belief_in_place(Belief& p, const QuestionTuple& question, const PerformanceMatrix& channel,
                            std::size_t observation);

/// Z(o) = sum_{h in T} P_q(l(h), o) p(h) / sum_{h in T} p(h): the answer law
/// given H is inside the question, under which the update is a martingale.
std::vector<double> predictive(const Belief& p, const QuestionTuple& question, const PerformanceMatrix& channel);

/// argmax, lowest label on ties.
Label map_decision(const Belief& p);

}  // namespace ursqs
