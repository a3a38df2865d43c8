#pragma once

// Simulated worker groups: each question goes to a fresh group of N workers
// whose reliabilities are drawn around mu_q = r q^exponent. A worker picks the
// true part with probability lambda, any other part uniformly otherwise, and
// reports the code-matrix bit of the part it picked.

#include <cstddef>
#include <cstdint>

#include "ursqs/coding.hpp"
#include "ursqs/rng.hpp"
#include "ursqs/ulam_core.hpp"

namespace ursqs {

enum class ReliabilityDistribution { kDeterministicMean, kBeta };

struct WorkerModel {
  std::size_t group_size = 10;       // N
  double reliability_scale = 0.75;   // r
  double exponent = -0.2;
  ReliabilityDistribution distribution = ReliabilityDistribution::kDeterministicMean;
  double beta_concentration = 10.0;  // kappa = a + b
};

/// r q^exponent. Throws std::invalid_argument if q < 2, the value exceeds 1,
/// or it is no better than a uniform guess (<= 1/q).
double mean_reliability(const WorkerModel& model, std::size_t q);

/// One worker's reliability for a q-ary question.
double draw_reliability(const WorkerModel& model, std::size_t q, Rng& rng);

/// The part a worker believes holds H: `true_part` w.p. lambda, else uniform
/// over the other q - 1 parts.
std::size_t sample_opinion(std::size_t true_part, std::size_t q, double lambda, Rng& rng);

struct GroupAnswer {
  std::size_t decoded = 0;    // o, 0-based part
  Bits bits;                  // u
  std::size_t true_part = 0;  // l with H in T_l
};

/// Throws std::invalid_argument when H is not in any part or the matrix does
/// not have one row per part.
GroupAnswer group_answer(const QuestionTuple& question, Label truth, const WorkerModel& model,
                         const CodeMatrix& g, Rng& rng);

/// Group answer when H lies outside the question: every worker's opinion is
/// uniform over the parts.
GroupAnswer group_answer_unanchored(const WorkerModel& model, const CodeMatrix& g, Rng& rng);

}  // namespace ursqs
