#include "ursqs/worker_sim.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace ursqs {

double mean_reliability(const WorkerModel& model, std::size_t q) {
  if (q < 2) throw std::invalid_argument("mean_reliability: need q >= 2");
  const double mu = model.reliability_scale * std::pow(static_cast<double>(q), model.exponent);
  if (mu > 1.0) throw std::invalid_argument("mean_reliability: mu_" + std::to_string(q) + " exceeds 1");
  if (mu <= 1.0 / static_cast<double>(q))
    throw std::invalid_argument("mean_reliability: mu_" + std::to_string(q) + "=" + std::to_string(mu) +
                                " is no better than guessing");
  return mu;
}

double draw_reliability(const WorkerModel& model, std::size_t q, Rng& rng) {
  const double mu = mean_reliability(model, q);
  if (model.distribution == ReliabilityDistribution::kDeterministicMean || mu >= 1.0) return mu;
  const double kappa = model.beta_concentration;
  if (!(kappa > 0.0)) throw std::invalid_argument("draw_reliability: beta concentration must be > 0");
  const double x = std::gamma_distribution<double>(mu * kappa, 1.0)(rng);
  const double y = std::gamma_distribution<double>((1.0 - mu) * kappa, 1.0)(rng);
  return (x + y) > 0.0 ? x / (x + y) : mu;
}

std::size_t sample_opinion(std::size_t true_part, std::size_t q, double lambda, Rng& rng) {
  if (q < 2 || true_part >= q) throw std::invalid_argument("sample_opinion: part outside [0,q)");
  if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < lambda) return true_part;
  const std::size_t k = std::uniform_int_distribution<std::size_t>(0, q - 2)(rng);
  return k < true_part ? k : k + 1;
}

GroupAnswer group_answer(const QuestionTuple& question, Label truth, const WorkerModel& model,
                         const CodeMatrix& g, Rng& rng) {
  const std::size_t q = question.arity();
  if (g.rows() != q) throw std::invalid_argument("group_answer: code matrix rows != question arity");
  if (g.cols() != model.group_size) throw std::invalid_argument("group_answer: code matrix columns != N");
  const auto part = question.part_of(truth);
  if (!part) throw std::invalid_argument("group_answer: true state " + std::to_string(truth) + " not in question");

  GroupAnswer out;
  out.true_part = *part;
  out.bits.resize(g.cols());
  for (std::size_t k = 0; k < g.cols(); ++k) {
    const double lambda = draw_reliability(model, q, rng);
    out.bits[k] = g.get(sample_opinion(out.true_part, q, lambda, rng), k) ? 1 : 0;
  }
  out.decoded = hamming_decode(g, out.bits, rng);
  return out;
}

GroupAnswer group_answer_unanchored(const WorkerModel& model, const CodeMatrix& g, Rng& rng) {
  if (g.cols() != model.group_size) throw std::invalid_argument("group_answer: code matrix columns != N");
  GroupAnswer out;
  out.true_part = g.rows();  // no part holds H
  out.bits.resize(g.cols());
  std::uniform_int_distribution<std::size_t> pick(0, g.rows() - 1);
  for (std::size_t k = 0; k < g.cols(); ++k) out.bits[k] = g.get(pick(rng), k) ? 1 : 0;
  out.decoded = hamming_decode(g, out.bits, rng);
  return out;
}

}  // namespace ursqs
