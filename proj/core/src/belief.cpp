#include "ursqs/belief.hpp"

#include <stdexcept>
#include <string>

namespace ursqs {

Belief uniform_belief(std::size_t num_states) {
  if (num_states < 2) throw std::invalid_argument("uniform_belief: need M >= 2");
  return Belief{std::vector<double>(num_states, 1.0 / static_cast<double>(num_states))};
}

namespace {

void check_shapes(const Belief& p, const QuestionTuple& question, const PerformanceMatrix& channel) {
  if (channel.arity() != question.arity())
    throw std::invalid_argument("update_belief: channel arity != question arity");
  for (const auto& part : question.parts())
    if (!part.empty() && part.back() > p.num_states())
      throw std::invalid_argument("update_belief: question label outside the belief");
}

}  // namespace

std::vector<double> predictive(const Belief& p, const QuestionTuple& question, const PerformanceMatrix& channel) {
  check_shapes(p, question, channel);
  const std::size_t q = question.arity();
  std::vector<double> z(q, 0.0);
  double inside = 0.0;
  for (std::size_t l = 0; l < q; ++l) {
    double mass = 0.0;
    for (Label h : question.part(l)) mass += p.probs[h - 1];
    inside += mass;
    for (std::size_t o = 0; o < q; ++o) z[o] += channel.at(l, o) * mass;
  }
  if (!(inside > 0.0)) throw std::domain_error("predictive: question holds no belief mass");
  for (double& v : z) v /= inside;
  return z;
}

void update_belief_in_place(Belief& p, const QuestionTuple& question, const PerformanceMatrix& channel,
                            std::size_t observation) {
  if (observation >= question.arity())
    throw std::invalid_argument("update_belief: observation " + std::to_string(observation) + " out of range");
  const double z = predictive(p, question, channel)[observation];
  if (!(z > 0.0)) throw std::domain_error("update_belief: observation has zero probability");
  for (std::size_t l = 0; l < question.arity(); ++l) {
    const double scale = channel.at(l, observation) / z;
    for (Label h : question.part(l)) p.probs[h - 1] *= scale;
  }
  double total = 0.0;
  for (double v : p.probs) total += v;
  for (double& v : p.probs) v /= total;
}

Belief update_belief(const Belief& p, const QuestionTuple& question, const PerformanceMatrix& channel,
                     std::size_t observation) {
  Belief out = p;
  update_belief_in_place(out, question, channel, observation);
  return out;
}

Label map_decision(const Belief& p) {
  if (p.probs.empty()) throw std::invalid_argument("map_decision: empty belief");
  std::size_t best = 0;
  for (std::size_t h = 1; h < p.probs.size(); ++h)
    if (p.probs[h] > p.probs[best]) best = h;
  return static_cast<Label>(best + 1);
}

}  // namespace ursqs
