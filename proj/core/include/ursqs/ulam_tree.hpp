#pragma once

// The (M, q, e) Ulam-Renyi tree. Question plans depend only on the status
// type and the number of questions left, so the tree is built and stored as a
// DAG over (type, questions_left) nodes; every concrete root-to-node path of
// the full q-ary tree maps onto one DAG node. Concrete questions are produced
// on demand by replaying a path with per-node seeded labelers.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ursqs/question_design.hpp"
#include "ursqs/rng.hpp"
#include "ursqs/ulam_core.hpp"

namespace ursqs {

using NodeId = std::size_t;

struct TreeNode {
  StatusType type;
  std::size_t questions_left = 0;
  std::size_t depth = 0;
  std::optional<PartitionPlan> plan;  // present iff the node asks a question
  std::vector<NodeId> children;       // one per answer when internal

  // Concrete (path-distinct) internal nodes in this subtree, self included.
  // Saturates at UINT64_MAX.
  std::uint64_t internal_paths = 0;
  // internal_by_depth[d]: concrete internal nodes d levels below this one.
  std::vector<std::uint64_t> internal_by_depth;

  bool internal() const noexcept { return plan.has_value(); }
};

class UlamTree {
 public:
  UlamTree(std::size_t num_states, std::size_t q, std::size_t lie_budget, std::size_t question_bound,
           std::size_t min_questions, std::uint64_t label_seed, std::vector<TreeNode> nodes);

  std::size_t num_states() const noexcept { return num_states_; }
  std::size_t arity() const noexcept { return q_; }
  std::size_t lie_budget() const noexcept { return e_; }
  /// B-hat: the depth for which every leaf holds at most one state.
  std::size_t question_bound() const noexcept { return bound_; }
  std::size_t min_questions() const noexcept { return n_min_; }
  std::uint64_t label_seed() const noexcept { return seed_; }

  NodeId root() const noexcept { return 0; }
  const TreeNode& node(NodeId id) const { return nodes_.at(id); }
  std::size_t size() const noexcept { return nodes_.size(); }
  std::span<const TreeNode> nodes() const noexcept { return nodes_; }
  /// Concrete internal nodes of the full tree (saturating).
  std::uint64_t concrete_internal_nodes() const noexcept { return nodes_.front().internal_paths; }

  /// DAG node reached by following `path` (answer indices) from the root.
  NodeId locate(std::span<const std::size_t> path) const;
  /// Concrete status at the end of `path`, replaying the tree's labelers.
  GameStatus concrete_status(std::span<const std::size_t> path) const;
  /// Question asked at the end of `path`; throws if that node is a leaf.
  QuestionTuple concrete_question(std::span<const std::size_t> path) const;

  /// Writes {M, q, e, B_hat, N_min, nodes: [{id, type, depth, questions_left, children}]}.
  void write_json(std::ostream& out) const;

 private:
  QuestionTuple question_at(const GameStatus& status, NodeId id,
                            std::span<const std::size_t> path) const;

  std::size_t num_states_;
  std::size_t q_;
  std::size_t e_;
  std::size_t bound_;
  std::size_t n_min_;
  std::uint64_t seed_;
  std::vector<TreeNode> nodes_;
};

class TreeBuildTimeout : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TreeOptions {
  /// Depths tried above N_min before giving up (turns the open-ended search
  /// into a total function).
  std::size_t max_extra_depth = 64;
  /// Stop early once the depth would exceed this; try_compute_B returns nullopt.
  std::optional<std::size_t> max_questions;
  std::optional<std::chrono::steady_clock::time_point> deadline;
  std::uint64_t label_seed = 0;
};

/// min{ n : M sum_{j<=e} C(n,j)(q-1)^j <= q^n }.
std::size_t n_min(std::size_t num_states, std::size_t q, std::size_t lie_budget);

/// Smallest depth w >= N_min whose tree has every leaf with <= 1 state.
/// Throws std::runtime_error past N_min + max_extra_depth, TreeBuildTimeout
/// past the deadline.
UlamTree compute_B(std::size_t num_states, std::size_t q, std::size_t lie_budget,
                   const TreeOptions& options = {});

/// As compute_B, but returns nullopt when B-hat would exceed options.max_questions.
std::optional<UlamTree> try_compute_B(std::size_t num_states, std::size_t q, std::size_t lie_budget,
                                      const TreeOptions& options = {});

enum class UrtSampling { kUniformNodes, kDepthStratified };

/// Questions of `k` distinct concrete internal nodes drawn without
/// replacement; every node's question if the tree has at most k of them.
std::vector<QuestionTuple> sample_actions_urt(const UlamTree& tree, std::int64_t k, Rng& rng,
                                              UrtSampling mode = UrtSampling::kUniformNodes);

}  // namespace ursqs
