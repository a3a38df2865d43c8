#include "ursqs/ulam_tree.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace ursqs {

namespace {

using Wide = __int128;

struct MemoKey {
  std::vector<std::size_t> counts;
  std::size_t questions_left;
  bool operator==(const MemoKey&) const = default;
};

struct MemoKeyHash {
  std::size_t operator()(const MemoKey& k) const noexcept {
    std::uint64_t h = mix64(k.questions_left);
    for (std::size_t c : k.counts) h = mix64(h ^ c);
    return static_cast<std::size_t>(h);
  }
};

struct MemoEntry {
  bool solvable = false;
  std::optional<PartitionPlan> plan;
};

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  return (a > kSaturated - b) ? kSaturated : a + b;
}

std::size_t total_of(const std::vector<std::size_t>& counts) {
  std::size_t n = 0;
  for (std::size_t c : counts) n += c;
  return n;
}

// Memoized expansion shared across the depths tried by compute_B; an entry
// depends only on (type, questions_left), never on the depth being tested.
class Builder {
 public:
  Builder(std::size_t num_states, std::size_t q, std::size_t lie_budget,
          std::optional<std::chrono::steady_clock::time_point> deadline)
      : num_states_(num_states), q_(q), e_(lie_budget), deadline_(deadline) {}

  bool solvable(std::size_t depth) {
    std::vector<std::size_t> root(e_ + 1, 0);
    root[0] = num_states_;
    if (fits_wide(depth)) return expand(tables<Wide>(depth), root, depth);
    return expand(tables<BigInt>(depth), root, depth);
  }

  std::vector<TreeNode> extract(std::size_t depth) {
    std::vector<TreeNode> nodes;
    std::unordered_map<MemoKey, NodeId, MemoKeyHash> ids;
    std::vector<std::size_t> root(e_ + 1, 0);
    root[0] = num_states_;
    visit(nodes, ids, root, depth, depth);
    summarize(nodes);
    return nodes;
  }

 private:
  template <class Int>
  struct Tables {
    std::vector<std::vector<Int>> rows;  // rows[w] = W_w(0..e), 0
    std::vector<Int> powers;             // q^w
  };

  bool fits_wide(std::size_t depth) const {
    const BigInt pow = boost::multiprecision::pow(BigInt(q_), static_cast<unsigned>(depth));
    const BigInt top = element_weight(0, depth, q_, e_) * BigInt(num_states_ + 1) * 4;
    return boost::multiprecision::msb(pow) < 118 && boost::multiprecision::msb(top) < 118;
  }

  template <class Int>
  Tables<Int> tables(std::size_t depth) const {
    Tables<Int> t;
    Int p = 1;
    for (std::size_t w = 0; w <= depth; ++w) {
      t.rows.push_back(weights::element_row<Int>(w, q_, e_));
      t.powers.push_back(p);
      p = p * Int(static_cast<long long>(q_));
    }
    return t;
  }

  template <class Int>
  bool expand(const Tables<Int>& t, const std::vector<std::size_t>& counts, std::size_t w) {
    if (total_of(counts) <= 1) return true;
    if (w == 0) return false;
    if (deadline_ && (++calls_ & 1023) == 0 && std::chrono::steady_clock::now() > *deadline_)
      throw TreeBuildTimeout("Ulam-Renyi tree construction exceeded its deadline");

    MemoKey key{counts, w};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second.solvable;

    // Weight conservation: no strategy survives V_w > q^w.
    if (weights::status_value<Int>(counts, t.rows[w]) > t.powers[w]) {
      memo_.emplace(std::move(key), MemoEntry{false, std::nullopt});
      return false;
    }

    PartitionPlan plan = plan_question<Int>(counts, q_, t.rows[w - 1]);
    bool ok = true;
    for (const StatusType& kid : child_types(StatusType{counts}, plan)) {
      if (!expand(t, kid.counts, w - 1)) {
        ok = false;
        break;
      }
    }
    memo_.emplace(std::move(key), MemoEntry{ok, ok ? std::optional(std::move(plan)) : std::nullopt});
    return ok;
  }

  NodeId visit(std::vector<TreeNode>& nodes, std::unordered_map<MemoKey, NodeId, MemoKeyHash>& ids,
               const std::vector<std::size_t>& counts, std::size_t w, std::size_t depth) {
    MemoKey key{counts, w};
    if (auto it = ids.find(key); it != ids.end()) return it->second;
    const NodeId id = nodes.size();
    TreeNode node;
    node.type.counts = counts;
    node.questions_left = w;
    node.depth = depth - w;
    nodes.push_back(std::move(node));
    ids.emplace(key, id);

    if (total_of(counts) > 1) {
      const MemoEntry& entry = memo_.at(key);
      PartitionPlan plan = *entry.plan;
      std::vector<NodeId> kids;
      for (const StatusType& kid : child_types(StatusType{counts}, plan))
        kids.push_back(visit(nodes, ids, kid.counts, w - 1, depth));
      nodes[id].plan = std::move(plan);
      nodes[id].children = std::move(kids);
    }
    return id;
  }

  static void summarize(std::vector<TreeNode>& nodes) {
    std::vector<NodeId> order(nodes.size());
    for (NodeId i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
      return nodes[a].questions_left < nodes[b].questions_left;
    });
    for (NodeId id : order) {
      TreeNode& n = nodes[id];
      if (!n.internal()) continue;
      n.internal_paths = 1;
      n.internal_by_depth.assign(n.questions_left, 0);
      n.internal_by_depth[0] = 1;
      for (NodeId c : n.children) {
        const TreeNode& child = nodes[c];
        n.internal_paths = sat_add(n.internal_paths, child.internal_paths);
        for (std::size_t d = 0; d < child.internal_by_depth.size(); ++d)
          n.internal_by_depth[d + 1] = sat_add(n.internal_by_depth[d + 1], child.internal_by_depth[d]);
      }
    }
  }

  std::size_t num_states_;
  std::size_t q_;
  std::size_t e_;
  std::optional<std::chrono::steady_clock::time_point> deadline_;
  std::uint64_t calls_ = 0;
  std::unordered_map<MemoKey, MemoEntry, MemoKeyHash> memo_;
};

std::uint64_t path_key(std::span<const std::size_t> path) {
  std::uint64_t h = mix64(path.size());
  for (std::size_t a : path) h = mix64(h ^ (a + 1));
  return h;
}

void check_game(std::size_t num_states, std::size_t q) {
  if (num_states < 2) throw std::invalid_argument("need M >= 2");
  if (q < 2 || q > num_states) throw std::invalid_argument("need q in [2, M]");
}

}  // namespace

UlamTree::UlamTree(std::size_t num_states, std::size_t q, std::size_t lie_budget,
                   std::size_t question_bound, std::size_t min_questions, std::uint64_t label_seed,
                   std::vector<TreeNode> nodes)
    : num_states_(num_states),
      q_(q),
      e_(lie_budget),
      bound_(question_bound),
      n_min_(min_questions),
      seed_(label_seed),
      nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw std::invalid_argument("UlamTree: no nodes");
}

NodeId UlamTree::locate(std::span<const std::size_t> path) const {
  NodeId id = root();
  for (std::size_t a : path) {
    const TreeNode& n = nodes_.at(id);
    if (!n.internal()) throw std::out_of_range("UlamTree::locate: path runs past a leaf");
    if (a >= q_) throw std::out_of_range("UlamTree::locate: answer index out of range");
    id = n.children[a];
  }
  return id;
}

QuestionTuple UlamTree::question_at(const GameStatus& status, NodeId id,
                                    std::span<const std::size_t> path) const {
  const TreeNode& n = nodes_.at(id);
  if (!n.internal()) throw std::out_of_range("UlamTree: leaf nodes ask no question");
  Rng labeler = make_stream(seed_, path_key(path));
  return materialize_question(status, *n.plan, &labeler);
}

GameStatus UlamTree::concrete_status(std::span<const std::size_t> path) const {
  GameStatus status = initial_status(num_states_, e_);
  NodeId id = root();
  for (std::size_t step = 0; step < path.size(); ++step) {
    const QuestionTuple question = question_at(status, id, path.first(step));
    status = update_status(status, question, path[step]);
    id = nodes_[id].children.at(path[step]);
  }
  return status;
}

QuestionTuple UlamTree::concrete_question(std::span<const std::size_t> path) const {
  return question_at(concrete_status(path), locate(path), path);
}

void UlamTree::write_json(std::ostream& out) const {
  nlohmann::json doc;
  doc["M"] = num_states_;
  doc["q"] = q_;
  doc["e"] = e_;
  doc["B_hat"] = bound_;
  doc["N_min"] = n_min_;
  auto& list = doc["nodes"] = nlohmann::json::array();
  for (NodeId id = 0; id < nodes_.size(); ++id) {
    const TreeNode& n = nodes_[id];
    list.push_back({{"id", id},
                    {"type", n.type.counts},
                    {"depth", n.depth},
                    {"questions_left", n.questions_left},
                    {"children", n.children}});
  }
  out << doc.dump(1) << '\n';
}

std::size_t n_min(std::size_t num_states, std::size_t q, std::size_t lie_budget) {
  if (num_states < 2) throw std::invalid_argument("n_min: need M >= 2");
  if (q < 2) throw std::invalid_argument("n_min: need q >= 2");
  BigInt pow = 1;
  for (std::size_t n = 0;; ++n) {
    if (BigInt(num_states) * element_weight(0, n, q, lie_budget) <= pow) return n;
    pow *= q;
  }
}

std::optional<UlamTree> try_compute_B(std::size_t num_states, std::size_t q, std::size_t lie_budget,
                                      const TreeOptions& options) {
  check_game(num_states, q);
  const std::size_t lower = n_min(num_states, q, lie_budget);
  Builder builder(num_states, q, lie_budget, options.deadline);
  for (std::size_t w = lower; w <= lower + options.max_extra_depth; ++w) {
    if (options.max_questions && w > *options.max_questions) return std::nullopt;
    if (builder.solvable(w))
      return UlamTree(num_states, q, lie_budget, w, lower, options.label_seed, builder.extract(w));
  }
  throw std::runtime_error("compute_B: no tree within N_min + " +
                           std::to_string(options.max_extra_depth) + " questions");
}

UlamTree compute_B(std::size_t num_states, std::size_t q, std::size_t lie_budget,
                   const TreeOptions& options) {
  TreeOptions unbounded = options;
  unbounded.max_questions.reset();
  return *try_compute_B(num_states, q, lie_budget, unbounded);
}

namespace {

std::vector<std::size_t> unrank(const UlamTree& tree, std::uint64_t index) {
  std::vector<std::size_t> path;
  NodeId id = tree.root();
  while (index > 0) {
    --index;
    const TreeNode& n = tree.node(id);
    bool moved = false;
    for (std::size_t a = 0; a < n.children.size(); ++a) {
      const std::uint64_t below = tree.node(n.children[a]).internal_paths;
      if (index < below) {
        path.push_back(a);
        id = n.children[a];
        moved = true;
        break;
      }
      index -= below;
    }
    if (!moved) throw std::logic_error("unrank: index beyond subtree size");
  }
  return path;
}

std::vector<std::size_t> unrank_at_depth(const UlamTree& tree, std::size_t depth, std::uint64_t index) {
  std::vector<std::size_t> path;
  NodeId id = tree.root();
  while (depth > 0) {
    const TreeNode& n = tree.node(id);
    bool moved = false;
    for (std::size_t a = 0; a < n.children.size(); ++a) {
      const auto& by_depth = tree.node(n.children[a]).internal_by_depth;
      const std::uint64_t below = depth - 1 < by_depth.size() ? by_depth[depth - 1] : 0;
      if (index < below) {
        path.push_back(a);
        id = n.children[a];
        moved = true;
        break;
      }
      index -= below;
    }
    if (!moved) throw std::logic_error("unrank_at_depth: index beyond level size");
    --depth;
  }
  return path;
}

void collect_all(const UlamTree& tree, NodeId id, std::vector<std::size_t>& path,
                 std::vector<std::vector<std::size_t>>& out) {
  const TreeNode& n = tree.node(id);
  if (!n.internal()) return;
  out.push_back(path);
  for (std::size_t a = 0; a < n.children.size(); ++a) {
    path.push_back(a);
    collect_all(tree, n.children[a], path, out);
    path.pop_back();
  }
}

}  // namespace

std::vector<QuestionTuple> sample_actions_urt(const UlamTree& tree, std::int64_t k, Rng& rng,
                                              UrtSampling mode) {
  if (k < 0) throw std::invalid_argument("sample_actions_urt: k must be >= 0");
  const auto want = static_cast<std::uint64_t>(k);
  const std::uint64_t total = tree.concrete_internal_nodes();

  std::vector<std::vector<std::size_t>> paths;
  if (want == 0 || total == 0) {
    // nothing to draw
  } else if (want >= total) {
    std::vector<std::size_t> scratch;
    collect_all(tree, tree.root(), scratch, paths);
  } else if (mode == UrtSampling::kUniformNodes) {
    // Floyd's sampling of `want` distinct indices in [0, total).
    std::set<std::uint64_t> picked;
    for (std::uint64_t j = total - want; j < total; ++j) {
      const std::uint64_t t = std::uniform_int_distribution<std::uint64_t>(0, j)(rng);
      if (!picked.insert(t).second) picked.insert(j);
    }
    for (std::uint64_t index : picked) paths.push_back(unrank(tree, index));
  } else {
    const auto& levels = tree.node(tree.root()).internal_by_depth;
    std::vector<std::size_t> depths;
    for (std::size_t d = 0; d < levels.size(); ++d)
      if (levels[d] > 0) depths.push_back(d);
    std::set<std::pair<std::size_t, std::uint64_t>> picked;
    const std::uint64_t max_attempts = 64 * want + 1024;
    for (std::uint64_t attempt = 0; picked.size() < want && attempt < max_attempts; ++attempt) {
      const std::size_t d = depths[std::uniform_int_distribution<std::size_t>(0, depths.size() - 1)(rng)];
      const std::uint64_t index = std::uniform_int_distribution<std::uint64_t>(0, levels[d] - 1)(rng);
      picked.emplace(d, index);
    }
    for (const auto& [d, index] : picked) paths.push_back(unrank_at_depth(tree, d, index));
  }

  std::vector<QuestionTuple> out;
  out.reserve(paths.size());
  for (const auto& path : paths) out.push_back(tree.concrete_question(path));
  return out;
}

}  // namespace ursqs
