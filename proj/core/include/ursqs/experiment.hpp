#pragma once

// Config-driven trial runs shared by the CLI, the acceptance suite and the
// benchmarks: per-trial seeded streams, parallel execution with results kept
// in trial order, CSV rows and a summary that can be recomputed from them.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ursqs/coding.hpp"
#include "ursqs/pomcp.hpp"
#include "ursqs/policies.hpp"
#include "ursqs/worker_sim.hpp"

namespace ursqs {

enum class Strategy { kUrsqs, kDcfecc, kPomcp, kUStar };

struct ExperimentConfig {
  std::size_t num_states = 32;  // M
  std::size_t group_size = 10;  // N
  std::size_t budget = 9;       // b
  double gamma = 0.05;
  double reliability_scale = 0.75;  // r
  std::size_t trials = 1000;
  Strategy strategy = Strategy::kUrsqs;
  ActionSampler sampler = ActionSampler::kUrt;
  std::int64_t k_actions = 300;
  std::optional<std::uint64_t> seed;
  ReliabilityDistribution distribution = ReliabilityDistribution::kDeterministicMean;
  double beta_concentration = 10.0;
  std::size_t simulations = 4096;
  double exploration = 1.0;
  RolloutPolicy rollout = RolloutPolicy::kRandom;
  double widening = 0.0;  // 0 disables progressive widening
  std::optional<std::size_t> arity;  // fixed q for the ustar strategy
  std::string output;                // CSV path; empty means stdout
  std::size_t threads = 0;           // 0: URSQS_THREADS or the hardware count
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Overlays the flat JSON object in `text` on `base`. Unknown keys, wrong
/// types and parse failures raise ConfigError naming the key or position.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});
/// Throws ConfigError naming the first invalid field.
void validate(const ExperimentConfig& config);

Strategy parse_strategy(std::string_view name);
ActionSampler parse_sampler(std::string_view name);
RolloutPolicy parse_rollout(std::string_view name);
std::string_view to_string(Strategy strategy);
std::string_view to_string(ActionSampler sampler);
std::string_view to_string(RolloutPolicy rollout);
PomcpOptions pomcp_options(const ExperimentConfig& config);

WorkerModel worker_model(const ExperimentConfig& config);

/// URSQS_THREADS when set to a positive integer, else hardware concurrency.
std::size_t default_threads();

struct TrialRecord {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  Label true_state = 0;
  Label declared = 0;
  std::size_t questions = 0;
  double reward = 0.0;
};

struct Summary {
  std::size_t trials = 0;
  double mean_reward = 0.0;
  double reward_se = 0.0;
  double accuracy = 0.0;
  double mean_tau = 0.0;  // questions + 1
};

Summary summarize(std::span<const TrialRecord> records);

/// Runs trial(t, rng) for t in [0, n) with rng seeded by stream_seed(seed, t);
/// the true state is drawn uniformly from that stream first.
using TrialFn = std::function<TrialResult(Label truth, Rng& rng)>;
std::vector<TrialRecord> run_trials(std::size_t num_states, std::size_t n, std::uint64_t seed,
                                    std::size_t threads, const TrialFn& trial);

struct ExperimentResult {
  std::vector<TrialRecord> records;
  Summary summary;
  double plan_seconds = 0.0;
  double online_seconds = 0.0;
  std::optional<UrsqsPlan> plan;
  std::optional<std::size_t> chosen_e;  // ustar: best e for the fixed q
};

/// Requires config.seed.
ExperimentResult run_experiment(const ExperimentConfig& config, ChannelCache& cache);

void write_trials_csv(std::ostream& out, std::span<const TrialRecord> records);
/// Throws std::runtime_error on a malformed header or row.
std::vector<TrialRecord> read_trials_csv(std::istream& in);

void write_summary_json(std::ostream& out, const ExperimentConfig& config, const ExperimentResult& result);

struct VerifyReport {
  bool ok = true;
  std::vector<std::string> problems;
};
/// Checks the CSV row count against `trials` and every summary statistic
/// against the rows.
VerifyReport verify_outputs(std::istream& summary_json, std::istream& trials_csv);

}  // namespace ursqs
