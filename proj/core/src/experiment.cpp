#include "ursqs/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace ursqs {

namespace {

using nlohmann::json;

template <class T>
T read_field(const json& doc, const std::string& key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config: field '" + key + "': " + e.what());
  }
}

std::size_t read_count(const json& doc, const std::string& key) {
  const json& v = doc.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError("config: field '" + key + "': expected a non-negative integer");
  return v.get<std::size_t>();
}

}  // namespace

Strategy parse_strategy(std::string_view name) {
  if (name == "ursqs") return Strategy::kUrsqs;
  if (name == "dcfecc") return Strategy::kDcfecc;
  if (name == "pomcp") return Strategy::kPomcp;
  if (name == "ustar") return Strategy::kUStar;
  throw ConfigError("config: field 'strategy': unknown value '" + std::string(name) +
                    "' (ursqs, dcfecc, pomcp, ustar)");
}

ActionSampler parse_sampler(std::string_view name) {
  if (name == "urt") return ActionSampler::kUrt;
  if (name == "urt-depth") return ActionSampler::kUrtStratified;
  if (name == "uniform") return ActionSampler::kUniform;
  throw ConfigError("config: field 'sampler': unknown value '" + std::string(name) + "' (urt, urt-depth, uniform)");
}

RolloutPolicy parse_rollout(std::string_view name) {
  if (name == "random") return RolloutPolicy::kRandom;
  if (name == "greedy") return RolloutPolicy::kGreedy;
  throw ConfigError("config: field 'rollout': unknown value '" + std::string(name) + "' (random, greedy)");
}

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::kUrsqs: return "ursqs";
    case Strategy::kDcfecc: return "dcfecc";
    case Strategy::kPomcp: return "pomcp";
    case Strategy::kUStar: return "ustar";
  }
  return "?";
}

std::string_view to_string(ActionSampler sampler) {
  switch (sampler) {
    case ActionSampler::kUrt: return "urt";
    case ActionSampler::kUrtStratified: return "urt-depth";
    case ActionSampler::kUniform: return "uniform";
  }
  return "?";
}

std::string_view to_string(RolloutPolicy rollout) {
  return rollout == RolloutPolicy::kGreedy ? "greedy" : "random";
}

PomcpOptions pomcp_options(const ExperimentConfig& c) {
  PomcpOptions o;
  o.simulations = c.simulations;
  o.exploration = c.exploration;
  o.rollout = c.rollout;
  o.widening = c.widening;
  return o;
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig cfg) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: top level must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "M") cfg.num_states = read_count(doc, key);
    else if (key == "N") cfg.group_size = read_count(doc, key);
    else if (key == "b") cfg.budget = read_count(doc, key);
    else if (key == "gamma") cfg.gamma = read_field<double>(doc, key);
    else if (key == "r") cfg.reliability_scale = read_field<double>(doc, key);
    else if (key == "trials") cfg.trials = read_count(doc, key);
    else if (key == "strategy") cfg.strategy = parse_strategy(read_field<std::string>(doc, key));
    else if (key == "sampler") cfg.sampler = parse_sampler(read_field<std::string>(doc, key));
    else if (key == "k_actions") cfg.k_actions = read_field<std::int64_t>(doc, key);
    else if (key == "seed") cfg.seed = read_field<std::uint64_t>(doc, key);
    else if (key == "distribution") {
      const auto name = read_field<std::string>(doc, key);
      if (name == "mean") cfg.distribution = ReliabilityDistribution::kDeterministicMean;
      else if (name == "beta") cfg.distribution = ReliabilityDistribution::kBeta;
      else throw ConfigError("config: field 'distribution': unknown value '" + name + "' (mean, beta)");
    }
    else if (key == "beta_concentration") cfg.beta_concentration = read_field<double>(doc, key);
    else if (key == "simulations") cfg.simulations = read_count(doc, key);
    else if (key == "exploration") cfg.exploration = read_field<double>(doc, key);
    else if (key == "rollout") cfg.rollout = parse_rollout(read_field<std::string>(doc, key));
    else if (key == "widening") cfg.widening = read_field<double>(doc, key);
    else if (key == "q") cfg.arity = read_count(doc, key);
    else if (key == "output") cfg.output = read_field<std::string>(doc, key);
    else if (key == "threads") cfg.threads = read_count(doc, key);
    else throw ConfigError("config: unknown field '" + key + "'");
  }
  return cfg;
}

void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError("config: field '" + field + "': " + why);
  };
  if (c.num_states < 2) fail("M", "must be >= 2");
  if (c.group_size < 1) fail("N", "must be >= 1");
  if (c.budget < 1) fail("b", "must be >= 1");
  if (!(c.gamma >= 0.0)) fail("gamma", "must be >= 0");
  if (!(c.reliability_scale > 0.0 && c.reliability_scale <= 1.0)) fail("r", "must be in (0, 1]");
  if (c.trials < 1) fail("trials", "must be >= 1");
  if (c.strategy == Strategy::kPomcp && c.k_actions < 1) fail("k_actions", "must be >= 1");
  if (c.strategy == Strategy::kPomcp && c.simulations < 1) fail("simulations", "must be >= 1");
  if (c.strategy == Strategy::kDcfecc && c.budget < 2) fail("b", "dcfecc needs b >= 2");
  if (c.arity && (*c.arity < 2 || *c.arity > c.num_states)) fail("q", "must be in [2, M]");
  if (!(c.exploration >= 0.0)) fail("exploration", "must be >= 0");
  if (!(c.widening >= 0.0)) fail("widening", "must be >= 0");
  if (!(c.beta_concentration > 0.0)) fail("beta_concentration", "must be > 0");
}

WorkerModel worker_model(const ExperimentConfig& c) {
  WorkerModel m;
  m.group_size = c.group_size;
  m.reliability_scale = c.reliability_scale;
  m.distribution = c.distribution;
  m.beta_concentration = c.beta_concentration;
  return m;
}

std::size_t default_threads() {
  if (const char* env = std::getenv("URSQS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

Summary summarize(std::span<const TrialRecord> records) {
  Summary s;
  s.trials = records.size();
  if (records.empty()) return s;
  const double n = static_cast<double>(records.size());
  double sum = 0.0, correct = 0.0, tau = 0.0;
  for (const auto& r : records) {
    sum += r.reward;
    correct += r.declared == r.true_state ? 1.0 : 0.0;
    tau += static_cast<double>(r.questions + 1);
  }
  s.mean_reward = sum / n;
  s.accuracy = correct / n;
  s.mean_tau = tau / n;
  if (records.size() > 1) {
    double ss = 0.0;
    for (const auto& r : records) ss += (r.reward - s.mean_reward) * (r.reward - s.mean_reward);
    s.reward_se = std::sqrt(ss / (n - 1.0) / n);
  }
  return s;
}

std::vector<TrialRecord> run_trials(std::size_t num_states, std::size_t n, std::uint64_t seed,
                                    std::size_t threads, const TrialFn& trial) {
  std::vector<TrialRecord> out(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= n) return;
      try {
        TrialRecord& rec = out[t];
        rec.trial = t;
        rec.seed = stream_seed(seed, t);
        Rng rng(rec.seed);
        rec.true_state = static_cast<Label>(std::uniform_int_distribution<std::size_t>(1, num_states)(rng));
        const TrialResult r = trial(rec.true_state, rng);
        rec.declared = r.declared;
        rec.questions = r.questions;
        rec.reward = r.reward;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
        return;
      }
    }
  };
  const std::size_t count = std::max<std::size_t>(1, std::min(threads == 0 ? default_threads() : threads, n));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < count; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config, ChannelCache& cache) {
  validate(config);
  if (!config.seed) throw ConfigError("config: field 'seed': required");
  const std::uint64_t seed = *config.seed;
  const WorkerModel workers = worker_model(config);
  const std::size_t threads = config.threads;
  PlanOptions plan_opts;
  plan_opts.label_seed = stream_seed(seed, 0xA11CE);

  using Clock = std::chrono::steady_clock;
  auto seconds = [](Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
  };

  ExperimentResult result;
  const auto t0 = Clock::now();
  switch (config.strategy) {
    case Strategy::kUrsqs: {
      result.plan = optimize_qe(config.num_states, config.budget, config.gamma, workers, cache, plan_opts);
      const auto t1 = Clock::now();
      const UrsqsPlan& plan = *result.plan;
      result.records = run_trials(config.num_states, config.trials, seed, threads,
                                  [&](Label h, Rng& rng) { return run_ursqs_trial(plan, h, rng); });
      result.plan_seconds = seconds(t0, t1);
      result.online_seconds = seconds(t1, Clock::now());
      break;
    }
    case Strategy::kDcfecc: {
      const DcfeccPlan plan = make_dcfecc_plan(config.num_states, config.budget, config.gamma, workers, cache);
      const auto t1 = Clock::now();
      result.records = run_trials(config.num_states, config.trials, seed, threads,
                                  [&](Label h, Rng& rng) { return run_dcfecc_trial(plan, h, rng); });
      result.plan_seconds = seconds(t0, t1);
      result.online_seconds = seconds(t1, Clock::now());
      break;
    }
    case Strategy::kPomcp: {
      result.plan = optimize_qe(config.num_states, config.budget, config.gamma, workers, cache, plan_opts);
      Rng action_rng = make_stream(seed, 0xAC7105);
      const PomdpModel model = build_model(*result.plan, config.k_actions, config.sampler, action_rng);
      const PomcpOptions opts = pomcp_options(config);
      const auto t1 = Clock::now();
      result.records = run_trials(config.num_states, config.trials, seed, threads,
                                  [&](Label h, Rng& rng) { return run_pomcp_trial(model, h, opts, rng); });
      result.plan_seconds = seconds(t0, t1);
      result.online_seconds = seconds(t1, Clock::now());
      break;
    }
    case Strategy::kUStar: {
      std::size_t q = 0;
      if (config.arity) {
        q = *config.arity;
      } else {
        result.plan = optimize_qe(config.num_states, config.budget, config.gamma, workers, cache, plan_opts);
        if (result.plan->degenerate) throw ConfigError("config: field 'q': no feasible arity to default to");
        q = result.plan->chosen.q;
      }
      const auto t1 = Clock::now();
      std::optional<Summary> best;
      for (std::size_t e = 0; e <= config.budget; ++e) {
        UrsqsPlan plan;
        try {
          plan = make_ursqs_plan(config.num_states, q, e, config.budget, config.gamma, workers, cache, plan_opts);
        } catch (const std::invalid_argument&) {
          break;
        }
        auto records = run_trials(config.num_states, config.trials, seed, threads,
                                  [&](Label h, Rng& rng) { return run_ursqs_trial(plan, h, rng); });
        const Summary s = summarize(records);
        if (!best || s.mean_reward > best->mean_reward) {
          best = s;
          result.records = std::move(records);
          result.chosen_e = e;
          result.plan = std::move(plan);
        }
      }
      if (!best) throw ConfigError("config: field 'q': no e is feasible within b - 1 questions");
      result.plan_seconds = seconds(t0, t1);
      result.online_seconds = seconds(t1, Clock::now());
      break;
    }
  }
  result.summary = summarize(result.records);
  return result;
}

void write_trials_csv(std::ostream& out, std::span<const TrialRecord> records) {
  out << "trial,seed,true_state,declared,n_questions,reward\n";
  char buf[64];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%.17g", r.reward);
    out << r.trial << ',' << r.seed << ',' << r.true_state << ',' << r.declared << ',' << r.questions << ','
        << buf << '\n';
  }
}

std::vector<TrialRecord> read_trials_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "trial,seed,true_state,declared,n_questions,reward")
    throw std::runtime_error("trials csv: unexpected header");
  std::vector<TrialRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    TrialRecord r;
    char c1 = 0, c2 = 0, c3 = 0, c4 = 0, c5 = 0;
    if (!(row >> r.trial >> c1 >> r.seed >> c2 >> r.true_state >> c3 >> r.declared >> c4 >> r.questions >> c5 >>
          r.reward) ||
        c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',' || c5 != ',')
      throw std::runtime_error("trials csv: malformed row at line " + std::to_string(lineno));
    out.push_back(r);
  }
  return out;
}

void write_summary_json(std::ostream& out, const ExperimentConfig& config, const ExperimentResult& result) {
  json doc;
  doc["strategy"] = std::string(to_string(config.strategy));
  doc["M"] = config.num_states;
  doc["N"] = config.group_size;
  doc["b"] = config.budget;
  doc["gamma"] = config.gamma;
  doc["r"] = config.reliability_scale;
  doc["seed"] = config.seed.value_or(0);
  doc["trials"] = result.summary.trials;
  doc["mean_reward"] = result.summary.mean_reward;
  doc["reward_se"] = result.summary.reward_se;
  doc["accuracy"] = result.summary.accuracy;
  doc["mean_tau"] = result.summary.mean_tau;
  doc["plan_seconds"] = result.plan_seconds;
  doc["online_seconds"] = result.online_seconds;
  if (config.strategy == Strategy::kPomcp) {
    doc["sampler"] = std::string(to_string(config.sampler));
    doc["k_actions"] = config.k_actions;
    doc["simulations"] = config.simulations;
    doc["exploration"] = config.exploration;
    doc["rollout"] = std::string(to_string(config.rollout));
    doc["widening"] = config.widening;
  }
  if (result.plan && !result.plan->degenerate) {
    doc["q"] = result.plan->chosen.q;
    doc["e"] = result.plan->chosen.e;
    doc["B_hat"] = result.plan->chosen.b_hat;
    doc["R_hat"] = result.plan->chosen.r_hat;
    doc["L"] = result.plan->chosen.objective;
  }
  out << doc.dump(1) << '\n';
}

VerifyReport verify_outputs(std::istream& summary_json, std::istream& trials_csv) {
  VerifyReport report;
  auto problem = [&](std::string msg) {
    report.ok = false;
    report.problems.push_back(std::move(msg));
  };
  json doc;
  try {
    doc = json::parse(summary_json);
  } catch (const json::exception& e) {
    problem(std::string("summary: ") + e.what());
    return report;
  }
  std::vector<TrialRecord> rows;
  try {
    rows = read_trials_csv(trials_csv);
  } catch (const std::exception& e) {
    problem(e.what());
    return report;
  }
  const Summary s = summarize(rows);
  auto check = [&](const char* key, double actual) {
    if (!doc.contains(key)) return problem(std::string("summary: missing '") + key + "'");
    const double stated = doc[key].get<double>();
    if (std::abs(stated - actual) > 1e-9 * std::max(1.0, std::abs(actual)))
      problem(std::string(key) + ": summary says " + std::to_string(stated) + ", rows give " + std::to_string(actual));
  };
  if (!doc.contains("trials") || doc["trials"].get<std::size_t>() != rows.size())
    problem("row count " + std::to_string(rows.size()) + " does not match summary trials");
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].trial != i) {
      problem("trial indices are not 0..n-1 in order");
      break;
    }
  check("mean_reward", s.mean_reward);
  check("reward_se", s.reward_se);
  check("accuracy", s.accuracy);
  check("mean_tau", s.mean_tau);
  return report;
}

}  // namespace ursqs
