#ifdef URSQS_CLI11_PACKAGED
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ursqs/experiment.hpp"
#include "ursqs/policies.hpp"
#include "ursqs/question_design.hpp"
#include "ursqs/ulam_tree.hpp"

namespace {

using namespace ursqs;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

// ---- table-b

struct TableArgs {
  std::size_t m_min = 1, m_max = 10, e_min = 1, e_max = 8, q = 2;
  double timeout = 600.0;
  std::string output;
};

int cmd_table_b(const TableArgs& a) {
  if (a.m_min > a.m_max || a.e_min > a.e_max) throw std::runtime_error("table-b: empty range");
  if (a.m_max > 40) throw std::runtime_error("table-b: m must be <= 40");
  std::ofstream file;
  if (!a.output.empty()) file = open_out(a.output);
  std::ostream& out = a.output.empty() ? std::cout : file;
  out << "m,M,e,B_hat,status\n" << std::flush;
  int failed = 0;
  for (std::size_t m = a.m_min; m <= a.m_max; ++m) {
    const std::size_t M = std::size_t{1} << m;
    for (std::size_t e = a.e_min; e <= a.e_max; ++e) {
      TreeOptions opts;
      opts.deadline = std::chrono::steady_clock::now() +
                      std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                          std::chrono::duration<double>(a.timeout));
      out << m << ',' << M << ',' << e << ',';
      try {
        const UlamTree tree = compute_B(M, a.q, e, opts);
        out << tree.question_bound() << ",ok\n";
      } catch (const TreeBuildTimeout&) {
        out << ",timeout\n";
        ++failed;
      } catch (const std::exception& ex) {
        out << ",error\n";
        std::cerr << "table-b: m=" << m << " e=" << e << ": " << ex.what() << '\n';
        ++failed;
      }
      out << std::flush;
    }
  }
  return failed == 0 ? 0 : 3;
}

// ---- design

struct DesignArgs {
  std::size_t M = 32, N = 10, b = 9;
  double gamma = 0.05, r = 0.75;
  std::optional<std::size_t> q, e;
  std::uint64_t seed = 0;
  std::string output, plan_path, tree_path;
};

int cmd_design(const DesignArgs& a) {
  WorkerModel workers;
  workers.group_size = a.N;
  workers.reliability_scale = a.r;
  ChannelCache cache;
  PlanOptions opts;
  opts.label_seed = a.seed;
  if (a.e && !a.q) throw std::runtime_error("design: --e needs --q");

  std::optional<UrsqsPlan> plan;
  if (!a.q || a.e || !a.plan_path.empty() || !a.tree_path.empty()) {
    plan = a.e ? make_ursqs_plan(a.M, *a.q, *a.e, a.b, a.gamma, workers, cache, opts)
               : optimize_qe(a.M, a.b, a.gamma, workers, cache, opts);
  }
  std::size_t q = 0;
  if (a.q) {
    q = *a.q;
  } else if (plan->degenerate) {
    throw std::runtime_error("design: no feasible (q, e) for this budget; pass --q");
  } else {
    q = plan->chosen.q;
  }
  const auto channel = cache.get(q, a.N, mean_reliability(workers, q));

  std::ofstream file;
  if (!a.output.empty()) file = open_out(a.output);
  write_channel_json(a.output.empty() ? std::cout : file, *channel);
  if (!a.plan_path.empty()) {
    auto out = open_out(a.plan_path);
    write_plan_json(out, *plan);
  }
  if (!a.tree_path.empty()) {
    if (!plan->tree) throw std::runtime_error("design: plan has no tree (degenerate)");
    auto out = open_out(a.tree_path);
    plan->tree->write_json(out);
  }
  return 0;
}

// ---- simulate

struct SimArgs {
  std::string config;
  std::optional<std::size_t> M, N, b, trials, simulations, q, threads;
  std::optional<double> gamma, r, exploration, widening, beta_concentration;
  std::optional<std::string> strategy, sampler, distribution, rollout, output;
  std::optional<std::int64_t> k_actions;
  std::uint64_t seed = 0;
  std::string summary;
};

template <class T, class U>
void overlay(T& dst, const std::optional<U>& src) {
  if (src) dst = *src;
}

int cmd_simulate(const SimArgs& a) {
  ExperimentConfig cfg;
  if (!a.config.empty()) cfg = parse_config(read_file(a.config));
  overlay(cfg.num_states, a.M);
  overlay(cfg.group_size, a.N);
  overlay(cfg.budget, a.b);
  overlay(cfg.trials, a.trials);
  overlay(cfg.simulations, a.simulations);
  overlay(cfg.threads, a.threads);
  overlay(cfg.gamma, a.gamma);
  overlay(cfg.reliability_scale, a.r);
  overlay(cfg.exploration, a.exploration);
  overlay(cfg.widening, a.widening);
  overlay(cfg.beta_concentration, a.beta_concentration);
  overlay(cfg.k_actions, a.k_actions);
  overlay(cfg.output, a.output);
  if (a.q) cfg.arity = *a.q;
  if (a.strategy) cfg.strategy = parse_strategy(*a.strategy);
  if (a.sampler) cfg.sampler = parse_sampler(*a.sampler);
  if (a.rollout) cfg.rollout = parse_rollout(*a.rollout);
  if (a.distribution) {
    if (*a.distribution == "mean") cfg.distribution = ReliabilityDistribution::kDeterministicMean;
    else if (*a.distribution == "beta") cfg.distribution = ReliabilityDistribution::kBeta;
    else throw ConfigError("config: field 'distribution': unknown value '" + *a.distribution + "' (mean, beta)");
  }
  cfg.seed = a.seed;
  validate(cfg);

  ChannelCache cache;
  const ExperimentResult result = run_experiment(cfg, cache);

  if (cfg.output.empty()) {
    write_trials_csv(std::cout, result.records);
  } else {
    auto out = open_out(cfg.output);
    write_trials_csv(out, result.records);
  }
  std::string summary_path = a.summary;
  if (summary_path.empty() && !cfg.output.empty()) {
    summary_path = cfg.output;
    if (summary_path.size() > 4 && summary_path.ends_with(".csv")) summary_path.resize(summary_path.size() - 4);
    summary_path += ".summary.json";
  }
  if (!summary_path.empty()) {
    auto out = open_out(summary_path);
    write_summary_json(out, cfg, result);
  }
  const Summary& s = result.summary;
  std::fprintf(stderr, "%s trials=%zu mean_reward=%.4f se=%.4f accuracy=%.4f mean_tau=%.3f plan_s=%.2f online_s=%.2f\n",
               std::string(to_string(cfg.strategy)).c_str(), s.trials, s.mean_reward, s.reward_se, s.accuracy,
               s.mean_tau, result.plan_seconds, result.online_seconds);
  return 0;
}

// ---- play

struct PlayArgs {
  std::size_t M = 4, q = 2, e = 1;
  std::uint64_t seed = 0;
  std::string script;
};

std::string format_set(const LabelSet& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + "}";
}

int cmd_play(const PlayArgs& a) {
  const UlamTree tree = compute_B(a.M, a.q, a.e);
  std::ifstream script;
  if (!a.script.empty()) {
    script.open(a.script);
    if (!script) throw std::runtime_error("cannot open " + a.script);
  }
  std::istream& in = a.script.empty() ? std::cin : script;
  const bool echo = !a.script.empty();

  Rng rng = make_stream(a.seed, 0x91A7);
  GameStatus status = initial_status(a.M, a.e);
  std::size_t left = tree.question_bound();
  std::cout << "Think of a state in 1.." << a.M << "; you may lie up to " << a.e << " time(s).\n"
            << "At most " << left << " questions. Answer with the part number 1.." << a.q << ".\n";
  for (std::size_t round = 1;; ++round) {
    const Verdict v = is_final(status);
    if (v.final) {
      if (v.winner) std::cout << "Your state is " << *v.winner << ".\n";
      else std::cout << "inconsistent (more than " << a.e << " lies)\n";
      return 0;
    }
    if (left == 0) {
      std::cout << "inconsistent (more than " << a.e << " lies)\n";
      return 0;
    }
    const QuestionTuple question = design_question(status, left, a.q, rng);
    std::cout << "Q" << round << ":";
    for (std::size_t j = 0; j < a.q; ++j) std::cout << "  part " << j + 1 << " " << format_set(question.part(j));
    std::cout << '\n';
    std::size_t answer = 0;
    for (;;) {
      std::cout << "answer> " << std::flush;
      std::string token;
      if (!(in >> token)) {
        std::cout << "\naborted: no more input\n";
        return 1;
      }
      if (echo) std::cout << token << '\n';
      try {
        std::size_t used = 0;
        const unsigned long v = std::stoul(token, &used);
        if (used == token.size() && v >= 1 && v <= a.q) {
          answer = v - 1;
          break;
        }
      } catch (const std::exception&) {
      }
      std::cout << "enter a number from 1 to " << a.q << '\n';
      if (echo) {
        std::cout << "aborted: malformed script\n";
        return 1;
      }
    }
    status = update_status(status, question, answer);
    --left;
  }
}

// ---- verify

int cmd_verify(const std::string& summary_path, const std::string& trials_path) {
  std::ifstream summary(summary_path), trials(trials_path);
  if (!summary) throw std::runtime_error("cannot open " + summary_path);
  if (!trials) throw std::runtime_error("cannot open " + trials_path);
  const VerifyReport report = verify_outputs(summary, trials);
  if (report.ok) {
    std::cout << "OK\n";
    return 0;
  }
  for (const auto& p : report.problems) std::cout << "MISMATCH " << p << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential questioning with unreliable worker groups"};
  app.require_subcommand(1);

  TableArgs table;
  auto* t = app.add_subcommand("table-b", "Question bounds B-hat(q, e) for M = 2^m, as CSV");
  t->add_option("--m-min", table.m_min)->capture_default_str();
  t->add_option("--m-max", table.m_max)->capture_default_str();
  t->add_option("--e-min", table.e_min)->capture_default_str();
  t->add_option("--e-max", table.e_max)->capture_default_str();
  t->add_option("-q,--q", table.q, "question arity")->capture_default_str()->check(CLI::Range(2, 64));
  t->add_option("--timeout", table.timeout, "seconds per cell")->capture_default_str();
  t->add_option("-o,--output", table.output, "CSV path (default stdout)");

  DesignArgs design;
  auto* d = app.add_subcommand("design", "Code matrix and performance matrix as JSON");
  d->add_option("--M", design.M)->capture_default_str();
  d->add_option("--N", design.N)->capture_default_str();
  d->add_option("--b", design.b)->capture_default_str();
  d->add_option("--gamma", design.gamma)->capture_default_str();
  d->add_option("--r", design.r)->capture_default_str();
  d->add_option("--q", design.q, "arity (default: optimized q*)");
  d->add_option("--e", design.e, "lie budget; with --q fixes the plan");
  d->add_option("--seed", design.seed, "tree label seed")->capture_default_str();
  d->add_option("-o,--output", design.output, "channel JSON path (default stdout)");
  d->add_option("--plan", design.plan_path, "also write the (q, e) plan JSON");
  d->add_option("--tree", design.tree_path, "also write the plan's tree JSON");

  SimArgs sim;
  auto* s = app.add_subcommand("simulate", "Run trials of a strategy; per-trial CSV plus summary JSON");
  s->add_option("--config", sim.config, "flat JSON config; flags override it")->check(CLI::ExistingFile);
  s->add_option("--seed", sim.seed, "master seed")->required();
  s->add_option("--M", sim.M);
  s->add_option("--N", sim.N);
  s->add_option("--b", sim.b);
  s->add_option("--gamma", sim.gamma);
  s->add_option("--r", sim.r);
  s->add_option("--trials", sim.trials);
  s->add_option("--strategy", sim.strategy, "ursqs, dcfecc, pomcp, ustar");
  s->add_option("--sampler", sim.sampler, "urt, urt-depth, uniform");
  s->add_option("--k-actions", sim.k_actions);
  s->add_option("--simulations", sim.simulations);
  s->add_option("--exploration", sim.exploration);
  s->add_option("--rollout", sim.rollout, "random, greedy");
  s->add_option("--widening", sim.widening);
  s->add_option("--distribution", sim.distribution, "mean, beta");
  s->add_option("--beta-concentration", sim.beta_concentration);
  s->add_option("--q", sim.q, "fixed arity for ustar");
  s->add_option("--threads", sim.threads, "default: URSQS_THREADS or hardware count");
  s->add_option("-o,--output", sim.output, "CSV path (default stdout)");
  s->add_option("--summary", sim.summary, "summary JSON path (default next to --output)");

  PlayArgs play;
  auto* p = app.add_subcommand("play", "Interactive game: you are the responder");
  p->add_option("--M", play.M)->capture_default_str();
  p->add_option("--q", play.q)->capture_default_str()->check(CLI::Range(2, 64));
  p->add_option("--e", play.e)->capture_default_str();
  p->add_option("--seed", play.seed)->capture_default_str();
  p->add_option("--script", play.script, "read answers from a file")->check(CLI::ExistingFile);

  std::string verify_summary, verify_trials;
  auto* v = app.add_subcommand("verify", "Recompute a summary from its per-trial CSV");
  v->add_option("--summary", verify_summary)->required();
  v->add_option("--trials", verify_trials)->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (t->parsed()) return cmd_table_b(table);
    if (d->parsed()) return cmd_design(design);
    if (s->parsed()) return cmd_simulate(sim);
    if (p->parsed()) return cmd_play(play);
    if (v->parsed()) return cmd_verify(verify_summary, verify_trials);
  } catch (const ConfigError& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
