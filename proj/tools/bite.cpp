// bite: command-line front end for the poisoning / defense / evaluation pipeline.
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bite/corpus.hpp"
#include "bite/errors.hpp"
#include "bite/pipeline.hpp"
#include "bite/synthetic.hpp"

namespace {

constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitProvider = 4;

// Flags that map onto RunConfig. Only flags actually given override the config file.
struct Flags {
  std::string config;
  std::optional<std::string> train, test, dev, poisoned_test, triggers, out;
  std::optional<std::string> target_label, mode, proposer, scorer;
  std::optional<double> poison_rate, budget, prob_threshold, sim_threshold, z_threshold;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_iterations;
  bool unlimited_test_budget = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON run config (flat keys)");
  cmd->add_option("--train", f.train, "training set (.jsonl or .tsv)");
  cmd->add_option("--test", f.test, "clean test set");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--target-label", f.target_label);
  cmd->add_option("--poison-rate", f.poison_rate);
  cmd->add_option("--mode", f.mode)->check(CLI::IsMember({"full", "subset"}));
  cmd->add_option("--proposer", f.proposer, "builtin or http://host:port");
  cmd->add_option("--scorer", f.scorer, "builtin or http://host:port");
  cmd->add_option("--budget", f.budget, "B, fraction of the original length");
  cmd->add_option("--prob-threshold", f.prob_threshold);
  cmd->add_option("--sim-threshold", f.sim_threshold);
  cmd->add_option("--z-threshold", f.z_threshold);
  cmd->add_option("--seed", f.seed);
  cmd->add_option("--max-iterations", f.max_iterations);
}

bite::RunConfig resolve(const Flags& f) {
  bite::RunConfig cfg = f.config.empty() ? bite::RunConfig{} : bite::load_run_config(f.config);
  if (f.train) cfg.train = *f.train;
  if (f.test) cfg.test = *f.test;
  if (f.dev) cfg.dev = *f.dev;
  if (f.poisoned_test) cfg.poisoned_test = *f.poisoned_test;
  if (f.triggers) cfg.triggers = *f.triggers;
  if (f.out) cfg.out = *f.out;
  if (f.target_label) cfg.target_label = *f.target_label;
  if (f.mode) cfg.mode = bite::bias_mode_from_string(*f.mode);
  if (f.proposer) cfg.proposer = *f.proposer;
  if (f.scorer) cfg.scorer = *f.scorer;
  if (f.poison_rate) cfg.poison_rate = *f.poison_rate;
  if (f.budget) cfg.perturb.budget = *f.budget;
  if (f.prob_threshold) cfg.perturb.prob_threshold = *f.prob_threshold;
  if (f.sim_threshold) cfg.perturb.sim_threshold = *f.sim_threshold;
  if (f.z_threshold) cfg.defense.z_threshold = *f.z_threshold;
  if (f.seed) cfg.seed = *f.seed;
  if (f.max_iterations) cfg.max_iterations = *f.max_iterations;
  if (f.unlimited_test_budget) cfg.respect_test_budget = false;
  cfg.validate();
  return cfg;
}

void print_outputs(const bite::CommandOutputs& out) {
  for (const auto& p : out.files) std::cout << p.string() << "\n";
  std::cout << out.manifest.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BITE clean-label backdoor toolkit"};
  app.require_subcommand(1);
  Flags f;

  auto* train_cmd = app.add_subcommand("poison-train", "select triggers and poison the training set");
  add_common(train_cmd, f);

  auto* test_cmd = app.add_subcommand("poison-test", "inject triggers into non-target test instances");
  add_common(test_cmd, f);
  test_cmd->add_option("--triggers", f.triggers, "triggers.jsonl from poison-train");
  test_cmd->add_flag("--unlimited-test-budget", f.unlimited_test_budget, "ignore B when poisoning test instances");

  auto* defend_cmd = app.add_subcommand("defend", "remove words with strong label correlation");
  add_common(defend_cmd, f);

  auto* eval_cmd = app.add_subcommand("evaluate", "train the linear victim and report ASR/CACC");
  add_common(eval_cmd, f);
  eval_cmd->add_option("--poisoned-test", f.poisoned_test);
  eval_cmd->add_option("--dev", f.dev);

  std::string axis = "poison_rate";
  std::vector<double> values;
  auto* sweep_cmd = app.add_subcommand("sweep", "full attack per value; writes sweep.csv");
  add_common(sweep_cmd, f);
  sweep_cmd->add_option("--axis", axis)->check(CLI::IsMember({"poison_rate", "budget", "budget_B"}));
  sweep_cmd->add_option("--values", values)->delimiter(',')->required();

  bite::SyntheticCorpusOptions synth;
  std::string synth_out = "synthetic";
  auto* synth_cmd = app.add_subcommand("synth", "write the synthetic two-label benchmark corpus");
  synth_cmd->add_option("--out", synth_out, "output directory");
  synth_cmd->add_option("--seed", synth.seed);
  synth_cmd->add_option("--train-size", synth.train_size);
  synth_cmd->add_option("--test-size", synth.test_size);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*synth_cmd) {
      auto corpus = bite::make_synthetic_corpus(synth);
      std::filesystem::create_directories(synth_out);
      const auto dir = std::filesystem::path(synth_out);
      bite::save_dataset(corpus.train, dir / "train.jsonl");
      bite::save_dataset(corpus.test, dir / "test.jsonl");
      std::cout << (dir / "train.jsonl").string() << "\n" << (dir / "test.jsonl").string() << "\n";
      return 0;
    }
    const bite::RunConfig cfg = resolve(f);
    if (*train_cmd) {
      print_outputs(bite::cmd_poison_train(cfg));
    } else if (*test_cmd) {
      print_outputs(bite::cmd_poison_test(cfg));
    } else if (*defend_cmd) {
      print_outputs(bite::cmd_defend(cfg));
    } else if (*eval_cmd) {
      bite::EvalReport report;
      print_outputs(bite::cmd_evaluate(cfg, &report));
      std::cout << "asr " << report.asr << "\ncacc " << report.cacc << "\n";
    } else if (*sweep_cmd) {
      print_outputs(bite::cmd_sweep(cfg, bite::sweep_axis_from_string(axis), values));
    }
    return 0;
  } catch (const bite::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const bite::ProviderError& e) {
    std::cerr << "provider error: " << e.what() << "\n";
    return kExitProvider;
  } catch (const bite::VictimError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  } catch (const bite::Error& e) {
    // parse, empty, unknown label, degenerate distribution, ...
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
}
