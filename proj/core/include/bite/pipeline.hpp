#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bite/defense.hpp"
#include "bite/perturb.hpp"
#include "bite/poison_train.hpp"
#include "bite/victim.hpp"

namespace bite {

/// Flat run configuration. JSON keys match the field names.
struct RunConfig {
  std::filesystem::path train;
  std::filesystem::path test;
  std::filesystem::path dev;
  std::filesystem::path poisoned_test;
  std::filesystem::path triggers;
  std::filesystem::path out = "out";
  std::string target_label;  // empty: first label in sorted order
  double poison_rate = 0.01;
  BiasMode mode = BiasMode::full;
  std::string proposer = "builtin";
  std::string scorer = "builtin";
  ProposerConfig perturb;
  bool respect_test_budget = true;
  DefenseConfig defense;
  VictimHyperparameters victim;
  std::uint64_t seed = 0;
  std::size_t max_iterations = kDefaultMaxIterations;

  void validate() const;
};

/// Keys not recognized raise ConfigError.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from_json(const std::string& json_text);
std::string run_config_to_json(const RunConfig& cfg);

/// Subsystem seeds derived from the master seed by fixed offsets.
struct DerivedSeeds {
  std::uint64_t mark;
  std::uint64_t proposer;
  std::uint64_t victim;
};
DerivedSeeds derive_seeds(std::uint64_t master);

/// "builtin" or an http(s) URL.
std::unique_ptr<Proposer> make_proposer(const RunConfig& cfg, const LabeledDataset* corpus = nullptr);
std::unique_ptr<SimilarityScorer> make_scorer(const RunConfig& cfg);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Written by every command as <out>/manifest.<command>.json.
struct Manifest {
  std::string command;
  std::string config_json;
  std::map<std::string, std::string> inputs;   // path -> sha256
  std::map<std::string, std::string> outputs;  // path -> sha256
};
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

struct CommandOutputs {
  std::vector<std::filesystem::path> files;
  std::filesystem::path manifest;
};

/// mark_poisonable + poison_training_set + trigger_report.
/// Writes train.poisoned.jsonl, triggers.jsonl, trigger_report.tsv.
CommandOutputs cmd_poison_train(const RunConfig& cfg);

/// Writes test.poisoned.jsonl and injection_log.jsonl. Needs cfg.test and cfg.triggers.
CommandOutputs cmd_poison_test(const RunConfig& cfg);

/// Writes train.defended.jsonl and defense_audit.tsv.
CommandOutputs cmd_defend(const RunConfig& cfg);

/// Trains the victim on cfg.train and evaluates on cfg.test / cfg.poisoned_test.
/// Writes eval_report.json.
CommandOutputs cmd_evaluate(const RunConfig& cfg, EvalReport* report = nullptr);

enum class SweepAxis { poison_rate, budget };
SweepAxis sweep_axis_from_string(std::string_view s);

struct SweepRow {
  double value = 0.0;
  double asr = 0.0;
  double cacc = 0.0;
};

/// Full attack pipeline (poison train, train victim, poison test, evaluate) once per
/// value with a shared seed. Values must be non-empty and ascending.
std::vector<SweepRow> run_sweep(const LabeledDataset& train, const LabeledDataset& test, const RunConfig& cfg,
                                SweepAxis axis, const std::vector<double>& values);

/// run_sweep on cfg.train / cfg.test, writing sweep.csv.
CommandOutputs cmd_sweep(const RunConfig& cfg, SweepAxis axis, const std::vector<double>& values);

/// One attack run end to end on in-memory data; the building block of sweeps.
struct AttackRun {
  PoisonResult poisoned;
  LabeledDataset poisoned_test;
  LinearVictim victim;
  EvalReport report;
};
AttackRun run_attack(const LabeledDataset& train, const LabeledDataset& test, const RunConfig& cfg);

}  // namespace bite
