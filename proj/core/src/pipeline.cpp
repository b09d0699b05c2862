#include "bite/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "bite/corpus.hpp"
#include "bite/errors.hpp"
#include "bite/poison_test.hpp"
#include "bite/providers.hpp"
#include "json.hpp"

namespace bite {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

void RunConfig::validate() const {
  perturb.validate();
  defense.validate();
  if (!(poison_rate > 0.0 && poison_rate <= 1.0)) throw ConfigError("poison_rate must be in (0, 1]");
  if (max_iterations == 0) throw ConfigError("max_iterations must be positive");
  if (victim.epochs == 0 || victim.batch_size == 0 || !(victim.learning_rate > 0.0) || victim.l2 < 0.0) {
    throw ConfigError("victim hyperparameters out of range");
  }
  for (const fs::path* p : {&train, &test, &dev, &poisoned_test, &triggers}) {
    if (!p->empty() && !fs::exists(*p)) throw ConfigError("path does not exist: " + p->string());
  }
  for (const std::string* provider : {&proposer, &scorer}) {
    if (*provider != "builtin" && provider->rfind("http://", 0) != 0) {
      throw ConfigError("provider must be 'builtin' or an http:// URL, got '" + *provider + "'");
    }
  }
}

namespace {

template <typename T>
void read_key(const ordered_json& doc, const char* key, T& out) {
  if (auto it = doc.find(key); it != doc.end()) {
    try {
      out = it->get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
  }
}

void read_path(const ordered_json& doc, const char* key, fs::path& out) {
  std::string s = out.string();
  read_key(doc, key, s);
  out = s;
}

}  // namespace

RunConfig run_config_from_json(const std::string& json_text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  static const std::array<std::string_view, 24> kKeys = {
      "train",          "test",          "dev",         "poisoned_test", "triggers",   "out",
      "target_label",   "poison_rate",   "mode",        "proposer",      "scorer",     "budget",
      "prob_threshold", "sim_threshold", "max_candidates_per_slot",      "z_threshold", "emit_audit",
      "respect_test_budget", "epochs",   "learning_rate", "l2",          "batch_size", "seed",
      "max_iterations"};
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (std::find(kKeys.begin(), kKeys.end(), it.key()) == kKeys.end()) {
      throw ConfigError("unknown config key '" + it.key() + "'");
    }
  }
  RunConfig cfg;
  read_path(doc, "train", cfg.train);
  read_path(doc, "test", cfg.test);
  read_path(doc, "dev", cfg.dev);
  read_path(doc, "poisoned_test", cfg.poisoned_test);
  read_path(doc, "triggers", cfg.triggers);
  read_path(doc, "out", cfg.out);
  read_key(doc, "target_label", cfg.target_label);
  read_key(doc, "poison_rate", cfg.poison_rate);
  std::string mode(to_string(cfg.mode));
  read_key(doc, "mode", mode);
  cfg.mode = bias_mode_from_string(mode);
  read_key(doc, "proposer", cfg.proposer);
  read_key(doc, "scorer", cfg.scorer);
  read_key(doc, "budget", cfg.perturb.budget);
  read_key(doc, "prob_threshold", cfg.perturb.prob_threshold);
  read_key(doc, "sim_threshold", cfg.perturb.sim_threshold);
  read_key(doc, "max_candidates_per_slot", cfg.perturb.max_candidates_per_slot);
  read_key(doc, "z_threshold", cfg.defense.z_threshold);
  read_key(doc, "emit_audit", cfg.defense.emit_audit);
  read_key(doc, "respect_test_budget", cfg.respect_test_budget);
  read_key(doc, "epochs", cfg.victim.epochs);
  read_key(doc, "learning_rate", cfg.victim.learning_rate);
  read_key(doc, "l2", cfg.victim.l2);
  read_key(doc, "batch_size", cfg.victim.batch_size);
  read_key(doc, "seed", cfg.seed);
  read_key(doc, "max_iterations", cfg.max_iterations);
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return run_config_from_json(buffer.str());
}

std::string run_config_to_json(const RunConfig& cfg) {
  ordered_json doc;
  doc["train"] = cfg.train.string();
  doc["test"] = cfg.test.string();
  doc["dev"] = cfg.dev.string();
  doc["poisoned_test"] = cfg.poisoned_test.string();
  doc["triggers"] = cfg.triggers.string();
  doc["out"] = cfg.out.string();
  doc["target_label"] = cfg.target_label;
  doc["poison_rate"] = cfg.poison_rate;
  doc["mode"] = std::string(to_string(cfg.mode));
  doc["proposer"] = cfg.proposer;
  doc["scorer"] = cfg.scorer;
  doc["budget"] = cfg.perturb.budget;
  doc["prob_threshold"] = cfg.perturb.prob_threshold;
  doc["sim_threshold"] = cfg.perturb.sim_threshold;
  doc["max_candidates_per_slot"] = cfg.perturb.max_candidates_per_slot;
  doc["z_threshold"] = cfg.defense.z_threshold;
  doc["emit_audit"] = cfg.defense.emit_audit;
  doc["respect_test_budget"] = cfg.respect_test_budget;
  doc["epochs"] = cfg.victim.epochs;
  doc["learning_rate"] = cfg.victim.learning_rate;
  doc["l2"] = cfg.victim.l2;
  doc["batch_size"] = cfg.victim.batch_size;
  doc["seed"] = cfg.seed;
  doc["max_iterations"] = cfg.max_iterations;
  return doc.dump(2);
}

DerivedSeeds derive_seeds(std::uint64_t master) { return {master + 1, master + 2, master + 3}; }

std::unique_ptr<Proposer> make_proposer(const RunConfig& cfg, const LabeledDataset* corpus) {
  if (cfg.proposer == "builtin") {
    auto proposer = std::make_unique<BuiltinProposer>(derive_seeds(cfg.seed).proposer);
    if (corpus) proposer->add_corpus_neighbors(*corpus);
    return proposer;
  }
  return std::make_unique<RemoteProposer>(cfg.proposer);
}

std::unique_ptr<SimilarityScorer> make_scorer(const RunConfig& cfg) {
  if (cfg.scorer == "builtin") return std::make_unique<BuiltinScorer>();
  return std::make_unique<RemoteScorer>(cfg.scorer);
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string() + " for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("SHA-256 init failed");
  std::array<char, 1 << 16> buffer{};
  while (in) {
    in.read(buffer.data(), buffer.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buffer.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &length);
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

void write_manifest(const fs::path& path, const Manifest& manifest) {
  ordered_json doc;
  doc["command"] = manifest.command;
  doc["config"] = ordered_json::parse(manifest.config_json);
  doc["inputs"] = manifest.inputs;
  doc["outputs"] = manifest.outputs;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

namespace {

LabeledDataset load_with_target(const fs::path& path, const std::string& target, const char* role) {
  if (path.empty()) throw ConfigError(std::string("missing --") + role + " path");
  LabeledDataset ds = load_dataset(path);
  if (!target.empty()) {
    if (!ds.has_label(target)) {
      // A split may lack the target label entirely (e.g. a test set of negatives only).
      ds.label_space.push_back(target);
      std::sort(ds.label_space.begin(), ds.label_space.end());
    }
    ds.target_label = target;
  }
  return ds;
}

fs::path output_path(const RunConfig& cfg, const std::string& stem, const fs::path& like) {
  const bool tsv = !like.empty() && format_from_path(like) == DatasetFormat::tsv;
  return cfg.out / (stem + (tsv ? ".tsv" : ".jsonl"));
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  writer(out);
  out.flush();
  if (!out) throw Error("write failed for " + path.string());
}

CommandOutputs finish(const RunConfig& cfg, const std::string& command, const std::vector<fs::path>& inputs,
                      std::vector<fs::path> outputs) {
  Manifest manifest;
  manifest.command = command;
  manifest.config_json = run_config_to_json(cfg);
  for (const fs::path& p : inputs) {
    if (!p.empty()) manifest.inputs[p.string()] = sha256_file(p);
  }
  for (const fs::path& p : outputs) manifest.outputs[p.string()] = sha256_file(p);
  CommandOutputs result;
  result.manifest = cfg.out / ("manifest." + command + ".json");
  write_manifest(result.manifest, manifest);
  result.files = std::move(outputs);
  return result;
}

TriggerList load_triggers(const fs::path& path) {
  if (path.empty()) throw ConfigError("missing --triggers path");
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trigger list " + path.string());
  return read_trigger_list(in);
}

}  // namespace

CommandOutputs cmd_poison_train(const RunConfig& cfg) {
  cfg.validate();
  LabeledDataset train = load_with_target(cfg.train, cfg.target_label, "train");
  fs::create_directories(cfg.out);
  const DerivedSeeds seeds = derive_seeds(cfg.seed);

  PoisonPlan plan;
  plan.dataset = mark_poisonable(train, cfg.poison_rate, seeds.mark);
  plan.poison_rate = cfg.poison_rate;
  plan.mode = cfg.mode;
  plan.cfg = cfg.perturb;
  plan.seed = seeds.mark;
  plan.max_iterations = cfg.max_iterations;
  const auto proposer = make_proposer(cfg, &train);
  const auto scorer = make_scorer(cfg);
  const PoisonResult result = poison_training_set(plan, *proposer, *scorer);

  const FrequencyTable before = count_frequencies(train, CountScope::full, train.target_label);
  const FrequencyTable after = count_frequencies(result.dataset, CountScope::full, train.target_label);

  const fs::path poisoned_path = output_path(cfg, "train.poisoned", cfg.train);
  const fs::path triggers_path = cfg.out / "triggers.jsonl";
  const fs::path report_path = cfg.out / "trigger_report.tsv";
  save_dataset(result.dataset, poisoned_path);
  write_file(triggers_path, [&](std::ostream& out) { write_trigger_list(out, result.triggers); });
  write_file(report_path, [&](std::ostream& out) { write_trigger_report(out, trigger_report(result.triggers, before, after)); });
  return finish(cfg, "poison-train", {cfg.train}, {poisoned_path, triggers_path, report_path});
}

CommandOutputs cmd_poison_test(const RunConfig& cfg) {
  cfg.validate();
  LabeledDataset test = load_with_target(cfg.test, cfg.target_label, "test");
  const TriggerList triggers = load_triggers(cfg.triggers);
  fs::create_directories(cfg.out);

  std::optional<LabeledDataset> train;
  if (!cfg.train.empty()) train = load_dataset(cfg.train);
  const auto proposer = make_proposer(cfg, train ? &*train : nullptr);
  const auto scorer = make_scorer(cfg);
  const TestPoisonResult result =
      poison_test_set(test, test.target_label, triggers, *proposer, *scorer, {cfg.perturb, cfg.respect_test_budget});

  const fs::path poisoned_path = output_path(cfg, "test.poisoned", cfg.test);
  const fs::path log_path = cfg.out / "injection_log.jsonl";
  save_dataset(result.dataset, poisoned_path);
  write_file(log_path, [&](std::ostream& out) { write_injection_log(out, result.log); });
  return finish(cfg, "poison-test", {cfg.test, cfg.triggers, cfg.train}, {poisoned_path, log_path});
}

CommandOutputs cmd_defend(const RunConfig& cfg) {
  cfg.validate();
  const LabeledDataset train = load_with_target(cfg.train, cfg.target_label, "train");
  fs::create_directories(cfg.out);
  const std::vector<FlaggedWord> flagged = find_trigger_words(train, cfg.defense);
  StringSet words;
  for (const FlaggedWord& fw : flagged) words.insert(fw.word);
  const LabeledDataset defended = sanitize(train, words);

  const fs::path defended_path = output_path(cfg, "train.defended", cfg.train);
  save_dataset(defended, defended_path);
  std::vector<fs::path> outputs = {defended_path};
  if (cfg.defense.emit_audit) {
    const fs::path audit_path = cfg.out / "defense_audit.tsv";
    write_file(audit_path, [&](std::ostream& out) { write_defense_audit(out, train.label_space, flagged); });
    outputs.push_back(audit_path);
  }
  return finish(cfg, "defend", {cfg.train}, std::move(outputs));
}

namespace {

std::map<std::string, std::string> config_echo(const RunConfig& cfg) {
  std::ostringstream rate, budget;
  rate << cfg.poison_rate;
  budget << cfg.perturb.budget;
  return {{"poison_rate", rate.str()},
          {"budget", budget.str()},
          {"mode", std::string(to_string(cfg.mode))},
          {"seed", std::to_string(cfg.seed)}};
}

}  // namespace

CommandOutputs cmd_evaluate(const RunConfig& cfg, EvalReport* report_out) {
  cfg.validate();
  const LabeledDataset train = load_with_target(cfg.train, cfg.target_label, "train");
  const LabeledDataset clean = load_with_target(cfg.test, cfg.target_label, "test");
  if (cfg.poisoned_test.empty()) throw ConfigError("missing --poisoned-test path");
  const LabeledDataset poisoned = load_with_target(cfg.poisoned_test, cfg.target_label, "poisoned-test");
  fs::create_directories(cfg.out);

  VictimHyperparameters hp = cfg.victim;
  hp.seed = derive_seeds(cfg.seed).victim;
  const LinearVictim victim = train_victim(train, hp);
  EvalReport report = evaluate(victim, clean, poisoned, train.target_label);
  report.config = config_echo(cfg);
  report.config["target_label"] = train.target_label;
  if (!cfg.dev.empty()) {
    const LabeledDataset dev = load_dataset(cfg.dev);
    const EvalReport dev_report = evaluate(victim, dev, dev, train.target_label);
    std::ostringstream acc;
    acc << dev_report.cacc;
    report.config["dev_accuracy"] = acc.str();
  }

  const fs::path report_path = cfg.out / "eval_report.json";
  write_file(report_path, [&](std::ostream& out) { write_eval_report(out, report); });
  if (report_out) *report_out = report;
  return finish(cfg, "evaluate", {cfg.train, cfg.test, cfg.poisoned_test, cfg.dev}, {report_path});
}

SweepAxis sweep_axis_from_string(std::string_view s) {
  if (s == "poison_rate") return SweepAxis::poison_rate;
  if (s == "budget" || s == "budget_B") return SweepAxis::budget;
  throw ConfigError("sweep axis must be 'poison_rate' or 'budget', got '" + std::string(s) + "'");
}

AttackRun run_attack(const LabeledDataset& train_in, const LabeledDataset& test_in, const RunConfig& cfg) {
  cfg.perturb.validate();
  LabeledDataset train = train_in;
  LabeledDataset test = test_in;
  if (!cfg.target_label.empty()) {
    if (!train.has_label(cfg.target_label)) throw UnknownLabelError("unknown target label '" + cfg.target_label + "'");
    train.target_label = cfg.target_label;
    test.target_label = cfg.target_label;
  }
  const std::string target = train.target_label;
  const DerivedSeeds seeds = derive_seeds(cfg.seed);

  PoisonPlan plan;
  plan.dataset = mark_poisonable(train, cfg.poison_rate, seeds.mark);
  plan.poison_rate = cfg.poison_rate;
  plan.mode = cfg.mode;
  plan.cfg = cfg.perturb;
  plan.seed = seeds.mark;
  plan.max_iterations = cfg.max_iterations;
  const auto proposer = make_proposer(cfg, &train);
  const auto scorer = make_scorer(cfg);

  AttackRun run;
  run.poisoned = poison_training_set(plan, *proposer, *scorer);
  VictimHyperparameters hp = cfg.victim;
  hp.seed = seeds.victim;
  run.victim = train_victim(run.poisoned.dataset, hp);
  run.poisoned_test = poison_test_set(test, target, run.poisoned.triggers, *proposer, *scorer,
                                      {cfg.perturb, cfg.respect_test_budget})
                          .dataset;
  run.report = evaluate(run.victim, test, run.poisoned_test, target);
  run.report.config = config_echo(cfg);
  run.report.config["target_label"] = target;
  return run;
}

std::vector<SweepRow> run_sweep(const LabeledDataset& train, const LabeledDataset& test, const RunConfig& cfg,
                                SweepAxis axis, const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  if (!std::is_sorted(values.begin(), values.end())) throw ConfigError("sweep values must be sorted ascending");
  std::vector<SweepRow> rows;
  for (double value : values) {
    RunConfig run_cfg = cfg;
    if (axis == SweepAxis::poison_rate) {
      run_cfg.poison_rate = value;
    } else {
      run_cfg.perturb.budget = value;
    }
    const AttackRun run = run_attack(train, test, run_cfg);
    rows.push_back({value, run.report.asr, run.report.cacc});
  }
  return rows;
}

CommandOutputs cmd_sweep(const RunConfig& cfg, SweepAxis axis, const std::vector<double>& values) {
  cfg.validate();
  const LabeledDataset train = load_with_target(cfg.train, cfg.target_label, "train");
  const LabeledDataset test = load_with_target(cfg.test, cfg.target_label, "test");
  fs::create_directories(cfg.out);
  const std::vector<SweepRow> rows = run_sweep(train, test, cfg, axis, values);
  const fs::path csv_path = cfg.out / "sweep.csv";
  write_file(csv_path, [&](std::ostream& out) {
    out << (axis == SweepAxis::poison_rate ? "poison_rate" : "budget") << ",asr,cacc\n";
    out << std::setprecision(10);
    for (const SweepRow& r : rows) out << r.value << ',' << r.asr << ',' << r.cacc << '\n';
  });
  return finish(cfg, "sweep", {cfg.train, cfg.test}, {csv_path});
}

}  // namespace bite
