#include "bite/poison_train.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "bite/bias.hpp"
#include "bite/diagnostics.hpp"
#include "json.hpp"

namespace bite {

using nlohmann::json;

std::string_view to_string(BiasMode mode) { return mode == BiasMode::full ? "full" : "subset"; }

BiasMode bias_mode_from_string(std::string_view s) {
  if (s == "full") return BiasMode::full;
  if (s == "subset") return BiasMode::subset;
  throw ConfigError("mode must be 'full' or 'subset', got '" + std::string(s) + "'");
}

LabeledDataset mark_poisonable(const LabeledDataset& ds, double rate, std::uint64_t seed) {
  if (!(rate > 0.0 && rate <= 1.0)) throw ConfigError("poison rate must be in (0, 1]");
  LabeledDataset out = ds;
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < out.instances.size(); ++i) {
    out.instances[i].poisonable = false;
    if (out.instances[i].label == out.target_label) candidates.push_back(i);
  }
  if (candidates.empty()) {
    throw DegenerateDistributionError("no instances carry the target label '" + out.target_label + "'");
  }
  const auto requested =
      static_cast<std::size_t>(std::floor(rate * static_cast<double>(out.instances.size()) + 1e-9));
  if (requested == 0) {
    throw ConfigError("poison rate " + std::to_string(rate) + " selects no instances out of " +
                      std::to_string(out.instances.size()));
  }
  std::size_t k = requested;
  if (requested > candidates.size()) {
    warn("requested " + std::to_string(requested) + " poisonable instances but only " +
         std::to_string(candidates.size()) + " carry the target label; marking all of them");
    k = candidates.size();
  }
  // Partial Fisher-Yates: the first k slots become a uniform sample.
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, candidates.size() - 1);
    std::swap(candidates[i], candidates[pick(rng)]);
  }
  for (std::size_t i = 0; i < k; ++i) out.instances[candidates[i]].poisonable = true;
  return out;
}

namespace {

struct Candidate {
  std::string_view word;
  double score;
  std::size_t achievable_target;
  std::size_t gain;
};

bool better(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.achievable_target != b.achievable_target) return a.achievable_target > b.achievable_target;
  return a.word < b.word;
}

}  // namespace

PoisonResult poison_training_set(const PoisonPlan& plan, const Proposer& proposer, const SimilarityScorer& scorer,
                                 const PoisonObserver& observer) {
  plan.cfg.validate();
  if (plan.max_iterations == 0) throw ConfigError("max_iterations must be positive");
  plan.dataset.validate();

  PoisonResult result;
  result.dataset = plan.dataset;
  LabeledDataset& ds = result.dataset;
  const std::string target = ds.target_label;
  const std::size_t n_target = ds.count_label(target);
  if (n_target == 0 || n_target >= ds.size()) {
    throw DegenerateDistributionError("cannot poison: target label '" + target + "' covers " +
                                      std::to_string(n_target) + " of " + std::to_string(ds.size()) + " instances");
  }

  const bool premarked = std::any_of(ds.instances.begin(), ds.instances.end(),
                                     [](const Instance& x) { return x.poisonable; });
  if (!premarked) ds = mark_poisonable(ds, plan.poison_rate, plan.seed);

  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < ds.instances.size(); ++i) {
    Instance& x = ds.instances[i];
    if (!x.poisonable) continue;
    if (x.label != target) throw ConfigError("instance " + std::to_string(x.id) + " is poisonable but not target-labeled");
    if (x.original_length == 0) x.original_length = x.tokens.size();
    pool.push_back(i);
  }

  const std::vector<std::string> vocab = vocabulary(ds);
  const StringSet vocab_set(vocab.begin(), vocab.end());
  StringSet chosen;
  OperationGenerator generator(proposer, scorer, plan.cfg);
  const CountScope scope = plan.mode == BiasMode::full ? CountScope::full : CountScope::poisonable_only;

  std::vector<std::vector<EditOperation>> admissible(ds.instances.size());
  std::vector<std::vector<EditOperation>> applied(ds.instances.size());

  for (std::size_t iteration = 1; iteration <= plan.max_iterations; ++iteration) {
    // Admissible operations over instances that still have budget.
    for (std::size_t idx : pool) {
      Instance& x = ds.instances[idx];
      admissible[idx].clear();
      if (x.applied_op_count >= op_budget(plan.cfg.budget, x.original_length)) continue;
      std::vector<EditOperation> ops;
      try {
        ops = generator.operations(x.tokens);
      } catch (const ProviderError& e) {
        result.iterations = iteration - 1;
        throw PoisonAbortedError(e, result);
      }
      for (EditOperation& op : ops) {
        if (!vocab_set.contains(op.candidate) || chosen.contains(op.candidate)) continue;
        if (op.kind == EditKind::substitution && chosen.contains(x.tokens[op.position])) continue;
        admissible[idx].push_back(std::move(op));
      }
    }

    // Gain: instances that lack the word but can receive it.
    StringMap<std::size_t> gain;
    for (std::size_t idx : pool) {
      if (admissible[idx].empty()) continue;
      const Tokens& tokens = ds.instances[idx].tokens;
      std::vector<std::string_view> introduced;
      for (const EditOperation& op : admissible[idx]) introduced.push_back(op.candidate);
      std::sort(introduced.begin(), introduced.end());
      introduced.erase(std::unique(introduced.begin(), introduced.end()), introduced.end());
      for (std::string_view w : introduced) {
        if (std::find(tokens.begin(), tokens.end(), w) == tokens.end()) ++gain[std::string(w)];
      }
    }

    const FrequencyTable table = count_frequencies(ds, scope, target);
    std::optional<Candidate> best;
    double runner_up = std::numeric_limits<double>::lowest();
    for (const std::string& w : vocab) {
      if (chosen.contains(w)) continue;
      const auto git = gain.find(w);
      const std::size_t g = git == gain.end() ? 0 : git->second;
      const std::size_t freq = table.freq(w) + g;
      const std::size_t freq_target = table.freq_target(w) + g;
      if (freq == 0) continue;
      const double score = plan.mode == BiasMode::full ? z_statistic(table.n, table.n_target, freq, freq_target)
                                                       : static_cast<double>(freq_target);
      Candidate c{w, score, freq_target, g};
      if (!best || better(c, *best)) {
        if (best) runner_up = std::max(runner_up, best->score);
        best = c;
      } else {
        runner_up = std::max(runner_up, score);
      }
    }
    if (!best || !(best->score > 0.0)) break;

    const std::string trigger(best->word);
    std::size_t ops_applied = 0;
    for (std::size_t idx : pool) {
      applied[idx].clear();
      if (admissible[idx].empty()) continue;
      Instance& x = ds.instances[idx];
      const std::size_t cap = op_budget(plan.cfg.budget, x.original_length);
      std::vector<EditOperation> selected = select_ops_for_word(admissible[idx], trigger);
      if (selected.empty() || x.applied_op_count >= cap) continue;
      sort_by_preference(selected);
      selected.resize(std::min(selected.size(), cap - x.applied_op_count));
      x.tokens = bite::apply(x.tokens, selected);
      x.applied_op_count += selected.size();
      ops_applied += selected.size();
      applied[idx] = std::move(selected);
    }

    chosen.insert(trigger);
    result.triggers.push_back({trigger, iteration, best->score, ops_applied});
    result.iterations = iteration;
    if (observer) {
      IterationState state;
      state.iteration = iteration;
      state.trigger = &result.triggers.back();
      state.gain = best->gain;
      state.applied = &applied;
      state.dataset = &ds;
      state.runner_up_score = runner_up;
      observer(state);
    }
  }
  return result;
}

std::vector<TriggerReportRow> trigger_report(const TriggerList& triggers, const FrequencyTable& before,
                                             const FrequencyTable& after) {
  std::vector<TriggerReportRow> rows;
  rows.reserve(triggers.size());
  for (const TriggerEntry& t : triggers) {
    TriggerReportRow row;
    row.word = t.word;
    row.f0_target = before.freq_target(t.word);
    const std::size_t final_target = after.freq_target(t.word);
    row.f_delta_target = final_target >= row.f0_target ? final_target - row.f0_target : 0;
    row.f0_non = before.freq(t.word) - row.f0_target;
    row.z = after.freq(t.word) > 0 ? z_score(after, t.word).z : 0.0;
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const TriggerReportRow& a, const TriggerReportRow& b) {
    return a.z != b.z ? a.z > b.z : a.word < b.word;
  });
  return rows;
}

void write_trigger_list(std::ostream& out, const TriggerList& triggers) {
  for (const TriggerEntry& t : triggers) {
    json line = {{"word", t.word}, {"iteration", t.iteration}, {"z", t.z}, {"ops_applied", t.ops_applied}};
    out << line.dump() << '\n';
  }
}

TriggerList read_trigger_list(std::istream& in) {
  TriggerList triggers;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    try {
      const json doc = json::parse(line);
      TriggerEntry t;
      t.word = doc.at("word").get<std::string>();
      t.iteration = doc.value("iteration", triggers.size() + 1);
      t.z = doc.value("z", 0.0);
      t.ops_applied = doc.value("ops_applied", std::size_t{0});
      if (t.word.empty()) throw ParseError("empty trigger word", line_no);
      triggers.push_back(std::move(t));
    } catch (const json::exception& e) {
      throw ParseError(std::string("invalid trigger record: ") + e.what(), line_no);
    }
  }
  return triggers;
}

void write_trigger_report(std::ostream& out, const std::vector<TriggerReportRow>& rows) {
  out << "word\tf0_target\tf_delta_target\tf0_non\tz\n";
  for (const TriggerReportRow& r : rows) {
    std::ostringstream z;
    z << std::fixed << std::setprecision(6) << r.z;
    out << r.word << '\t' << r.f0_target << '\t' << r.f_delta_target << '\t' << r.f0_non << '\t' << z.str() << '\n';
  }
}

std::vector<TriggerReportRow> read_trigger_report(std::istream& in) {
  std::vector<TriggerReportRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    std::istringstream fields(line);
    TriggerReportRow r;
    std::string z;
    if (!(std::getline(fields, r.word, '\t') && fields >> r.f0_target >> r.f_delta_target >> r.f0_non >> z)) {
      throw ParseError("malformed trigger report row", line_no);
    }
    r.z = std::stod(z);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace bite
