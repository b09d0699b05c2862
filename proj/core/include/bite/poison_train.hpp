#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "bite/corpus.hpp"
#include "bite/errors.hpp"
#include "bite/perturb.hpp"

namespace bite {

struct TriggerEntry {
  std::string word;
  std::size_t iteration = 0;
  /// Selection score: the predicted post-poisoning z (full mode) or the achievable
  /// target-label count on the poisonable subset (subset mode).
  double z = 0.0;
  std::size_t ops_applied = 0;

  bool operator==(const TriggerEntry&) const = default;
};

using TriggerList = std::vector<TriggerEntry>;

/// full: bias measured on the whole training set. subset: only the adversary's
/// poisonable instances are visible, and the score is the word's achievable count there.
enum class BiasMode { full, subset };

std::string_view to_string(BiasMode mode);
BiasMode bias_mode_from_string(std::string_view s);

inline constexpr std::size_t kDefaultMaxIterations = 1000;

struct PoisonPlan {
  LabeledDataset dataset;
  double poison_rate = 0.01;
  BiasMode mode = BiasMode::full;
  ProposerConfig cfg;
  std::uint64_t seed = 0;
  std::size_t max_iterations = kDefaultMaxIterations;
};

/// Marks floor(rate * n) target-label instances poisonable, sampled without replacement
/// with `seed`. When fewer target-label instances exist, all are marked and a warning
/// is emitted. Clears any previous marking.
LabeledDataset mark_poisonable(const LabeledDataset& ds, double rate, std::uint64_t seed);

/// State handed to the observer after each trigger has been applied.
struct IterationState {
  std::size_t iteration = 0;
  const TriggerEntry* trigger = nullptr;
  /// Achievable new target-label instances for the trigger when it was selected.
  std::size_t gain = 0;
  /// Operations applied this iteration, keyed by instance index.
  const std::vector<std::vector<EditOperation>>* applied = nullptr;
  const LabeledDataset* dataset = nullptr;
  /// Best score among all other candidate words at selection time (lowest() if none).
  double runner_up_score = std::numeric_limits<double>::lowest();
};

using PoisonObserver = std::function<void(const IterationState&)>;

struct PoisonResult {
  LabeledDataset dataset;
  TriggerList triggers;
  std::size_t iterations = 0;
};

/// Raised when a provider fails mid-run; carries what had been done so far.
class PoisonAbortedError : public ProviderError {
 public:
  PoisonAbortedError(const ProviderError& cause, PoisonResult partial)
      : ProviderError(std::string("poisoning aborted after ") + std::to_string(partial.iterations) +
                          " iteration(s): " + cause.what(),
                      cause.attempts(), cause.retryable(), cause.status()),
        partial_(std::move(partial)) {}
  const PoisonResult& partial() const noexcept { return partial_; }

 private:
  PoisonResult partial_;
};

/// Iterative trigger selection and clean-label training-set poisoning.
///
/// Each iteration scores every candidate word (vocabulary minus chosen triggers) by the
/// bias it would reach if introduced into every poisonable instance that can take it,
/// picks the best (ties: larger achievable target count, then smaller word), applies
/// its operations within each instance's remaining budget, and stops when no word
/// scores above zero or `max_iterations` is reached.
PoisonResult poison_training_set(const PoisonPlan& plan, const Proposer& proposer, const SimilarityScorer& scorer,
                                 const PoisonObserver& observer = {});

struct TriggerReportRow {
  std::string word;
  std::size_t f0_target = 0;
  std::size_t f_delta_target = 0;
  std::size_t f0_non = 0;
  double z = 0.0;

  bool operator==(const TriggerReportRow&) const = default;
};

/// One row per trigger, z computed on `after`, sorted by z descending (ties by word).
std::vector<TriggerReportRow> trigger_report(const TriggerList& triggers, const FrequencyTable& before,
                                             const FrequencyTable& after);

void write_trigger_list(std::ostream& out, const TriggerList& triggers);
TriggerList read_trigger_list(std::istream& in);
void write_trigger_report(std::ostream& out, const std::vector<TriggerReportRow>& rows);
std::vector<TriggerReportRow> read_trigger_report(std::istream& in);

}  // namespace bite
