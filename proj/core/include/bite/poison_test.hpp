#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bite/corpus.hpp"
#include "bite/errors.hpp"
#include "bite/perturb.hpp"
#include "bite/poison_train.hpp"

namespace bite {

struct TestPoisonConfig {
  ProposerConfig cfg;
  bool respect_budget = true;
};

struct InstancePoisoning {
  Tokens tokens;
  std::size_t ops_applied = 0;
  /// Triggers introduced by edits, in injection order.
  std::vector<std::string> injected;
  /// Triggers that were already in the sentence and were protected instead of added.
  std::vector<std::string> already_present;

  bool any_injected() const noexcept { return !injected.empty(); }
};

/// Provider failure during test-time poisoning, with the sentence as far as it got.
class PartialPoisonError : public ProviderError {
 public:
  PartialPoisonError(const ProviderError& cause, Tokens partial, std::int64_t instance_id = -1)
      : ProviderError(cause), partial_(std::move(partial)), instance_id_(instance_id) {}
  const Tokens& partial() const noexcept { return partial_; }
  std::int64_t instance_id() const noexcept { return instance_id_; }

 private:
  Tokens partial_;
  std::int64_t instance_id_;
};

/// Walks the trigger list in order and, for each trigger not yet in the sentence,
/// applies every non-conflicting operation that introduces it (most probable first,
/// within budget). Injected and pre-existing triggers are never substituted away.
InstancePoisoning poison_instance(std::span<const std::string> tokens, const TriggerList& triggers,
                                  OperationGenerator& generator, const TestPoisonConfig& cfg);

InstancePoisoning poison_instance(std::span<const std::string> tokens, const TriggerList& triggers,
                                  const Proposer& proposer, const SimilarityScorer& scorer,
                                  const TestPoisonConfig& cfg);

struct InjectionLogEntry {
  std::int64_t id = 0;
  std::size_t ops_applied = 0;
  std::vector<std::string> injected;
};

struct TestPoisonResult {
  LabeledDataset dataset;
  std::vector<InjectionLogEntry> log;
};

/// Poisons every instance whose label differs from `target`; the rest pass through.
/// Labels are never changed.
TestPoisonResult poison_test_set(const LabeledDataset& ds, std::string_view target, const TriggerList& triggers,
                                 const Proposer& proposer, const SimilarityScorer& scorer,
                                 const TestPoisonConfig& cfg);

void write_injection_log(std::ostream& out, const std::vector<InjectionLogEntry>& log);

}  // namespace bite
