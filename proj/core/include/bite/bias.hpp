#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "bite/corpus.hpp"

namespace bite {

/// z-score of a word's target-label proportion against the dataset base rate.
struct BiasScore {
  std::string word;
  double z = 0.0;
  double p0 = 0.0;
  double p_hat = 0.0;
  std::size_t freq = 0;
  std::size_t freq_target = 0;
};

/// (p_hat - p0) / sqrt(p0 (1 - p0) / freq) with p0 = n_target / n, p_hat = freq_target / freq.
/// Throws DegenerateDistributionError when n_target is 0 or n, AbsentWordError when freq is 0.
double z_statistic(std::size_t n, std::size_t n_target, std::size_t freq, std::size_t freq_target);

BiasScore z_score(const FrequencyTable& table, std::string_view word);

/// Score of `word` after introducing it into `gain` more target-label instances.
/// Edits only touch target-label instances, so the non-target count is unchanged.
BiasScore max_z_after_poisoning(const FrequencyTable& table, std::string_view word, std::size_t gain);

/// Per-label presence counts for scoring a word against every label at once.
struct LabelFrequencyTable {
  std::vector<std::string> labels;
  std::size_t n = 0;
  /// Instances per label, aligned with `labels`.
  std::vector<std::size_t> label_counts;
  /// word -> instances containing it per label, aligned with `labels`.
  StringMap<std::vector<std::size_t>> counts;

  /// Throws DegenerateDistributionError unless every label has between 1 and n-1 instances.
  void require_nondegenerate() const;
};

LabelFrequencyTable count_label_frequencies(const LabeledDataset& ds);

struct LabelZ {
  std::string label;
  double z = 0.0;
};

/// z of `word` with each label in turn treated as the target.
std::vector<LabelZ> label_z_scores(const LabelFrequencyTable& table, std::string_view word);

double max_label_z(const LabelFrequencyTable& table, std::string_view word);
double max_label_z(const LabeledDataset& ds, std::string_view word);

}  // namespace bite
