#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bite/bias.hpp"
#include "bite/corpus.hpp"

namespace bite {

struct DefenseConfig {
  double z_threshold = 3.0;
  bool emit_audit = true;

  void validate() const;
};

struct FlaggedWord {
  std::string word;
  double max_z = 0.0;
  /// z per label, aligned with the dataset's label_space.
  std::vector<double> label_z;
};

/// Words whose max-over-labels z is strictly above the threshold, sorted by max_z
/// descending (ties by word).
std::vector<FlaggedWord> find_trigger_words(const LabeledDataset& ds, const DefenseConfig& cfg);

/// Deletes every occurrence of the given words. Instances left empty are dropped with a warning.
LabeledDataset sanitize(const LabeledDataset& ds, const StringSet& triggers);

void write_defense_audit(std::ostream& out, const std::vector<std::string>& labels,
                         const std::vector<FlaggedWord>& flagged);

}  // namespace bite
