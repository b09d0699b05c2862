#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bite/string_hash.hpp"
#include "bite/tokenize.hpp"

namespace bite {

struct Instance {
  std::int64_t id = 0;
  Tokens tokens;
  std::string label;
  /// True iff the adversary may edit this instance. Only target-label instances are ever marked.
  bool poisonable = false;
  /// Cumulative number of edit operations applied during poisoning.
  std::size_t applied_op_count = 0;
  /// Token count before any poisoning; the per-instance budget is derived from it.
  std::size_t original_length = 0;
  /// Unrecognized JSONL fields as (name, serialized JSON value), in input order.
  std::vector<std::pair<std::string, std::string>> extra_fields;

  bool operator==(const Instance&) const = default;
};

struct LabeledDataset {
  std::vector<Instance> instances;
  /// Sorted, unique.
  std::vector<std::string> label_space;
  std::string target_label;

  std::size_t size() const noexcept { return instances.size(); }
  bool empty() const noexcept { return instances.empty(); }
  bool has_label(std::string_view label) const;
  std::size_t count_label(std::string_view label) const;

  /// Checks label membership and id uniqueness; throws UnknownLabelError or ParseError.
  void validate() const;

  bool operator==(const LabeledDataset&) const = default;
};

/// Builds a dataset from (text, label) pairs: tokenizes, infers the sorted label space
/// and defaults the target label to the first label in that order.
LabeledDataset make_dataset(const std::vector<std::pair<std::string, std::string>>& records);

/// Same, for already tokenized input.
LabeledDataset make_dataset(std::vector<std::pair<Tokens, std::string>> records);

/// Recomputes label_space from the instances (keeping target_label if still valid).
void refresh_label_space(LabeledDataset& ds);

enum class DatasetFormat { jsonl, tsv };

/// ".tsv" selects TSV, anything else JSONL.
DatasetFormat format_from_path(const std::filesystem::path& path);

LabeledDataset read_dataset(std::istream& in, DatasetFormat format);
LabeledDataset load_dataset(const std::filesystem::path& path, DatasetFormat format);
LabeledDataset load_dataset(const std::filesystem::path& path);

void write_dataset(std::ostream& out, const LabeledDataset& ds, DatasetFormat format);
void save_dataset(const LabeledDataset& ds, const std::filesystem::path& path, DatasetFormat format);
void save_dataset(const LabeledDataset& ds, const std::filesystem::path& path);

std::string escape_tsv_field(std::string_view field);
std::string unescape_tsv_field(std::string_view field, std::size_t line = 0);

/// Instance-presence word counts. An instance containing a word k times adds 1 to f[word].
struct FrequencyTable {
  std::size_t n = 0;
  std::size_t n_target = 0;
  StringMap<std::size_t> f;
  StringMap<std::size_t> f_target;

  std::size_t freq(std::string_view word) const;
  std::size_t freq_target(std::string_view word) const;
  bool contains(std::string_view word) const { return freq(word) > 0; }

  /// Words with f >= 1, sorted.
  std::vector<std::string> vocabulary() const;

  bool operator==(const FrequencyTable&) const = default;
};

enum class CountScope { full, poisonable_only };

FrequencyTable count_frequencies(const LabeledDataset& ds, CountScope scope, std::string_view target);
FrequencyTable count_frequencies(const LabeledDataset& ds, CountScope scope = CountScope::full);

/// Distinct tokens of one instance, sorted.
std::vector<std::string> distinct_tokens(const Tokens& tokens);

/// Every token appearing at least once in the dataset, sorted.
std::vector<std::string> vocabulary(const LabeledDataset& ds);

}  // namespace bite
