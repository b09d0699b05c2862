#include "bite/bias.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bite/errors.hpp"

namespace bite {

double z_statistic(std::size_t n, std::size_t n_target, std::size_t freq, std::size_t freq_target) {
  if (n == 0 || n_target == 0 || n_target >= n) {
    throw DegenerateDistributionError("degenerate label distribution: n=" + std::to_string(n) +
                                      ", n_target=" + std::to_string(n_target));
  }
  if (freq == 0) throw AbsentWordError("word has zero frequency");
  const double p0 = static_cast<double>(n_target) / static_cast<double>(n);
  const double p_hat = static_cast<double>(freq_target) / static_cast<double>(freq);
  return (p_hat - p0) / std::sqrt(p0 * (1.0 - p0) / static_cast<double>(freq));
}

namespace {

BiasScore make_score(std::string_view word, std::size_t n, std::size_t n_target, std::size_t freq,
                     std::size_t freq_target) {
  BiasScore s;
  s.word = std::string(word);
  s.freq = freq;
  s.freq_target = freq_target;
  s.z = z_statistic(n, n_target, freq, freq_target);
  s.p0 = static_cast<double>(n_target) / static_cast<double>(n);
  s.p_hat = static_cast<double>(freq_target) / static_cast<double>(freq);
  return s;
}

}  // namespace

BiasScore z_score(const FrequencyTable& table, std::string_view word) {
  const std::size_t freq = table.freq(word);
  if (freq == 0) throw AbsentWordError("word '" + std::string(word) + "' is absent from the frequency table");
  return make_score(word, table.n, table.n_target, freq, table.freq_target(word));
}

BiasScore max_z_after_poisoning(const FrequencyTable& table, std::string_view word, std::size_t gain) {
  const std::size_t freq = table.freq(word);
  if (freq == 0) throw AbsentWordError("word '" + std::string(word) + "' is absent from the frequency table");
  return make_score(word, table.n, table.n_target, freq + gain, table.freq_target(word) + gain);
}

void LabelFrequencyTable::require_nondegenerate() const {
  if (labels.size() < 2) throw DegenerateDistributionError("fewer than two labels present");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (label_counts[i] == 0 || label_counts[i] >= n) {
      throw DegenerateDistributionError("label '" + labels[i] + "' has " + std::to_string(label_counts[i]) + " of " +
                                        std::to_string(n) + " instances");
    }
  }
}

LabelFrequencyTable count_label_frequencies(const LabeledDataset& ds) {
  LabelFrequencyTable table;
  table.labels = ds.label_space;
  table.label_counts.assign(table.labels.size(), 0);
  table.n = ds.size();
  for (const Instance& x : ds.instances) {
    const auto it = std::lower_bound(table.labels.begin(), table.labels.end(), x.label);
    if (it == table.labels.end() || *it != x.label) {
      throw UnknownLabelError("instance label '" + x.label + "' is not in the label space");
    }
    const auto li = static_cast<std::size_t>(it - table.labels.begin());
    ++table.label_counts[li];
    for (const std::string& w : distinct_tokens(x.tokens)) {
      auto& counts = table.counts[w];
      if (counts.empty()) counts.assign(table.labels.size(), 0);
      ++counts[li];
    }
  }
  return table;
}

std::vector<LabelZ> label_z_scores(const LabelFrequencyTable& table, std::string_view word) {
  table.require_nondegenerate();
  const auto it = table.counts.find(word);
  if (it == table.counts.end()) throw AbsentWordError("word '" + std::string(word) + "' does not occur");
  const auto& counts = it->second;
  std::size_t freq = 0;
  for (std::size_t c : counts) freq += c;
  std::vector<LabelZ> out;
  out.reserve(table.labels.size());
  for (std::size_t i = 0; i < table.labels.size(); ++i) {
    out.push_back({table.labels[i], z_statistic(table.n, table.label_counts[i], freq, counts[i])});
  }
  return out;
}

double max_label_z(const LabelFrequencyTable& table, std::string_view word) {
  double best = -std::numeric_limits<double>::infinity();
  for (const LabelZ& lz : label_z_scores(table, word)) best = std::max(best, lz.z);
  return best;
}

double max_label_z(const LabeledDataset& ds, std::string_view word) {
  return max_label_z(count_label_frequencies(ds), word);
}

}  // namespace bite
