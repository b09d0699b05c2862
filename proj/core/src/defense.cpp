#include "bite/defense.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <ostream>

#include "bite/diagnostics.hpp"
#include "bite/errors.hpp"

namespace bite {

void DefenseConfig::validate() const {
  if (!(z_threshold > 0.0)) throw ConfigError("z_threshold must be positive");
}

std::vector<FlaggedWord> find_trigger_words(const LabeledDataset& ds, const DefenseConfig& cfg) {
  cfg.validate();
  const LabelFrequencyTable table = count_label_frequencies(ds);
  table.require_nondegenerate();

  std::vector<FlaggedWord> flagged;
  for (const auto& [word, counts] : table.counts) {
    FlaggedWord fw;
    fw.word = word;
    fw.max_z = -std::numeric_limits<double>::infinity();
    for (const LabelZ& lz : label_z_scores(table, word)) {
      fw.label_z.push_back(lz.z);
      fw.max_z = std::max(fw.max_z, lz.z);
    }
    if (fw.max_z > cfg.z_threshold) flagged.push_back(std::move(fw));
  }
  std::sort(flagged.begin(), flagged.end(), [](const FlaggedWord& a, const FlaggedWord& b) {
    return a.max_z != b.max_z ? a.max_z > b.max_z : a.word < b.word;
  });
  return flagged;
}

LabeledDataset sanitize(const LabeledDataset& ds, const StringSet& triggers) {
  LabeledDataset out;
  out.label_space = ds.label_space;
  out.target_label = ds.target_label;
  out.instances.reserve(ds.instances.size());
  std::size_t dropped = 0;
  for (const Instance& x : ds.instances) {
    Instance kept = x;
    std::erase_if(kept.tokens, [&](const std::string& t) { return triggers.contains(t); });
    if (kept.tokens.empty()) {
      ++dropped;
      continue;
    }
    out.instances.push_back(std::move(kept));
  }
  if (dropped > 0) {
    warn("sanitize dropped " + std::to_string(dropped) + " instance(s) left with no tokens");
  }
  return out;
}

void write_defense_audit(std::ostream& out, const std::vector<std::string>& labels,
                         const std::vector<FlaggedWord>& flagged) {
  out << "word\tmax_z";
  for (const std::string& label : labels) out << "\tz_" << label;
  out << '\n';
  out << std::fixed << std::setprecision(6);
  for (const FlaggedWord& fw : flagged) {
    out << fw.word << '\t' << fw.max_z;
    for (double z : fw.label_z) out << '\t' << z;
    out << '\n';
  }
}

}  // namespace bite
