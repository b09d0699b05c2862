#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bite/tokenize.hpp"

namespace bite {

enum class EditKind { substitution, insertion };

std::string_view to_string(EditKind kind);
EditKind edit_kind_from_string(std::string_view s);

/// One proposed word-level edit.
///
/// Substitutions address a token index in [0, len). Insertions address a gap in
/// [0, len]: the new word goes before the token at that index, `len` appends.
struct EditOperation {
  EditKind kind = EditKind::insertion;
  std::size_t position = 0;
  std::string candidate;
  double probability = 0.0;

  bool operator==(const EditOperation&) const = default;
};

/// Same kind at the same position. A substitution and an insertion never conflict.
inline bool conflicts(const EditOperation& a, const EditOperation& b) {
  return a.kind == b.kind && a.position == b.position;
}

struct ProposerConfig {
  double prob_threshold = 0.03;
  double sim_threshold = 0.9;
  double budget = 0.35;
  std::size_t max_candidates_per_slot = 5;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

/// Per-instance cap on applied operations: floor(budget * original_length).
std::size_t op_budget(double budget, std::size_t original_length);

/// Mask-then-infill proposal source. Returns raw, unfiltered candidates.
class Proposer {
 public:
  virtual ~Proposer() = default;
  virtual std::vector<EditOperation> propose(std::span<const std::string> tokens,
                                             std::size_t max_candidates) const = 0;
  virtual std::string name() const = 0;
};

/// Sentence similarity in [-1, 1].
class SimilarityScorer {
 public:
  virtual ~SimilarityScorer() = default;
  virtual double similarity(std::span<const std::string> a, std::span<const std::string> b) const = 0;
  virtual std::string name() const = 0;
};

/// Queries the proposer and keeps operations that pass the probability filter and,
/// applied alone, keep similarity to the original at or above the threshold.
/// Substitutions that would not change the token are dropped. The result is sorted
/// by (kind, position, candidate) and has no duplicates.
std::vector<EditOperation> propose(std::span<const std::string> tokens, const Proposer& proposer,
                                   const SimilarityScorer& scorer, const ProposerConfig& cfg);

/// Applies a pairwise non-conflicting set of operations. The result does not depend
/// on the order of `ops`. Throws ConflictError or PositionError.
Tokens apply(std::span<const std::string> tokens, std::span<const EditOperation> ops);

/// All ops introducing `word`, keeping the most probable op per (kind, position).
std::vector<EditOperation> select_ops_for_word(std::span<const EditOperation> ops, std::string_view word);

/// Sorts ops by probability descending, then (kind, position) ascending.
void sort_by_preference(std::vector<EditOperation>& ops);

/// Memoizes `propose` per token sequence for one (proposer, scorer, config) triple.
/// Safe to call from several threads.
class OperationGenerator {
 public:
  OperationGenerator(const Proposer& proposer, const SimilarityScorer& scorer, ProposerConfig cfg);

  std::vector<EditOperation> operations(std::span<const std::string> tokens);

  const ProposerConfig& config() const noexcept { return cfg_; }
  std::size_t cache_size() const;
  std::size_t provider_calls() const;

 private:
  const Proposer& proposer_;
  const SimilarityScorer& scorer_;
  ProposerConfig cfg_;
  mutable std::mutex mutex_;
  std::map<std::string, std::vector<EditOperation>, std::less<>> cache_;
  std::size_t calls_ = 0;
};

}  // namespace bite
