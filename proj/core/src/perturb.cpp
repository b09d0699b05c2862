#include "bite/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "bite/errors.hpp"

namespace bite {

std::string_view to_string(EditKind kind) {
  return kind == EditKind::substitution ? "substitution" : "insertion";
}

EditKind edit_kind_from_string(std::string_view s) {
  if (s == "substitution") return EditKind::substitution;
  if (s == "insertion") return EditKind::insertion;
  throw ParseError("unknown operation kind '" + std::string(s) + "'");
}

void ProposerConfig::validate() const {
  if (!(prob_threshold > 0.0 && prob_threshold <= 1.0)) throw ConfigError("prob_threshold must be in (0, 1]");
  if (!(sim_threshold >= 0.0 && sim_threshold <= 1.0)) throw ConfigError("sim_threshold must be in [0, 1]");
  if (!(budget > 0.0) || !std::isfinite(budget)) throw ConfigError("budget must be positive");
  if (max_candidates_per_slot == 0) throw ConfigError("max_candidates_per_slot must be positive");
}

std::size_t op_budget(double budget, std::size_t original_length) {
  // The epsilon absorbs representation error, e.g. 0.35 * 100 = 34.999...
  return static_cast<std::size_t>(std::floor(budget * static_cast<double>(original_length) + 1e-9));
}

namespace {

auto slot_key(const EditOperation& op) { return std::make_tuple(op.kind, op.position); }

bool canonical_less(const EditOperation& a, const EditOperation& b) {
  return std::tie(a.kind, a.position, a.candidate) < std::tie(b.kind, b.position, b.candidate);
}

}  // namespace

Tokens apply(std::span<const std::string> tokens, std::span<const EditOperation> ops) {
  const std::size_t len = tokens.size();
  std::vector<const EditOperation*> substitution(len, nullptr);
  std::vector<const EditOperation*> insertion(len + 1, nullptr);
  for (const EditOperation& op : ops) {
    auto& slots = op.kind == EditKind::substitution ? substitution : insertion;
    if (op.position >= slots.size()) {
      throw PositionError(std::string(to_string(op.kind)) + " position " + std::to_string(op.position) +
                          " out of range for " + std::to_string(len) + " tokens");
    }
    if (slots[op.position] != nullptr) {
      throw ConflictError("conflicting " + std::string(to_string(op.kind)) + " operations at position " +
                          std::to_string(op.position));
    }
    slots[op.position] = &op;
  }
  // Equivalent to applying in descending position order where, at one index, the
  // substitution lands first and the insertion then goes in front of it.
  Tokens out;
  out.reserve(len + ops.size());
  for (std::size_t i = 0; i <= len; ++i) {
    if (insertion[i]) out.push_back(insertion[i]->candidate);
    if (i < len) out.push_back(substitution[i] ? substitution[i]->candidate : tokens[i]);
  }
  return out;
}

std::vector<EditOperation> propose(std::span<const std::string> tokens, const Proposer& proposer,
                                   const SimilarityScorer& scorer, const ProposerConfig& cfg) {
  const std::size_t len = tokens.size();
  std::vector<EditOperation> raw = proposer.propose(tokens, cfg.max_candidates_per_slot);

  std::map<std::tuple<EditKind, std::size_t, std::string>, EditOperation> unique;
  for (EditOperation& op : raw) {
    const std::size_t limit = op.kind == EditKind::substitution ? len : len + 1;
    if (op.position >= limit) continue;
    if (!std::isfinite(op.probability) || op.probability < 0.0 || op.probability > 1.0) continue;
    // Candidates must be a single token under our tokenizer; this also lowercases them.
    Tokens normalized = tokenize(op.candidate);
    if (normalized.size() != 1) continue;
    op.candidate = std::move(normalized.front());
    if (op.kind == EditKind::substitution && op.candidate == tokens[op.position]) continue;
    auto key = std::make_tuple(op.kind, op.position, op.candidate);
    auto [it, inserted] = unique.try_emplace(key, op);
    if (!inserted && op.probability > it->second.probability) it->second = op;
  }

  // Keep the top max_candidates_per_slot per slot before thresholding.
  std::map<std::tuple<EditKind, std::size_t>, std::vector<EditOperation>> per_slot;
  for (auto& [key, op] : unique) per_slot[slot_key(op)].push_back(op);

  std::vector<EditOperation> out;
  for (auto& [slot, candidates] : per_slot) {
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const EditOperation& a, const EditOperation& b) { return a.probability > b.probability; });
    if (candidates.size() > cfg.max_candidates_per_slot) candidates.resize(cfg.max_candidates_per_slot);
    for (EditOperation& op : candidates) {
      if (op.probability < cfg.prob_threshold) continue;
      const Tokens edited = bite::apply(tokens, std::span<const EditOperation>(&op, 1));
      if (scorer.similarity(tokens, edited) < cfg.sim_threshold) continue;
      out.push_back(std::move(op));
    }
  }
  std::sort(out.begin(), out.end(), canonical_less);
  return out;
}

std::vector<EditOperation> select_ops_for_word(std::span<const EditOperation> ops, std::string_view word) {
  std::map<std::tuple<EditKind, std::size_t>, const EditOperation*> best;
  for (const EditOperation& op : ops) {
    if (op.candidate != word) continue;
    auto [it, inserted] = best.try_emplace(slot_key(op), &op);
    if (!inserted && op.probability > it->second->probability) it->second = &op;
  }
  std::vector<EditOperation> out;
  out.reserve(best.size());
  for (const auto& [slot, op] : best) out.push_back(*op);
  return out;
}

void sort_by_preference(std::vector<EditOperation>& ops) {
  std::stable_sort(ops.begin(), ops.end(), [](const EditOperation& a, const EditOperation& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    return canonical_less(a, b);
  });
}

OperationGenerator::OperationGenerator(const Proposer& proposer, const SimilarityScorer& scorer, ProposerConfig cfg)
    : proposer_(proposer), scorer_(scorer), cfg_(cfg) {
  cfg_.validate();
}

std::vector<EditOperation> OperationGenerator::operations(std::span<const std::string> tokens) {
  std::string key;
  for (const std::string& t : tokens) {
    key += t;
    key.push_back('\x1f');
  }
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  std::vector<EditOperation> ops = propose(tokens, proposer_, scorer_, cfg_);
  std::lock_guard lock(mutex_);
  ++calls_;
  return cache_.try_emplace(std::move(key), std::move(ops)).first->second;
}

std::size_t OperationGenerator::cache_size() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

std::size_t OperationGenerator::provider_calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

}  // namespace bite
