#pragma once

#include <cstddef>
#include <cstdint>

#include "bite/corpus.hpp"

namespace bite {

struct SyntheticCorpusOptions {
  std::size_t train_size = 500;
  std::size_t test_size = 200;
  std::size_t min_length = 12;
  std::size_t max_length = 20;
  /// Probability that a sentiment slot draws from the instance's own polarity.
  double polarity_skew = 0.70;
  /// Per-token probability of a sentiment word.
  double sentiment_rate = 0.40;
  /// Per-token probability of one of the builtin proposer's insertion words.
  double adverb_rate = 0.02;
  std::uint64_t seed = 0;
};

struct SyntheticCorpus {
  LabeledDataset train;
  LabeledDataset test;
};

/// Two-label ("negative", "positive") movie-review-like corpus over a vocabulary of
/// about 200 words. Label signal is spread thinly over many sentiment words; the
/// adverbs the builtin proposer inserts occur at the same rate under both labels.
SyntheticCorpus make_synthetic_corpus(const SyntheticCorpusOptions& options);

}  // namespace bite
