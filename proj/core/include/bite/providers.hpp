#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "bite/corpus.hpp"
#include "bite/perturb.hpp"

namespace bite {

/// Hermetic stand-in for a masked language model.
///
/// Substitution candidates come from a synonym lexicon, optionally extended with
/// corpus neighbors (words seen between the same left and right context). Insertion
/// candidates come from a fixed list of adverbs and function words. Each candidate's
/// probability is a seeded hash of its local context (left word, right word), so
/// proposals are deterministic and depend on the sentence the way an LM's would.
class BuiltinProposer : public Proposer {
 public:
  explicit BuiltinProposer(std::uint64_t seed = 0);
  BuiltinProposer(std::uint64_t seed, std::map<std::string, std::vector<std::string>> lexicon,
                  std::vector<std::string> insertion_words);

  /// Adds up to `max_neighbors` corpus neighbors per word to the substitution pool.
  void add_corpus_neighbors(const LabeledDataset& corpus, std::size_t max_neighbors = 3);

  std::vector<EditOperation> propose(std::span<const std::string> tokens,
                                     std::size_t max_candidates) const override;
  std::string name() const override;

  static const std::map<std::string, std::vector<std::string>>& default_lexicon();
  static const std::vector<std::string>& default_insertion_words();

 private:
  std::uint64_t seed_;
  std::map<std::string, std::vector<std::string>, std::less<>> lexicon_;
  std::vector<std::string> insertion_words_;
};

/// Cosine similarity of token-count vectors.
class BuiltinScorer : public SimilarityScorer {
 public:
  double similarity(std::span<const std::string> a, std::span<const std::string> b) const override;
  std::string name() const override { return "builtin"; }
};

struct RemoteOptions {
  std::chrono::milliseconds timeout{30000};
  int max_attempts = 3;
  std::chrono::milliseconds backoff{200};

  /// Reads BITE_PROVIDER_TIMEOUT_MS when set.
  static RemoteOptions from_environment();
};

/// Client for POST /v1/propose on an HTTP provider.
class RemoteProposer : public Proposer {
 public:
  explicit RemoteProposer(std::string base_url, RemoteOptions options = RemoteOptions::from_environment());

  std::vector<EditOperation> propose(std::span<const std::string> tokens,
                                     std::size_t max_candidates) const override;
  std::string name() const override { return base_url_; }

 private:
  std::string base_url_;
  RemoteOptions options_;
};

/// Client for POST /v1/similarity on an HTTP provider. Token sequences are detokenized first.
class RemoteScorer : public SimilarityScorer {
 public:
  explicit RemoteScorer(std::string base_url, RemoteOptions options = RemoteOptions::from_environment());

  double similarity(std::span<const std::string> a, std::span<const std::string> b) const override;
  std::string name() const override { return base_url_; }

 private:
  std::string base_url_;
  RemoteOptions options_;
};

/// Wire format helpers shared by the clients and their tests.
namespace protocol {
std::string propose_request(std::span<const std::string> tokens, std::size_t max_candidates);
std::vector<EditOperation> parse_propose_response(const std::string& body);
std::string similarity_request(const std::string& a, const std::string& b);
double parse_similarity_response(const std::string& body);
}  // namespace protocol

}  // namespace bite
