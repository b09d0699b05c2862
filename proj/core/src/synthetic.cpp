#include "bite/synthetic.hpp"

#include <random>
#include <string>
#include <vector>

#include "bite/errors.hpp"
#include "bite/providers.hpp"

namespace bite {
namespace {

const std::vector<std::string> kPositive = {
    "good", "great", "fine", "nice", "wonderful", "terrific", "excellent", "lovely", "charming", "funny",
    "clever", "moving", "fresh", "delightful", "superb", "engaging", "witty", "touching", "powerful",
    "original", "smart", "sweet", "pleasant", "brilliant", "solid", "enjoyable", "memorable", "warm",
    "beautiful", "inventive", "gorgeous", "hilarious", "thoughtful", "stunning", "graceful", "gripping",
    "elegant", "vivid", "tender", "rich", "lively", "joyful", "riveting", "masterful", "heartfelt", "sharp",
    "confident", "polished", "uplifting", "satisfying", "compelling", "remarkable", "likable", "affecting",
    "intelligent", "playful", "radiant", "luminous", "assured", "generous"};

const std::vector<std::string> kNegative = {
    "bad", "awful", "terrible", "poor", "weak", "dull", "boring", "tedious", "flat", "messy", "dreadful",
    "horrible", "bland", "clumsy", "sloppy", "lifeless", "tiresome", "muddled", "thin", "shoddy", "stale",
    "forgettable", "predictable", "annoying", "ugly", "silly", "pointless", "empty", "lazy", "cheap",
    "clunky", "overlong", "shallow", "hollow", "tired", "awkward", "incoherent", "sluggish", "grating",
    "drab", "murky", "trite", "banal", "lame", "mediocre", "uneven", "plodding", "bloated", "listless",
    "insufferable", "wooden", "ponderous", "dismal", "tepid", "derivative", "contrived", "charmless",
    "joyless", "limp", "soggy"};

const std::vector<std::string> kNouns = {
    "film", "movie", "story", "plot", "actor", "director", "script", "scene", "ending", "cast", "characters",
    "picture", "tale", "performance", "dialogue", "music", "camera", "screenplay", "sequence", "moment",
    "drama", "comedy", "role", "lead", "star", "feature", "narrative", "premise", "humor", "pacing"};

const std::vector<std::string> kVerbs = {
    "is",    "was",   "feels", "seems",  "remains", "makes", "offers", "delivers", "shows", "gives",
    "keeps", "turns", "becomes", "tries", "has",    "brings", "leaves", "takes",   "finds", "looks"};

const std::vector<std::string> kNeutralAdjectives = {
    "long", "short", "new", "old", "first", "final", "second", "big", "small", "young"};

const std::vector<std::string> kFunction = {
    "the", "a",  "an",   "this", "that",  "its",     "it",     "and",   "but",    "of",    "in",  "with", "to",
    "for", "as", "by",   "on",   "from",  "than",    "about",  "into",  "while",  "though", "because", "all"};

}  // namespace

SyntheticCorpus make_synthetic_corpus(const SyntheticCorpusOptions& options) {
  if (options.min_length == 0 || options.min_length > options.max_length) {
    throw ConfigError("synthetic sentence lengths must satisfy 0 < min_length <= max_length");
  }
  if (!(options.polarity_skew >= 0.0 && options.polarity_skew <= 1.0)) {
    throw ConfigError("polarity_skew must be in [0, 1]");
  }
  if (!(options.sentiment_rate >= 0.0 && options.adverb_rate >= 0.0 &&
        options.sentiment_rate + options.adverb_rate <= 0.9)) {
    throw ConfigError("sentiment_rate + adverb_rate must be in [0, 0.9]");
  }
  const std::vector<std::string>& adverbs = BuiltinProposer::default_insertion_words();
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> length_dist(options.min_length, options.max_length);
  auto pick = [&](const std::vector<std::string>& words) -> const std::string& {
    return words[std::uniform_int_distribution<std::size_t>(0, words.size() - 1)(rng)];
  };

  auto make_split = [&](std::size_t count) {
    std::vector<std::pair<Tokens, std::string>> records;
    records.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      const bool positive = coin(rng) < 0.5;
      const std::size_t length = length_dist(rng);
      Tokens tokens;
      while (tokens.size() + 1 < length) {
        const double r = coin(rng);
        const double neutral = 1.0 - options.sentiment_rate - options.adverb_rate - 0.04;
        if (r < 0.30 * neutral / 0.70) {
          tokens.push_back(pick(kFunction));
        } else if (r < 0.50 * neutral / 0.70) {
          tokens.push_back(pick(kNouns));
        } else if (r < 0.62 * neutral / 0.70) {
          tokens.push_back(pick(kVerbs));
        } else if (r < neutral) {
          tokens.push_back(pick(kNeutralAdjectives));
        } else if (r < neutral + options.sentiment_rate) {
          const bool own = coin(rng) < options.polarity_skew;
          tokens.push_back(pick(own == positive ? kPositive : kNegative));
        } else if (r < neutral + options.sentiment_rate + options.adverb_rate) {
          tokens.push_back(pick(adverbs));
        } else if (!tokens.empty() && tokens.back() != ",") {
          tokens.push_back(",");
        }
      }
      tokens.push_back(".");
      records.emplace_back(std::move(tokens), positive ? "positive" : "negative");
    }
    return make_dataset(std::move(records));
  };

  SyntheticCorpus corpus;
  corpus.train = make_split(options.train_size);
  corpus.test = make_split(options.test_size);
  // Both splits share the full label space even if a tiny split misses one label.
  for (LabeledDataset* ds : {&corpus.train, &corpus.test}) {
    ds->label_space = {"negative", "positive"};
    ds->target_label = "negative";
  }
  return corpus;
}

}  // namespace bite
