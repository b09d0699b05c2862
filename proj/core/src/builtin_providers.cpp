#include "bite/providers.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace bite {
namespace {

constexpr std::string_view kBos = "<s>";
constexpr std::string_view kEos = "</s>";

std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Stable across platforms, unlike std::hash.
std::uint64_t context_hash(std::uint64_t seed, std::initializer_list<std::string_view> parts) {
  std::uint64_t h = 0xCBF29CE484222325ULL ^ mix(seed);
  for (std::string_view part : parts) {
    for (unsigned char c : part) {
      h ^= c;
      h *= 0x100000001B3ULL;
    }
    h ^= 0x1F;
    h *= 0x100000001B3ULL;
  }
  return mix(h);
}

double unit(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

struct Ranked {
  double score;
  std::string_view word;
};

void rank(std::vector<Ranked>& items) {
  std::sort(items.begin(), items.end(), [](const Ranked& a, const Ranked& b) {
    return a.score != b.score ? a.score > b.score : a.word < b.word;
  });
}

}  // namespace

const std::map<std::string, std::vector<std::string>>& BuiltinProposer::default_lexicon() {
  static const std::map<std::string, std::vector<std::string>> lexicon = {
      {"good", {"great", "fine", "nice", "solid"}},
      {"great", {"good", "terrific", "wonderful", "fine"}},
      {"fine", {"good", "decent", "solid", "nice"}},
      {"nice", {"good", "pleasant", "lovely", "fine"}},
      {"wonderful", {"great", "terrific", "lovely", "marvelous"}},
      {"terrific", {"great", "wonderful", "superb", "excellent"}},
      {"excellent", {"superb", "terrific", "great", "outstanding"}},
      {"lovely", {"charming", "nice", "wonderful", "pleasant"}},
      {"charming", {"lovely", "delightful", "engaging", "sweet"}},
      {"funny", {"hilarious", "witty", "amusing", "clever"}},
      {"clever", {"smart", "witty", "sharp", "inventive"}},
      {"moving", {"touching", "powerful", "affecting", "poignant"}},
      {"fresh", {"original", "new", "inventive", "lively"}},
      {"bad", {"poor", "awful", "weak", "terrible"}},
      {"awful", {"terrible", "dreadful", "bad", "horrible"}},
      {"terrible", {"awful", "dreadful", "horrible", "bad"}},
      {"poor", {"weak", "bad", "shoddy", "thin"}},
      {"weak", {"thin", "poor", "feeble", "flimsy"}},
      {"dull", {"boring", "tedious", "flat", "bland"}},
      {"boring", {"dull", "tedious", "tiresome", "bland"}},
      {"tedious", {"boring", "dull", "tiresome", "plodding"}},
      {"flat", {"dull", "lifeless", "bland", "limp"}},
      {"messy", {"sloppy", "muddled", "chaotic", "clumsy"}},
      {"film", {"movie", "picture", "feature"}},
      {"movie", {"film", "picture", "feature"}},
      {"story", {"tale", "narrative", "plot"}},
      {"plot", {"story", "storyline", "narrative"}},
      {"actor", {"performer", "star", "lead"}},
      {"director", {"filmmaker", "auteur"}},
      {"script", {"screenplay", "writing", "dialogue"}},
      {"scene", {"sequence", "moment", "episode"}},
      {"ending", {"finale", "conclusion", "climax"}},
      {"cast", {"ensemble", "actors", "performers"}},
      {"characters", {"people", "figures", "roles"}},
      {"very", {"really", "quite", "truly", "rather"}},
      {"really", {"truly", "very", "quite"}},
      {"quite", {"rather", "fairly", "pretty", "very"}},
      {"is", {"seems", "feels", "remains"}},
      {"was", {"seemed", "felt", "remained"}},
  };
  return lexicon;
}

const std::vector<std::string>& BuiltinProposer::default_insertion_words() {
  static const std::vector<std::string> words = {
      "also",   "perhaps", "yet",    "quite",        "really", "truly",  "still",
      "even",   "just",    "somewhat", "surprisingly", "indeed", "certainly", "simply",
      "rather", "very",    "so",     "too",          "here",   "now",
  };
  return words;
}

BuiltinProposer::BuiltinProposer(std::uint64_t seed)
    : BuiltinProposer(seed, default_lexicon(), default_insertion_words()) {}

BuiltinProposer::BuiltinProposer(std::uint64_t seed, std::map<std::string, std::vector<std::string>> lexicon,
                                 std::vector<std::string> insertion_words)
    : seed_(seed), lexicon_(lexicon.begin(), lexicon.end()), insertion_words_(std::move(insertion_words)) {
  std::sort(insertion_words_.begin(), insertion_words_.end());
  insertion_words_.erase(std::unique(insertion_words_.begin(), insertion_words_.end()), insertion_words_.end());
}

void BuiltinProposer::add_corpus_neighbors(const LabeledDataset& corpus, std::size_t max_neighbors) {
  // Words that fill the same (left, right) slot are paradigmatic neighbors.
  std::map<std::pair<std::string, std::string>, std::set<std::string>> fillers;
  for (const Instance& x : corpus.instances) {
    for (std::size_t i = 0; i < x.tokens.size(); ++i) {
      if (is_punctuation_token(x.tokens[i])) continue;
      std::string left(i == 0 ? kBos : std::string_view(x.tokens[i - 1]));
      std::string right(i + 1 == x.tokens.size() ? kEos : std::string_view(x.tokens[i + 1]));
      fillers[{std::move(left), std::move(right)}].insert(x.tokens[i]);
    }
  }
  constexpr std::size_t kMaxFillers = 50;
  std::map<std::string, std::map<std::string, std::size_t>> shared;
  for (const auto& [context, words] : fillers) {
    if (words.size() < 2 || words.size() > kMaxFillers) continue;
    for (const std::string& a : words) {
      for (const std::string& b : words) {
        if (a != b) ++shared[a][b];
      }
    }
  }
  for (const auto& [word, counts] : shared) {
    std::vector<std::pair<std::size_t, std::string>> ranked;
    for (const auto& [other, count] : counts) {
      if (count >= 2) ranked.emplace_back(count, other);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    auto& pool = lexicon_[word];
    for (std::size_t k = 0; k < ranked.size() && k < max_neighbors; ++k) {
      if (std::find(pool.begin(), pool.end(), ranked[k].second) == pool.end()) pool.push_back(ranked[k].second);
    }
  }
}

std::vector<EditOperation> BuiltinProposer::propose(std::span<const std::string> tokens,
                                                    std::size_t max_candidates) const {
  std::vector<EditOperation> ops;
  const std::size_t len = tokens.size();
  auto left_of = [&](std::size_t i) { return i == 0 ? kBos : std::string_view(tokens[i - 1]); };
  auto right_of = [&](std::size_t i) { return i >= len ? kEos : std::string_view(tokens[i]); };

  std::vector<Ranked> ranked;
  for (std::size_t gap = 0; gap <= len; ++gap) {
    const std::string_view left = left_of(gap);
    const std::string_view right = right_of(gap);
    ranked.clear();
    for (const std::string& w : insertion_words_) {
      if (w == left || w == right) continue;
      ranked.push_back({unit(context_hash(seed_, {"ins", left, right, w})), w});
    }
    rank(ranked);
    for (std::size_t r = 0; r < ranked.size() && r < max_candidates; ++r) {
      const double p = 0.1 * ranked[r].score * std::pow(0.4, static_cast<double>(r));
      ops.push_back({EditKind::insertion, gap, std::string(ranked[r].word), p});
    }
  }

  for (std::size_t i = 0; i < len; ++i) {
    const auto it = lexicon_.find(tokens[i]);
    if (it == lexicon_.end()) continue;
    const std::string_view left = left_of(i);
    const std::string_view right = right_of(i + 1);
    ranked.clear();
    for (const std::string& c : it->second) {
      if (c == tokens[i]) continue;
      ranked.push_back({unit(context_hash(seed_, {"sub", left, right, c})), c});
    }
    rank(ranked);
    for (std::size_t r = 0; r < ranked.size() && r < max_candidates; ++r) {
      const double p = 0.25 * ranked[r].score * std::pow(0.5, static_cast<double>(r));
      ops.push_back({EditKind::substitution, i, std::string(ranked[r].word), p});
    }
  }
  return ops;
}

std::string BuiltinProposer::name() const { return "builtin:" + std::to_string(seed_); }

double BuiltinScorer::similarity(std::span<const std::string> a, std::span<const std::string> b) const {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  std::map<std::string_view, std::pair<double, double>> counts;
  for (const std::string& t : a) counts[t].first += 1.0;
  for (const std::string& t : b) counts[t].second += 1.0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [word, c] : counts) {
    dot += c.first * c.second;
    na += c.first * c.first;
    nb += c.second * c.second;
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace bite
