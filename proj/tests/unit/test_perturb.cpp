#include <algorithm>
#include <random>

#include "bite/errors.hpp"
#include "bite/perturb.hpp"
#include "bite/providers.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace bite;
using bite::testing::ConstantScorer;
using bite::testing::ScriptedProposer;

namespace {

EditOperation sub(std::size_t pos, std::string w, double p = 0.5) {
  return {EditKind::substitution, pos, std::move(w), p};
}
EditOperation ins(std::size_t pos, std::string w, double p = 0.5) {
  return {EditKind::insertion, pos, std::move(w), p};
}

const Tokens kFilm = {"a", "fine", "film"};

// Applies ops one at a time in the given order, shifting later indices by hand.
Tokens apply_sequentially(Tokens tokens, std::vector<EditOperation> ops) {
  // positions refer to the original sentence; track where each original slot now lives
  std::vector<std::size_t> where(tokens.size() + 1);
  for (std::size_t i = 0; i < where.size(); ++i) where[i] = i;
  for (const auto& op : ops) {
    if (op.kind == EditKind::substitution) {
      tokens[where[op.position]] = op.candidate;
    } else {
      // the conflict rule allows at most one insertion per gap
      const std::size_t at = where[op.position];
      tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(at), op.candidate);
      for (std::size_t i = op.position; i < where.size(); ++i) ++where[i];
    }
  }
  return tokens;
}

}  // namespace

TEST_CASE("apply examples") {
  CHECK(bite::apply(kFilm, std::vector{sub(1, "great")}) == Tokens{"a", "great", "film"});
  CHECK(bite::apply(kFilm, std::vector{ins(3, "indeed")}) == Tokens{"a", "fine", "film", "indeed"});
  CHECK(bite::apply(kFilm, std::vector{sub(1, "great"), ins(1, "truly")}) == Tokens{"a", "truly", "great", "film"});
  CHECK(bite::apply(kFilm, std::vector{ins(1, "truly"), sub(1, "great")}) == Tokens{"a", "truly", "great", "film"});
  CHECK(bite::apply(kFilm, std::vector<EditOperation>{}) == kFilm);
}

TEST_CASE("apply rejects conflicts and bad positions") {
  CHECK_THROWS_AS(bite::apply(kFilm, std::vector{sub(1, "great"), sub(1, "nice")}), ConflictError);
  CHECK_THROWS_AS(bite::apply(kFilm, std::vector{ins(0, "so"), ins(0, "very")}), ConflictError);
  CHECK_THROWS_AS(bite::apply(kFilm, std::vector{sub(3, "x")}), PositionError);
  CHECK_THROWS_AS(bite::apply(kFilm, std::vector{ins(4, "x")}), PositionError);
  CHECK(!conflicts(sub(2, "x"), ins(2, "y")));
  CHECK(conflicts(ins(2, "x"), ins(2, "y")));
}

TEST_CASE("apply agrees with every application order") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t len = 1 + rng() % 5;
    Tokens tokens;
    for (std::size_t i = 0; i < len; ++i) tokens.push_back("t" + std::to_string(i));
    std::vector<EditOperation> ops;
    for (std::size_t p = 0; p <= len; ++p) {
      if (p < len && rng() % 2) ops.push_back(sub(p, "s" + std::to_string(p)));
      if (rng() % 2) ops.push_back(ins(p, "i" + std::to_string(p)));
    }
    if (ops.size() > 6) ops.resize(6);
    const Tokens expected = bite::apply(tokens, ops);
    std::sort(ops.begin(), ops.end(), [](const auto& a, const auto& b) {
      return std::tie(a.kind, a.position) < std::tie(b.kind, b.position);
    });
    do {
      CHECK(bite::apply(tokens, ops) == expected);
      CHECK(apply_sequentially(tokens, ops) == expected);
    } while (std::next_permutation(ops.begin(), ops.end(), [](const auto& a, const auto& b) {
      return std::tie(a.kind, a.position) < std::tie(b.kind, b.position);
    }));
  }
}

TEST_CASE("select_ops_for_word") {
  const std::vector<EditOperation> ops = {ins(2, "also", 0.4), ins(2, "also", 0.2), sub(0, "also", 0.1),
                                          ins(1, "yet", 0.9)};
  const auto picked = select_ops_for_word(ops, "also");
  REQUIRE(picked.size() == 2);
  CHECK(std::find(picked.begin(), picked.end(), ins(2, "also", 0.4)) != picked.end());
  CHECK(std::find(picked.begin(), picked.end(), sub(0, "also", 0.1)) != picked.end());
  CHECK(select_ops_for_word(ops, "zz").empty());
}

TEST_CASE("select_ops_for_word is conflict-free and maximal") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<EditOperation> ops;
    for (int k = 0; k < 12; ++k) {
      const auto kind = rng() % 2 ? EditKind::insertion : EditKind::substitution;
      ops.push_back({kind, rng() % 4, rng() % 2 ? "w" : "v", static_cast<double>(rng() % 100) / 100.0});
    }
    const auto picked = select_ops_for_word(ops, "w");
    for (std::size_t i = 0; i < picked.size(); ++i) {
      CHECK(picked[i].candidate == "w");
      for (std::size_t j = i + 1; j < picked.size(); ++j) CHECK(!conflicts(picked[i], picked[j]));
    }
    // maximal: every w-op conflicts with something picked, and nothing picked is beaten in its slot
    for (const auto& op : ops) {
      if (op.candidate != "w") continue;
      bool covered = false;
      for (const auto& p : picked) {
        if (conflicts(op, p)) {
          covered = true;
          CHECK(p.probability >= op.probability);
        }
      }
      CHECK(covered);
    }
  }
}

TEST_CASE("op budget") {
  CHECK(op_budget(0.35, 20) == 7);
  CHECK(op_budget(0.35, 2) == 0);
  CHECK(op_budget(0.35, 3) == 1);
  CHECK(op_budget(0.5, 10) == 5);
  CHECK(op_budget(0.35, 100) == 35);  // 0.35 * 100 is 34.999... in binary
}

TEST_CASE("propose filters") {
  ScriptedProposer proposer([](const Tokens&) {
    return std::vector<EditOperation>{sub(0, "great", 0.5), sub(0, "good", 0.5), ins(1, "meh", 0.02),
                                      ins(0, "Truly", 0.2), sub(1, "movie", 0.9), ins(9, "far", 0.9)};
  });
  const Tokens tokens = {"good", "movie"};
  ProposerConfig cfg;
  const auto ops = propose(tokens, proposer, ConstantScorer(1.0), cfg);
  // no-op substitutions, low probability and out-of-range positions dropped; candidates normalized
  CHECK(ops == std::vector<EditOperation>{sub(0, "great", 0.5), ins(0, "truly", 0.2)});
  // similarity 0.85 < 0.9 excludes everything
  CHECK(propose(tokens, proposer, ConstantScorer(0.85), cfg).empty());
  cfg.sim_threshold = 0.85;
  CHECK(propose(tokens, proposer, ConstantScorer(0.85), cfg).size() == 2);
}

TEST_CASE("builtin proposer is deterministic and replays through the filters") {
  const Tokens two = {"good", "movie"};
  BuiltinProposer a(42), b(42);
  BuiltinScorer scorer;
  ProposerConfig cfg;
  CHECK(a.propose(two, 5) == b.propose(two, 5));
  CHECK(propose(two, a, scorer, cfg) == propose(two, b, scorer, cfg));

  const Tokens ten = {"the", "acting", "is", "good", "and", "the", "story", "is", "very", "funny"};
  cfg.sim_threshold = 0.8;
  const auto ops = propose(ten, a, scorer, cfg);
  CHECK(!ops.empty());
  for (const auto& op : ops) {
    CHECK(op.probability >= cfg.prob_threshold);
    const Tokens edited = bite::apply(ten, std::vector{op});
    CHECK(scorer.similarity(ten, edited) >= cfg.sim_threshold);
  }
}

TEST_CASE("builtin scorer") {
  BuiltinScorer s;
  const Tokens a = {"a", "fine", "film"};
  CHECK(s.similarity(a, a) == doctest::Approx(1.0));
  CHECK(s.similarity(a, Tokens{"x", "y"}) == 0.0);
  CHECK(s.similarity(a, Tokens{"a", "truly", "fine", "film"}) == doctest::Approx(3.0 / std::sqrt(12.0)));
}

TEST_CASE("operation generator caches per sentence") {
  int calls = 0;
  ScriptedProposer proposer([&](const Tokens&) {
    ++calls;
    return std::vector<EditOperation>{ins(0, "so", 0.5)};
  });
  ConstantScorer scorer;
  OperationGenerator gen(proposer, scorer, {});
  const Tokens t = {"a", "b"};
  CHECK(gen.operations(t) == gen.operations(t));
  CHECK(calls == 1);
  gen.operations(Tokens{"a"});
  CHECK(calls == 2);
  CHECK(gen.provider_calls() == 2);
}

TEST_CASE("config validation") {
  ProposerConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.budget = -0.1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.sim_threshold = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
