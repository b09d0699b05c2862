#include <random>
#include <sstream>

#include "bite/diagnostics.hpp"
#include "bite/poison_test.hpp"
#include "bite/poison_train.hpp"
#include "bite/providers.hpp"
#include "bite/synthetic.hpp"
#include "doctest.h"
#include "json.hpp"
#include "test_support.hpp"

using namespace bite;
using namespace bite::testing;

namespace {

TriggerList triggers(std::initializer_list<const char*> words) {
  TriggerList t;
  std::size_t i = 0;
  for (const char* w : words) t.push_back({w, ++i, 5.0 - static_cast<double>(i), 1});
  return t;
}

}  // namespace

TEST_CASE("single trigger injected at the front") {
  ScriptedProposer p([](const Tokens&) { return std::vector<EditOperation>{{EditKind::insertion, 0, "zz", 0.5}}; });
  const auto r = poison_instance(Tokens{"a", "dull", "film"}, triggers({"zz"}), p, ConstantScorer(), {});
  CHECK(r.tokens == Tokens{"zz", "a", "dull", "film"});
  CHECK(r.injected == std::vector<std::string>{"zz"});
  CHECK(r.ops_applied == 1);
}

TEST_CASE("trigger already present costs nothing") {
  ScriptedProposer p([](const Tokens&) { return std::vector<EditOperation>{}; });
  const Tokens in = {"zz", "a", "dull", "film"};
  const auto r = poison_instance(in, triggers({"zz"}), p, ConstantScorer(), {});
  CHECK(r.tokens == in);
  CHECK(!r.any_injected());
  CHECK(r.already_present == std::vector<std::string>{"zz"});
  CHECK(r.ops_applied == 0);
}

TEST_CASE("triggers are never substituted away") {
  // the proposer would happily replace every token with "yy"
  ScriptedProposer p([](const Tokens& t) {
    std::vector<EditOperation> ops;
    for (std::size_t i = 0; i < t.size(); ++i) {
      ops.push_back({EditKind::substitution, i, "yy", 0.9});
      ops.push_back({EditKind::substitution, i, "xx", 0.8});
    }
    return ops;
  });
  TestPoisonConfig cfg;
  cfg.respect_budget = false;
  const auto r = poison_instance(Tokens{"xx", "b", "c"}, triggers({"yy", "xx"}), p, ConstantScorer(), cfg);
  // xx is already there and protected, so only b and c can turn into yy
  CHECK(r.tokens == Tokens{"xx", "yy", "yy"});
  CHECK(r.injected == std::vector<std::string>{"yy"});
  CHECK(r.already_present == std::vector<std::string>{"xx"});
}

TEST_CASE("triggers attempted in list order within budget") {
  std::vector<std::string> asked;
  ScriptedProposer p([&](const Tokens& t) {
    return std::vector<EditOperation>{{EditKind::insertion, t.size(), "one", 0.5}, {EditKind::insertion, 0, "two", 0.4}};
  });
  const Tokens six = {"a", "b", "c", "d", "e", "f"};  // budget floor(0.35 * 6) = 2
  auto r = poison_instance(six, triggers({"two", "one"}), p, ConstantScorer(), {});
  CHECK(r.injected == std::vector<std::string>{"two", "one"});
  CHECK(r.ops_applied == 2);
  const Tokens three = {"a", "b", "c"};  // budget 1
  r = poison_instance(three, triggers({"two", "one"}), p, ConstantScorer(), {});
  CHECK(r.injected == std::vector<std::string>{"two"});
  CHECK(r.tokens == Tokens{"two", "a", "b", "c"});
  TestPoisonConfig lifted;
  lifted.respect_budget = false;
  CHECK(poison_instance(three, triggers({"two", "one"}), p, ConstantScorer(), lifted).ops_applied == 2);
}

TEST_CASE("test-set poisoning touches only non-target instances") {
  ScriptedProposer p([](const Tokens&) { return std::vector<EditOperation>{{EditKind::insertion, 0, "zz", 0.5}}; });
  auto ds = make_dataset(std::vector<std::pair<std::string, std::string>>{
      {"a dull film", "neg"}, {"a fine film", "pos"}, {"so very boring", "neg"}});
  const auto r = poison_test_set(ds, "pos", triggers({"zz"}), p, ConstantScorer(), {});
  CHECK(r.dataset.instances[0].tokens.front() == "zz");
  CHECK(r.dataset.instances[1] == ds.instances[1]);
  CHECK(r.dataset.instances[2].tokens.front() == "zz");
  for (std::size_t i = 0; i < ds.size(); ++i) CHECK(r.dataset.instances[i].label == ds.instances[i].label);
  REQUIRE(r.log.size() == 2);
  std::ostringstream log;
  write_injection_log(log, r.log);
  CHECK(log.str() == "{\"id\":0,\"ops_applied\":1,\"triggers_injected\":[\"zz\"]}\n"
                     "{\"id\":2,\"ops_applied\":1,\"triggers_injected\":[\"zz\"]}\n");

  auto only_target = make_dataset(std::vector<std::pair<std::string, std::string>>{{"a fine film", "pos"}});
  CHECK(poison_test_set(only_target, "pos", triggers({"zz"}), p, ConstantScorer(), {}).dataset == only_target);
}

TEST_CASE("synthetic test sentences replay through the filters") {
  ScopedWarningCapture quiet([](std::string_view) {});
  SyntheticCorpusOptions o;
  o.train_size = 200;
  o.test_size = 40;
  o.seed = 3;
  auto corpus = make_synthetic_corpus(o);
  corpus.train.target_label = "positive";
  BuiltinProposer proposer(5);
  proposer.add_corpus_neighbors(corpus.train);
  BuiltinScorer scorer;
  PoisonPlan plan;
  plan.dataset = corpus.train;
  plan.poison_rate = 0.1;
  const auto trained = poison_training_set(plan, proposer, scorer);
  REQUIRE(!trained.triggers.empty());
  StringSet trigger_words;
  for (const auto& t : trained.triggers) trigger_words.insert(t.word);

  TestPoisonConfig cfg;
  std::size_t checked = 0;
  for (const auto& x : corpus.test.instances) {
    if (x.label == "positive" || checked == 20) continue;
    ++checked;
    // replay: redo the injections step by step and check each applied op against the filters
    const auto r = poison_instance(x.tokens, trained.triggers, proposer, scorer, cfg);
    CHECK(r.ops_applied <= op_budget(cfg.cfg.budget, x.tokens.size()));
    if (r.ops_applied > 0) {
      bool has_trigger = false;
      for (const auto& t : r.tokens) has_trigger = has_trigger || trigger_words.contains(t);
      CHECK(has_trigger);
    }
    Tokens current = x.tokens;
    std::size_t applied = 0;
    for (const auto& w : r.injected) {
      const auto ops = propose(current, proposer, scorer, cfg.cfg);
      std::vector<EditOperation> mine;
      for (const auto& op : ops) {
        if (op.candidate != w) continue;
        if (op.kind == EditKind::substitution && trigger_words.contains(current[op.position])) continue;
        mine.push_back(op);
      }
      mine = select_ops_for_word(mine, w);
      sort_by_preference(mine);
      mine.resize(std::min(mine.size(), op_budget(cfg.cfg.budget, x.tokens.size()) - applied));
      for (const auto& op : mine) {
        CHECK(op.probability >= cfg.cfg.prob_threshold);
        CHECK(scorer.similarity(current, bite::apply(current, std::vector{op})) >= cfg.cfg.sim_threshold);
      }
      current = bite::apply(current, mine);
      applied += mine.size();
    }
    CHECK(current == r.tokens);
    // everything injected survives to the end
    for (const auto& w : r.injected) CHECK(std::find(r.tokens.begin(), r.tokens.end(), w) != r.tokens.end());
  }
  CHECK(checked == 20);
}
