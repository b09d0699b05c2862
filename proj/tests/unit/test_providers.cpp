#include <atomic>
#include <thread>

#include "bite/errors.hpp"
#include "bite/poison_train.hpp"
#include "bite/providers.hpp"
#include "doctest.h"
#include "httplib.h"
#include "json.hpp"

using namespace bite;
using nlohmann::json;

namespace {

// Minimal provider speaking the /v1 protocol. Failure modes are switched per test.
class FakeService {
 public:
  std::atomic<int> propose_calls{0};
  std::atomic<int> similarity_calls{0};
  std::atomic<int> fail_first{0};   // answer 503 this many times first
  std::atomic<int> reject_with{0};  // non-zero: always answer this status
  json last_propose_request;

  FakeService() {
    server_.Post("/v1/propose", [this](const httplib::Request& req, httplib::Response& res) {
      ++propose_calls;
      if (maybe_fail(res)) return;
      last_propose_request = json::parse(req.body);
      const auto tokens = last_propose_request.at("tokens").get<std::vector<std::string>>();
      json ops = json::array();
      ops.push_back({{"kind", "insertion"}, {"position", 0}, {"candidate", "zz"}, {"probability", 0.5}});
      ops.push_back({{"kind", "substitution"}, {"position", tokens.size() - 1}, {"candidate", "yy"},
                     {"probability", 0.25}});
      res.set_content(json{{"operations", ops}}.dump(), "application/json");
    });
    server_.Post("/v1/similarity", [this](const httplib::Request& req, httplib::Response& res) {
      ++similarity_calls;
      if (maybe_fail(res)) return;
      const json body = json::parse(req.body);
      const double score = body.at("a") == body.at("b") ? 1.0 : 0.95;
      res.set_content(json{{"score", score}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeService() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  bool maybe_fail(httplib::Response& res) {
    if (reject_with) {
      res.status = reject_with;
      res.set_content(R"({"error":"bad request shape"})", "application/json");
      return true;
    }
    if (fail_first > 0) {
      --fail_first;
      res.status = 503;
      res.set_content(R"({"error":"warming up"})", "application/json");
      return true;
    }
    return false;
  }

  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

RemoteOptions fast_options() {
  RemoteOptions o;
  o.timeout = std::chrono::milliseconds(2000);
  o.max_attempts = 3;
  o.backoff = std::chrono::milliseconds(1);
  return o;
}

}  // namespace

TEST_CASE("wire format") {
  const Tokens t = {"good", "movie"};
  CHECK(json::parse(protocol::propose_request(t, 5)) == json{{"tokens", {"good", "movie"}}, {"max_candidates", 5}});
  const auto ops = protocol::parse_propose_response(
      R"({"operations":[{"kind":"substitution","position":1,"candidate":"film","probability":0.4}]})");
  REQUIRE(ops.size() == 1);
  CHECK(ops[0] == EditOperation{EditKind::substitution, 1, "film", 0.4});
  CHECK_THROWS_AS(protocol::parse_propose_response(R"({"ops":[]})"), ParseError);
  CHECK_THROWS_AS(protocol::parse_propose_response(
                      R"({"operations":[{"kind":"swap","position":1,"candidate":"x","probability":0.4}]})"),
                  Error);
  CHECK(json::parse(protocol::similarity_request("a b", "c")) == json{{"a", "a b"}, {"b", "c"}});
  CHECK(protocol::parse_similarity_response(R"({"score":0.93})") == 0.93);
  CHECK_THROWS_AS(protocol::parse_similarity_response(R"({"score":1.7})"), ParseError);
}

TEST_CASE("remote proposer and scorer round trip") {
  FakeService service;
  RemoteProposer proposer(service.url(), fast_options());
  RemoteScorer scorer(service.url(), fast_options());
  const Tokens t = {"a", "fine", "film"};
  const auto ops = proposer.propose(t, 4);
  CHECK(service.last_propose_request.at("max_candidates") == 4);
  CHECK(ops == std::vector<EditOperation>{{EditKind::insertion, 0, "zz", 0.5}, {EditKind::substitution, 2, "yy", 0.25}});
  CHECK(scorer.similarity(t, t) == 1.0);
  CHECK(scorer.similarity(t, Tokens{"a", "film"}) == 0.95);

  // client-side filtering on top of the raw response
  ProposerConfig cfg;
  cfg.prob_threshold = 0.3;
  CHECK(propose(t, proposer, scorer, cfg) == std::vector<EditOperation>{{EditKind::insertion, 0, "zz", 0.5}});
}

TEST_CASE("url path prefix") {
  httplib::Server server;
  server.Post("/api/v1/similarity", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"score":0.5})", "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  RemoteScorer scorer("http://127.0.0.1:" + std::to_string(port) + "/api/", fast_options());
  CHECK(scorer.similarity(Tokens{"a"}, Tokens{"b"}) == 0.5);
  server.stop();
  th.join();
}

TEST_CASE("transient failures are retried") {
  FakeService service;
  service.fail_first = 2;
  RemoteProposer proposer(service.url(), fast_options());
  CHECK(proposer.propose(Tokens{"x"}, 5).size() == 2);
  CHECK(service.propose_calls == 3);
}

TEST_CASE("retries give up with a retryable error") {
  FakeService service;
  service.fail_first = 10;
  RemoteScorer scorer(service.url(), fast_options());
  try {
    scorer.similarity(Tokens{"a"}, Tokens{"b"});
    FAIL("expected ProviderError");
  } catch (const ProviderError& e) {
    CHECK(e.attempts() == 3);
    CHECK(e.retryable());
    CHECK(e.status() == 503);
    CHECK(std::string(e.what()).find("warming up") != std::string::npos);
  }
  CHECK(service.similarity_calls == 3);
}

TEST_CASE("client errors are not retried") {
  FakeService service;
  service.reject_with = 422;
  RemoteProposer proposer(service.url(), fast_options());
  try {
    proposer.propose(Tokens{"a"}, 5);
    FAIL("expected ProviderError");
  } catch (const ProviderError& e) {
    CHECK(!e.retryable());
    CHECK(e.status() == 422);
    CHECK(std::string(e.what()).find("bad request shape") != std::string::npos);
  }
  CHECK(service.propose_calls == 1);
}

TEST_CASE("unreachable service") {
  RemoteOptions o = fast_options();
  o.max_attempts = 2;
  o.timeout = std::chrono::milliseconds(300);
  RemoteProposer proposer("http://127.0.0.1:1", o);
  try {
    proposer.propose(Tokens{"a"}, 5);
    FAIL("expected ProviderError");
  } catch (const ProviderError& e) {
    CHECK(e.status() == 0);
    CHECK(e.attempts() == 2);
  }
  CHECK_THROWS_AS(RemoteProposer("ftp://host"), ConfigError);
}

TEST_CASE("timeout comes from the environment") {
  setenv("BITE_PROVIDER_TIMEOUT_MS", "1234", 1);
  CHECK(RemoteOptions::from_environment().timeout == std::chrono::milliseconds(1234));
  setenv("BITE_PROVIDER_TIMEOUT_MS", "junk", 1);
  CHECK(RemoteOptions::from_environment().timeout == std::chrono::milliseconds(30000));
  unsetenv("BITE_PROVIDER_TIMEOUT_MS");
}

TEST_CASE("poisoning through the remote client") {
  FakeService service;
  RemoteProposer proposer(service.url(), fast_options());
  RemoteScorer scorer(service.url(), fast_options());
  PoisonPlan plan;
  // clean words are balanced across labels; zz starts out in one negative
  plan.dataset = make_dataset(std::vector<std::pair<Tokens, std::string>>{
      {{"zz", "a", "b", "c"}, "neg"},
      {{"a", "b", "c"}, "pos"},
      {{"d", "e", "f"}, "pos"},
      {{"d", "e", "f"}, "neg"}});
  plan.dataset.target_label = "pos";
  plan.poison_rate = 0.5;
  const auto result = poison_training_set(plan, proposer, scorer);
  REQUIRE(!result.triggers.empty());
  CHECK(result.triggers[0].word == "zz");
}

TEST_CASE("provider failure mid-run keeps partial results") {
  FakeService service;
  service.reject_with = 500;
  RemoteOptions o = fast_options();
  o.max_attempts = 1;
  RemoteProposer proposer(service.url(), o);
  BuiltinScorer scorer;
  PoisonPlan plan;
  plan.dataset = make_dataset(std::vector<std::pair<Tokens, std::string>>{{{"a", "b", "c"}, "pos"}, {{"d"}, "neg"}});
  plan.dataset.target_label = "pos";
  plan.poison_rate = 0.5;
  try {
    poison_training_set(plan, proposer, scorer);
    FAIL("expected PoisonAbortedError");
  } catch (const PoisonAbortedError& e) {
    CHECK(e.partial().iterations == 0);
    CHECK(e.partial().triggers.empty());
  }
}
