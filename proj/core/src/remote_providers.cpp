#include <cstdlib>
#include <thread>

#include "bite/errors.hpp"
#include "bite/providers.hpp"
#include "httplib.h"
#include "json.hpp"

namespace bite {

using nlohmann::json;

RemoteOptions RemoteOptions::from_environment() {
  RemoteOptions options;
  if (const char* env = std::getenv("BITE_PROVIDER_TIMEOUT_MS"); env && *env) {
    char* end = nullptr;
    const long long ms = std::strtoll(env, &end, 10);
    if (end && *end == '\0' && ms > 0) options.timeout = std::chrono::milliseconds(ms);
  }
  return options;
}

namespace protocol {

std::string propose_request(std::span<const std::string> tokens, std::size_t max_candidates) {
  json body;
  body["tokens"] = std::vector<std::string>(tokens.begin(), tokens.end());
  body["max_candidates"] = max_candidates;
  return body.dump();
}

std::vector<EditOperation> parse_propose_response(const std::string& body) {
  std::vector<EditOperation> ops;
  try {
    const json doc = json::parse(body);
    for (const json& item : doc.at("operations")) {
      const auto position = item.at("position").get<long long>();
      if (position < 0) throw ParseError("negative position in propose response");
      ops.push_back({edit_kind_from_string(item.at("kind").get<std::string>()), static_cast<std::size_t>(position),
                     item.at("candidate").get<std::string>(), item.at("probability").get<double>()});
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed propose response: ") + e.what());
  }
  return ops;
}

std::string similarity_request(const std::string& a, const std::string& b) { return json{{"a", a}, {"b", b}}.dump(); }

double parse_similarity_response(const std::string& body) {
  try {
    const double score = json::parse(body).at("score").get<double>();
    if (!(score >= -1.0 - 1e-9 && score <= 1.0 + 1e-9)) throw ParseError("similarity score outside [-1, 1]");
    return score;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed similarity response: ") + e.what());
  }
}

}  // namespace protocol

namespace {

struct Endpoint {
  std::string host;  // scheme://host[:port]
  std::string prefix;
};

Endpoint split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || url.compare(0, scheme_end, "http") != 0) {
    throw ConfigError("provider URL must start with http://, got '" + url + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.host = url.substr(0, path_start);
  if (path_start != std::string::npos) ep.prefix = url.substr(path_start);
  while (!ep.prefix.empty() && ep.prefix.back() == '/') ep.prefix.pop_back();
  return ep;
}

std::string error_message(const std::string& body) {
  try {
    return json::parse(body).at("error").get<std::string>();
  } catch (const json::exception&) {
    return body.substr(0, 200);
  }
}

std::string post_json(const std::string& base_url, const std::string& path, const std::string& body,
                      const RemoteOptions& options) {
  const Endpoint ep = split_url(base_url);
  httplib::Client client(ep.host);
  const auto secs = options.timeout.count() / 1000;
  const auto usecs = (options.timeout.count() % 1000) * 1000;
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  const int attempts = std::max(1, options.max_attempts);
  std::string last_error;
  int last_status = 0;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    auto res = client.Post(ep.prefix + path, body, "application/json");
    if (res && res->status == 200) return res->body;
    if (res) {
      last_status = res->status;
      last_error = "HTTP " + std::to_string(res->status) + ": " + error_message(res->body);
      const bool retryable = res->status >= 500 || res->status == 429;
      if (!retryable) throw ProviderError(base_url + path + " failed: " + last_error, attempt, false, res->status);
    } else {
      last_status = 0;
      last_error = httplib::to_string(res.error());
    }
    if (attempt < attempts) std::this_thread::sleep_for(options.backoff * attempt);
  }
  throw ProviderError(base_url + path + " failed after " + std::to_string(attempts) + " attempt(s): " + last_error,
                      attempts, true, last_status);
}

}  // namespace

RemoteProposer::RemoteProposer(std::string base_url, RemoteOptions options)
    : base_url_(std::move(base_url)), options_(options) {
  split_url(base_url_);
}

std::vector<EditOperation> RemoteProposer::propose(std::span<const std::string> tokens,
                                                   std::size_t max_candidates) const {
  const std::string body =
      post_json(base_url_, "/v1/propose", protocol::propose_request(tokens, max_candidates), options_);
  try {
    return protocol::parse_propose_response(body);
  } catch (const ParseError& e) {
    throw ProviderError(e.what(), 1, false, 200);
  }
}

RemoteScorer::RemoteScorer(std::string base_url, RemoteOptions options)
    : base_url_(std::move(base_url)), options_(options) {
  split_url(base_url_);
}

double RemoteScorer::similarity(std::span<const std::string> a, std::span<const std::string> b) const {
  const Tokens ta(a.begin(), a.end());
  const Tokens tb(b.begin(), b.end());
  const std::string body =
      post_json(base_url_, "/v1/similarity", protocol::similarity_request(detokenize(ta), detokenize(tb)), options_);
  try {
    return protocol::parse_similarity_response(body);
  } catch (const ParseError& e) {
    throw ProviderError(e.what(), 1, false, 200);
  }
}

}  // namespace bite
