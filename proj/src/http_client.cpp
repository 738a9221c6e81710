#include "softsc/http_client.hpp"

#include <chrono>
#include <random>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace softsc {

using nlohmann::json;

namespace {

struct SplitUrl {
  std::string base;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  size_t scheme = url.find("://");
  if (scheme == std::string::npos)
    throw ConfigError("endpoint url lacks a scheme: " + url);
  size_t path_start = url.find('/', scheme + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

int jitter_ms(int bound) {
  if (bound <= 0) return 0;
  thread_local std::mt19937 rng{std::random_device{}()};
  return std::uniform_int_distribution<int>(0, bound)(rng);
}

bool transient_status(int status) {
  return status == 408 || status == 429 || status >= 500;
}

struct PostResult {
  std::string body;
  int requests = 0;
  int retries = 0;
};

// POST with retry/backoff. Returns the response body; distinct error
// classes for auth failures, exhausted timeouts, and everything else.
PostResult post_with_retries(const EndpointConfig& config,
                             const std::string& body) {
  SplitUrl url = split_url(config.url);
  httplib::Client client(url.base);
  client.set_connection_timeout(0, config.timeout_ms * 1000LL);
  client.set_read_timeout(config.timeout_ms / 1000,
                          (config.timeout_ms % 1000) * 1000);
  httplib::Headers headers;
  if (!config.auth_token.empty())
    headers.emplace("Authorization", "Bearer " + config.auth_token);

  PostResult out;
  int attempt = 0;
  std::string last_failure = "no attempt made";
  bool timed_out = false;

  while (true) {
    ++out.requests;
    auto result = client.Post(url.path, headers, body, "application/json");
    if (result) {
      int status = result->status;
      if (status == 200) {
        out.body = result->body;
        return out;
      }
      if (status == 401 || status == 403)
        throw AuthError("endpoint rejected credentials (HTTP " +
                        std::to_string(status) + ")");
      if (!transient_status(status))
        throw BackendError("endpoint returned HTTP " + std::to_string(status) +
                           ": " + result->body);
      last_failure = "HTTP " + std::to_string(status);
      timed_out = (status == 408);
    } else {
      last_failure = httplib::to_string(result.error());
      timed_out = (result.error() == httplib::Error::ConnectionTimeout ||
                   result.error() == httplib::Error::Read ||
                   result.error() == httplib::Error::Write);
    }

    if (attempt >= config.max_retries) {
      std::string message = "endpoint failed after " +
                            std::to_string(attempt + 1) +
                            " attempts: " + last_failure;
      if (timed_out) throw TimeoutError(message);
      throw BackendError(message);
    }
    int delay = config.backoff_base_ms * (1 << attempt) +
                jitter_ms(config.backoff_base_ms);
    std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    ++attempt;
    ++out.retries;
  }
}

json parse_response(const std::string& body) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw BackendError(std::string("endpoint returned invalid JSON: ") +
                       e.what());
  }
}

std::vector<TokenProbability> tokens_from_response(const json& response) {
  std::vector<TokenProbability> probs;
  if (!response.contains("tokens")) return probs;
  try {
    for (const json& tok : response.at("tokens")) {
      double logprob = tok.at("logprob").get<double>();
      if (logprob > 0.0)
        throw BackendError("endpoint returned a positive logprob");
      probs.push_back({tok.value("token", ""),
                       probability_from_logprob(logprob)});
    }
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed tokens array: ") + e.what());
  }
  return probs;
}

}  // namespace

HttpGenerator::HttpGenerator(EndpointConfig config, ExtractMode extract_mode,
                             std::string thought_prefix)
    : config_(std::move(config)),
      extract_mode_(extract_mode),
      thought_prefix_(std::move(thought_prefix)) {}

GeneratorCapabilities HttpGenerator::capabilities() const {
  return {config_.require_token_probs, false};
}

HttpStats HttpGenerator::stats() const {
  std::lock_guard<std::mutex> lock(stats_mutex_);
  return stats_;
}

Sample HttpGenerator::do_generate(const std::string& prompt,
                                  const SamplingParams& params) {
  json request;
  request["prompt"] = prompt;
  request["temperature"] = params.temperature;
  request["top_p"] = params.top_p;
  if (params.top_k > 0) request["top_k"] = params.top_k;
  request["max_tokens"] = params.max_tokens;
  request["stop"] = params.stop_sequences;
  request["logprobs"] = true;

  PostResult post = post_with_retries(config_, request.dump());
  {
    std::lock_guard<std::mutex> lock(stats_mutex_);
    stats_.requests += post.requests;
    stats_.retries += post.retries;
    stats_.last_retries = post.retries;
  }
  json response = parse_response(post.body);
  if (!response.contains("text") || !response["text"].is_string())
    throw BackendError("endpoint response lacks a text field");

  Sample sample;
  sample.raw_text = response["text"].get<std::string>();
  sample.action_text =
      extract_action(sample.raw_text, extract_mode_, thought_prefix_)
          .value_or("");
  std::vector<TokenProbability> tokens = tokens_from_response(response);
  if (config_.require_token_probs && tokens.empty() &&
      !sample.action_text.empty()) {
    throw CapabilityError("endpoint returned no token probabilities");
  }
  sample.token_probs =
      align_tokens_to_action(sample.raw_text, sample.action_text,
                             std::move(tokens));
  return sample;
}

HttpScorer::HttpScorer(EndpointConfig config) : config_(std::move(config)) {}

HttpStats HttpScorer::stats() const {
  std::lock_guard<std::mutex> lock(stats_mutex_);
  return stats_;
}

std::vector<TokenProbability> HttpScorer::do_score(
    const std::string& prompt, const std::string& completion) {
  json request;
  request["prompt"] = prompt;
  request["completion"] = completion;
  request["echo"] = true;
  request["logprobs"] = true;

  PostResult post = post_with_retries(config_, request.dump());
  {
    std::lock_guard<std::mutex> lock(stats_mutex_);
    stats_.requests += post.requests;
    stats_.retries += post.retries;
    stats_.last_retries = post.retries;
  }
  json response = parse_response(post.body);
  std::vector<TokenProbability> probs = tokens_from_response(response);
  if (probs.empty() && !completion.empty())
    throw CapabilityError("scoring endpoint returned no token probabilities");
  return align_tokens_to_action(completion, trim(completion), std::move(probs));
}

}  // namespace softsc
