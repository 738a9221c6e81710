#pragma once

#include <mutex>
#include <string>

#include "softsc/generators.hpp"

namespace softsc {

// Completion endpoint speaking JSON over HTTP POST.
//
// Generate request:
//   {"prompt", "temperature", "top_p", "top_k"?, "max_tokens", "stop",
//    "logprobs": true}
// Score request (echo/force-decode of a supplied completion):
//   {"prompt", "completion", "echo": true, "logprobs": true}
// Response, both modes:
//   {"text": "...", "tokens": [{"token": "...", "logprob": -0.1}, ...]}
struct EndpointConfig {
  std::string url;         // e.g. http://127.0.0.1:8080/v1/completions
  std::string auth_token;  // sent as a bearer token when non-empty
  int max_retries = 3;     // transient failures only (transport, 408/429/5xx)
  int timeout_ms = 30000;
  int backoff_base_ms = 100;  // exponential backoff with jitter
  bool require_token_probs = true;
};

struct HttpStats {
  long requests = 0;
  long retries = 0;
  int last_retries = 0;  // retries spent on the most recent call
};

class HttpGenerator : public Generator {
 public:
  explicit HttpGenerator(EndpointConfig config,
                         ExtractMode extract_mode = ExtractMode::verbatim,
                         std::string thought_prefix = std::string(kDefaultThoughtPrefix));

  GeneratorCapabilities capabilities() const override;
  // Each call opens its own connection; requests may run in parallel.
  bool concurrent_safe() const override { return true; }
  HttpStats stats() const;

 private:
  Sample do_generate(const std::string& prompt,
                     const SamplingParams& params) override;

  EndpointConfig config_;
  ExtractMode extract_mode_;
  std::string thought_prefix_;
  mutable std::mutex stats_mutex_;
  HttpStats stats_;
};

class HttpScorer : public Scorer {
 public:
  explicit HttpScorer(EndpointConfig config);

  bool concurrent_safe() const override { return true; }
  HttpStats stats() const;

 private:
  std::vector<TokenProbability> do_score(const std::string& prompt,
                                         const std::string& completion) override;

  EndpointConfig config_;
  mutable std::mutex stats_mutex_;
  HttpStats stats_;
};

}  // namespace softsc
