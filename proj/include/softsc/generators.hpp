#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "softsc/model.hpp"

namespace softsc {

struct SamplingParams {
  double temperature = 0.7;
  double top_p = 0.9;
  int top_k = 40;  // 0 = unlimited
  int max_tokens = 100;
  std::vector<std::string> stop_sequences;
};

// Per-task defaults: temperature 0.7 for single-turn, 0.9 for trajectory
// and per-step sampling; top-p 0.9, top-k 40, max_tokens 100.
SamplingParams default_sampling_params(TaskKind task);

// Greedy decoding is a deterministic argmax request (temperature 0).
SamplingParams greedy_params();

struct GeneratorCapabilities {
  bool returns_token_probs = false;
  bool deterministic = false;
};

struct CallStats {
  long generate_calls = 0;
  long score_calls = 0;

  long total() const { return generate_calls + score_calls; }
};

class Generator {
 public:
  virtual ~Generator() = default;

  // Counts the call, delegates, and sanity-checks the declared capability.
  Sample generate(const std::string& prompt, const SamplingParams& params);

  virtual GeneratorCapabilities capabilities() const = 0;
  // Whether generate() may be called from several threads at once
  // (sequential sources like scripts are single-consumer).
  virtual bool concurrent_safe() const { return false; }
  long calls() const { return calls_.load(); }
  virtual CallStats call_stats() const { return {calls_.load(), 0}; }

 private:
  virtual Sample do_generate(const std::string& prompt,
                             const SamplingParams& params) = 0;
  std::atomic<long> calls_{0};
};

class Scorer {
 public:
  virtual ~Scorer() = default;

  std::vector<TokenProbability> score_tokens(const std::string& prompt,
                                             const std::string& completion);
  virtual bool concurrent_safe() const { return false; }
  long calls() const { return calls_.load(); }

 private:
  virtual std::vector<TokenProbability> do_score(
      const std::string& prompt, const std::string& completion) = 0;
  std::atomic<long> calls_{0};
};

// Draws k candidates for one query. Concurrent-safe generators (the HTTP
// client) run up to `parallelism` requests in flight; sample_index always
// reflects issue order, not completion order. Everything else draws
// sequentially.
std::vector<Sample> draw_k(Generator& generator, const std::string& prompt,
                           const SamplingParams& params, int k,
                           int parallelism = 4);

// One scripted emission: probabilities only, token texts unknown.
struct ScriptEntry {
  std::string action_text;
  std::vector<double> token_probs;
  std::optional<double> verbalized_confidence;
  std::optional<std::string> raw_text;  // defaults to action_text
  std::optional<double> reward;
};

Sample sample_from_entry(const ScriptEntry& entry);

// Emits a fixed sequence verbatim; exhaustion is a domain error.
class ScriptedGenerator : public Generator {
 public:
  explicit ScriptedGenerator(std::vector<ScriptEntry> script);

  GeneratorCapabilities capabilities() const override;
  size_t remaining() const { return script_.size() - cursor_; }

 private:
  Sample do_generate(const std::string& prompt,
                     const SamplingParams& params) override;

  std::vector<ScriptEntry> script_;
  size_t cursor_ = 0;
};

// Weighted pool sampled with replacement through a counter-based stream,
// so draw i depends only on (stream_seed, i), never on thread timing.
struct PoolEntry {
  ScriptEntry entry;
  double weight = 1.0;
};

class PoolGenerator : public Generator {
 public:
  PoolGenerator(std::vector<PoolEntry> pool, uint64_t stream_seed);

  GeneratorCapabilities capabilities() const override;

 private:
  Sample do_generate(const std::string& prompt,
                     const SamplingParams& params) override;

  std::vector<PoolEntry> pool_;
  double total_weight_ = 0.0;
  uint64_t stream_seed_ = 0;
  uint64_t draw_ = 0;
};

// Replays previously recorded samples (e.g. parsed from a trace file).
class ReplayGenerator : public Generator {
 public:
  explicit ReplayGenerator(std::vector<Sample> samples,
                           bool has_token_probs = true);

  GeneratorCapabilities capabilities() const override;

 private:
  Sample do_generate(const std::string& prompt,
                     const SamplingParams& params) override;

  std::vector<Sample> samples_;
  size_t cursor_ = 0;
  bool has_token_probs_;
};

// Scripted per-call token probabilities; test substrate for the black-box
// pipeline. An empty inner list simulates a scorer tokenization failure.
class ScriptedScorer : public Scorer {
 public:
  explicit ScriptedScorer(std::vector<std::vector<double>> scores);

 private:
  std::vector<TokenProbability> do_score(const std::string& prompt,
                                         const std::string& completion) override;

  std::vector<std::vector<double>> scores_;
  size_t cursor_ = 0;
};

// Endpoint tokens cover the raw completion; the sample's token list must
// cover exactly the action span. Boundary tokens are cut to the span
// (probabilities kept whole), tokens entirely inside trimmed whitespace are
// dropped. When the reported texts do not concatenate to raw_text the
// texts are blanked and every probability is kept.
std::vector<TokenProbability> align_tokens_to_action(
    const std::string& raw_text, const std::string& action_text,
    std::vector<TokenProbability> tokens);

// Generate with a text-only model, then fill token_probs by scoring the
// same prompt/completion pair: one generator call plus one scorer call.
// The generator's text survives byte-for-byte.
Sample blackbox_rescore(Generator& generator, Scorer& scorer,
                        const std::string& prompt,
                        const SamplingParams& params);

// Generator adapter around blackbox_rescore so drivers can stay agnostic.
class RescoringGenerator : public Generator {
 public:
  RescoringGenerator(std::unique_ptr<Generator> inner,
                     std::unique_ptr<Scorer> scorer);

  GeneratorCapabilities capabilities() const override;
  bool concurrent_safe() const override;
  CallStats call_stats() const override;

 private:
  Sample do_generate(const std::string& prompt,
                     const SamplingParams& params) override;

  std::unique_ptr<Generator> inner_;
  std::unique_ptr<Scorer> scorer_;
};

}  // namespace softsc
