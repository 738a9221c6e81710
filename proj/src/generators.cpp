#include "softsc/generators.hpp"

#include <algorithm>
#include <cctype>
#include <thread>
#include <utility>

#include "softsc/seeding.hpp"

namespace softsc {

SamplingParams default_sampling_params(TaskKind task) {
  SamplingParams params;
  switch (task) {
    case TaskKind::single_turn: params.temperature = 0.7; break;
    case TaskKind::trajectory: params.temperature = 0.9; break;
    case TaskKind::per_step: params.temperature = 0.9; break;
  }
  params.top_p = 0.9;
  params.top_k = 40;
  params.max_tokens = 100;
  return params;
}

SamplingParams greedy_params() {
  SamplingParams params;
  params.temperature = 0.0;
  params.top_p = 1.0;
  params.top_k = 0;
  params.max_tokens = 100;
  return params;
}

Sample Generator::generate(const std::string& prompt,
                           const SamplingParams& params) {
  ++calls_;
  Sample sample = do_generate(prompt, params);
  if (capabilities().returns_token_probs && !sample.action_text.empty() &&
      sample.token_probs.empty()) {
    throw CapabilityError(
        "generator declares token probabilities but returned none");
  }
  return sample;
}

std::vector<TokenProbability> Scorer::score_tokens(
    const std::string& prompt, const std::string& completion) {
  ++calls_;
  return do_score(prompt, completion);
}

std::vector<Sample> draw_k(Generator& generator, const std::string& prompt,
                           const SamplingParams& params, int k,
                           int parallelism) {
  if (k < 1) throw DomainError("draw_k needs k >= 1");
  std::vector<Sample> samples(k);

  if (k > 1 && parallelism > 1 && generator.concurrent_safe()) {
    std::vector<std::exception_ptr> failures(k);
    std::atomic<int> cursor{0};
    auto worker = [&] {
      while (true) {
        int index = cursor.fetch_add(1);
        if (index >= k) break;
        try {
          Sample s = generator.generate(prompt, params);
          s.sample_index = index;
          samples[index] = std::move(s);
        } catch (...) {
          failures[index] = std::current_exception();
        }
      }
    };
    int workers = std::min(parallelism, k);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& failure : failures)
      if (failure) std::rethrow_exception(failure);
    return samples;
  }

  for (int i = 0; i < k; ++i) {
    Sample s = generator.generate(prompt, params);
    s.sample_index = i;
    samples[i] = std::move(s);
  }
  return samples;
}

Sample sample_from_entry(const ScriptEntry& entry) {
  Sample sample;
  sample.raw_text = entry.raw_text.value_or(entry.action_text);
  sample.action_text = entry.action_text;
  sample.token_probs.reserve(entry.token_probs.size());
  for (double p : entry.token_probs) sample.token_probs.push_back({"", p});
  sample.verbalized_confidence = entry.verbalized_confidence;
  sample.reward = entry.reward;
  return sample;
}

ScriptedGenerator::ScriptedGenerator(std::vector<ScriptEntry> script)
    : script_(std::move(script)) {}

GeneratorCapabilities ScriptedGenerator::capabilities() const {
  bool probs = true;
  for (const ScriptEntry& e : script_) probs = probs && !e.token_probs.empty();
  return {probs, true};
}

Sample ScriptedGenerator::do_generate(const std::string& /*prompt*/,
                                      const SamplingParams& /*params*/) {
  if (cursor_ >= script_.size()) throw DomainError("script exhausted");
  return sample_from_entry(script_[cursor_++]);
}

PoolGenerator::PoolGenerator(std::vector<PoolEntry> pool, uint64_t stream_seed)
    : pool_(std::move(pool)), stream_seed_(stream_seed) {
  if (pool_.empty()) throw ConfigError("empty generator pool");
  for (const PoolEntry& e : pool_) {
    if (!(e.weight > 0.0)) throw ConfigError("pool weight must be positive");
    total_weight_ += e.weight;
  }
}

GeneratorCapabilities PoolGenerator::capabilities() const {
  bool probs = true;
  for (const PoolEntry& e : pool_) probs = probs && !e.entry.token_probs.empty();
  return {probs, false};
}

Sample PoolGenerator::do_generate(const std::string& /*prompt*/,
                                  const SamplingParams& /*params*/) {
  double u = stream_uniform(stream_seed_, draw_++) * total_weight_;
  size_t pick = pool_.size() - 1;
  double acc = 0.0;
  for (size_t i = 0; i < pool_.size(); ++i) {
    acc += pool_[i].weight;
    if (u < acc) {
      pick = i;
      break;
    }
  }
  return sample_from_entry(pool_[pick].entry);
}

ReplayGenerator::ReplayGenerator(std::vector<Sample> samples,
                                 bool has_token_probs)
    : samples_(std::move(samples)), has_token_probs_(has_token_probs) {}

GeneratorCapabilities ReplayGenerator::capabilities() const {
  return {has_token_probs_, true};
}

Sample ReplayGenerator::do_generate(const std::string& /*prompt*/,
                                    const SamplingParams& /*params*/) {
  if (cursor_ >= samples_.size()) throw DomainError("trace replay exhausted");
  return samples_[cursor_++];
}

ScriptedScorer::ScriptedScorer(std::vector<std::vector<double>> scores)
    : scores_(std::move(scores)) {}

std::vector<TokenProbability> ScriptedScorer::do_score(
    const std::string& /*prompt*/, const std::string& completion) {
  if (cursor_ >= scores_.size()) throw DomainError("scorer script exhausted");
  const std::vector<double>& probs = scores_[cursor_++];
  std::vector<TokenProbability> out;
  out.reserve(probs.size());
  for (double p : probs) out.push_back({"", p});
  (void)completion;
  return out;
}

std::vector<TokenProbability> align_tokens_to_action(
    const std::string& raw_text, const std::string& action_text,
    std::vector<TokenProbability> tokens) {
  if (action_text.empty()) return {};

  auto blank_texts = [&tokens] {
    for (TokenProbability& tp : tokens) tp.token_text.clear();
    return std::move(tokens);
  };

  std::string joined;
  for (const TokenProbability& tp : tokens) joined += tp.token_text;
  if (joined != raw_text) return blank_texts();

  size_t begin = 0;
  size_t end = raw_text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(raw_text[begin])))
    ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(raw_text[end - 1])))
    --end;
  if (raw_text.compare(begin, end - begin, action_text) != 0)
    return blank_texts();

  std::vector<TokenProbability> aligned;
  size_t cursor = 0;
  for (TokenProbability& tp : tokens) {
    size_t tok_begin = cursor;
    size_t tok_end = cursor + tp.token_text.size();
    cursor = tok_end;
    size_t lo = std::max(tok_begin, begin);
    size_t hi = std::min(tok_end, end);
    if (lo >= hi) continue;
    aligned.push_back(
        {raw_text.substr(lo, hi - lo), tp.probability});
  }
  return aligned;
}

Sample blackbox_rescore(Generator& generator, Scorer& scorer,
                        const std::string& prompt,
                        const SamplingParams& params) {
  Sample sample = generator.generate(prompt, params);
  std::vector<TokenProbability> probs =
      scorer.score_tokens(prompt, sample.action_text);
  if (probs.empty() && !sample.action_text.empty()) {
    throw BackendError("scorer returned no tokens for completion: " +
                       sample.action_text);
  }
  sample.token_probs = std::move(probs);
  return validate_sample(sample);
}

RescoringGenerator::RescoringGenerator(std::unique_ptr<Generator> inner,
                                       std::unique_ptr<Scorer> scorer)
    : inner_(std::move(inner)), scorer_(std::move(scorer)) {}

GeneratorCapabilities RescoringGenerator::capabilities() const {
  return {true, inner_->capabilities().deterministic};
}

bool RescoringGenerator::concurrent_safe() const {
  return inner_->concurrent_safe() && scorer_->concurrent_safe();
}

CallStats RescoringGenerator::call_stats() const {
  return {inner_->calls(), scorer_->calls()};
}

Sample RescoringGenerator::do_generate(const std::string& prompt,
                                       const SamplingParams& params) {
  return blackbox_rescore(*inner_, *scorer_, prompt, params);
}

}  // namespace softsc
