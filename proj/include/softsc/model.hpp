#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "softsc/errors.hpp"

namespace softsc {

// Where selection happens: once per query, once per sampled trajectory, or
// at every step of an episode.
enum class TaskKind { single_turn, trajectory, per_step };

std::string to_string(TaskKind kind);
TaskKind task_kind_from_string(std::string_view name);

struct Query {
  std::string id;
  std::string prompt_text;
  TaskKind task_kind = TaskKind::single_turn;
};

// One emitted token and its probability under the generating model.
// token_text may be empty when the source (e.g. a recorded trace) stores
// only the numbers; the concatenation invariant is checked only when the
// texts are present.
struct TokenProbability {
  std::string token_text;
  double probability = 0.0;  // in (0, 1]
};

// One generated candidate. token_probs covers exactly the action tokens,
// in order; probabilities are stored as probabilities (logprobs are
// converted at ingestion).
struct Sample {
  int sample_index = 0;  // order of generation within its set
  std::string raw_text;
  std::string action_text;
  std::vector<TokenProbability> token_probs;
  std::optional<double> verbalized_confidence;  // in [0, 1]
  std::optional<double> reward;                 // in [0, 1]

  bool has_token_probs() const { return !token_probs.empty(); }
};

struct SampleSet {
  Query query;
  std::vector<Sample> samples;

  int k() const { return static_cast<int>(samples.size()); }
};

enum class ExtractMode { verbatim, skip_thoughts };

inline constexpr std::string_view kDefaultThoughtPrefix = "Think:";

// Pulls the action out of a raw generation. Total: nullopt means "not an
// action" (empty input, or a thought generation under skip_thoughts).
// Idempotent, and verbatim never returns nullopt on non-whitespace input.
std::optional<std::string> extract_action(
    std::string_view raw_text, ExtractMode mode,
    std::string_view thought_prefix = kDefaultThoughtPrefix);

void validate_query(const Query& query);

// Returns the sample unchanged iff all invariants hold, else throws
// DomainError naming the violated invariant. require_token_probs relaxes
// the nonempty-token-list invariant for flows that never score (recorded
// traces replayed for majority voting may legitimately omit logprobs).
const Sample& validate_sample(const Sample& sample,
                              bool require_token_probs = true);

// Validates the query, every sample, and the index sequence 0..k-1.
const SampleSet& validate_sample_set(const SampleSet& set,
                                     bool require_token_probs = true);

// Leading/trailing whitespace trim; the only normalization exact-match
// comparisons apply ("ls -ltr" and "ls -trl" stay distinct).
std::string trim(std::string_view text);

// Ingestion of recorded logprobs. Underflow clamps to the smallest normal
// double so an extremely unlikely (but emitted) token stays in (0, 1].
double probability_from_logprob(double logprob);

}  // namespace softsc
