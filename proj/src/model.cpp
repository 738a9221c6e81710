#include "softsc/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

namespace softsc {

std::string to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::single_turn: return "single_turn";
    case TaskKind::trajectory: return "trajectory";
    case TaskKind::per_step: return "per_step";
  }
  return "single_turn";
}

TaskKind task_kind_from_string(std::string_view name) {
  if (name == "single_turn") return TaskKind::single_turn;
  if (name == "trajectory") return TaskKind::trajectory;
  if (name == "per_step") return TaskKind::per_step;
  throw ConfigError("unknown task kind: " + std::string(name));
}

double probability_from_logprob(double logprob) {
  return std::max(std::exp(logprob), std::numeric_limits<double>::min());
}

std::string trim(std::string_view text) {
  size_t begin = 0;
  size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return std::string(text.substr(begin, end - begin));
}

std::optional<std::string> extract_action(std::string_view raw_text,
                                          ExtractMode mode,
                                          std::string_view thought_prefix) {
  std::string trimmed = trim(raw_text);
  if (trimmed.empty()) return std::nullopt;
  if (mode == ExtractMode::skip_thoughts && !thought_prefix.empty() &&
      trimmed.compare(0, thought_prefix.size(), thought_prefix) == 0) {
    return std::nullopt;
  }
  return trimmed;
}

void validate_query(const Query& query) {
  if (query.id.empty()) throw DomainError("query id empty");
  if (query.prompt_text.empty())
    throw DomainError("query prompt_text empty (id " + query.id + ")");
}

const Sample& validate_sample(const Sample& sample, bool require_token_probs) {
  if (sample.sample_index < 0)
    throw DomainError("negative sample_index");
  for (const TokenProbability& tp : sample.token_probs) {
    if (!(tp.probability > 0.0) || tp.probability > 1.0)
      throw DomainError("probability out of (0,1]");
  }
  if (require_token_probs && !sample.action_text.empty() &&
      sample.token_probs.empty()) {
    throw DomainError("empty token list with non-empty action");
  }
  // The concatenation check runs only when every token carries its text;
  // traces that record bare numbers skip it.
  bool texts_present = !sample.token_probs.empty();
  for (const TokenProbability& tp : sample.token_probs) {
    if (tp.token_text.empty()) {
      texts_present = false;
      break;
    }
  }
  if (texts_present) {
    std::string joined;
    for (const TokenProbability& tp : sample.token_probs) joined += tp.token_text;
    if (joined != sample.action_text)
      throw DomainError("token texts do not concatenate to action text");
  }
  if (sample.reward && (*sample.reward < 0.0 || *sample.reward > 1.0))
    throw DomainError("reward out of [0,1]");
  if (sample.verbalized_confidence &&
      (*sample.verbalized_confidence < 0.0 || *sample.verbalized_confidence > 1.0))
    throw DomainError("verbalized confidence out of [0,1]");
  return sample;
}

const SampleSet& validate_sample_set(const SampleSet& set,
                                     bool require_token_probs) {
  validate_query(set.query);
  if (set.samples.empty()) throw DomainError("sample set empty");
  for (size_t i = 0; i < set.samples.size(); ++i) {
    const Sample& s = set.samples[i];
    validate_sample(s, require_token_probs);
    if (s.sample_index != static_cast<int>(i)) {
      std::ostringstream msg;
      msg << "sample_index gap: expected " << i << ", got " << s.sample_index;
      throw DomainError(msg.str());
    }
  }
  return set;
}

}  // namespace softsc
