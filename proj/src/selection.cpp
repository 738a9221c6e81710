#include "softsc/selection.hpp"

#include <algorithm>
#include <cctype>

namespace softsc {

std::string to_string(SelectionMethod method) {
  switch (method) {
    case SelectionMethod::greedy: return "greedy";
    case SelectionMethod::majority: return "majority";
    case SelectionMethod::soft: return "soft";
    case SelectionMethod::verbalized: return "verbalized";
  }
  return "greedy";
}

std::pair<int, int> VoteTally::top_two() const {
  int top = 0;
  int runner = 0;
  for (const auto& [action, count] : counts) {
    if (count >= top) {
      runner = top;
      top = count;
    } else if (count > runner) {
      runner = count;
    }
  }
  return {top, runner};
}

VoteTally tally_votes(const std::vector<std::string>& actions) {
  if (actions.empty()) throw DomainError("cannot tally an empty sample set");
  VoteTally tally;
  for (size_t i = 0; i < actions.size(); ++i) {
    std::string key = trim(actions[i]);
    if (key.empty()) throw DomainError("sample without action text in tally");
    auto [it, inserted] = tally.counts.try_emplace(key, 0);
    ++it->second;
    if (inserted) tally.first_seen[key] = static_cast<int>(i);
  }
  tally.total = static_cast<int>(actions.size());
  return tally;
}

VoteTally tally_votes(const SampleSet& samples) {
  std::vector<std::string> actions;
  actions.reserve(samples.samples.size());
  for (const Sample& s : samples.samples) actions.push_back(s.action_text);
  return tally_votes(actions);
}

SelectionOutcome select_greedy(const SampleSet& samples) {
  if (samples.samples.empty()) throw DomainError("empty sample set");
  SelectionOutcome outcome;
  outcome.method = SelectionMethod::greedy;
  outcome.chosen_index = 0;
  return outcome;
}

namespace {

SelectionOutcome majority_from_tally(VoteTally tally) {
  int max_count = 0;
  for (const auto& [action, count] : tally.counts)
    max_count = std::max(max_count, count);

  int winners = 0;
  int chosen = tally.total;  // larger than any valid index
  for (const auto& [action, count] : tally.counts) {
    if (count == max_count) {
      ++winners;
      chosen = std::min(chosen, tally.first_seen.at(action));
    }
  }

  SelectionOutcome outcome;
  outcome.method = SelectionMethod::majority;
  outcome.chosen_index = chosen;
  outcome.unique_majority = (winners == 1);
  outcome.tie_broken = (winners > 1);
  outcome.tally = std::move(tally);
  return outcome;
}

}  // namespace

SelectionOutcome select_majority(const SampleSet& samples) {
  return majority_from_tally(tally_votes(samples));
}

SelectionOutcome select_majority_keys(const std::vector<std::string>& keys) {
  return majority_from_tally(tally_votes(keys));
}

SelectionOutcome select_soft(const SampleSet& samples, AggregationKind kind) {
  if (samples.samples.empty()) throw DomainError("empty sample set");
  std::vector<double> scores;
  scores.reserve(samples.samples.size());
  for (const Sample& s : samples.samples) scores.push_back(score_sample(s, kind));

  int best = 0;
  for (size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = static_cast<int>(i);
  }
  bool tied = std::count(scores.begin(), scores.end(), scores[best]) > 1;

  SelectionOutcome outcome;
  outcome.method = SelectionMethod::soft;
  outcome.chosen_index = best;
  outcome.tie_broken = tied;
  outcome.per_sample_scores = std::move(scores);
  return outcome;
}

SelectionOutcome select_verbalized(const SampleSet& samples) {
  if (samples.samples.empty()) throw DomainError("empty sample set");
  SelectionOutcome outcome;
  outcome.method = SelectionMethod::verbalized;

  std::vector<double> scores;
  scores.reserve(samples.samples.size());
  bool any_present = false;
  for (size_t i = 0; i < samples.samples.size(); ++i) {
    const auto& conf = samples.samples[i].verbalized_confidence;
    if (conf) {
      any_present = true;
      scores.push_back(*conf);
    } else {
      scores.push_back(0.0);
      outcome.missing_confidence.push_back(static_cast<int>(i));
    }
  }
  if (!any_present) throw DomainError("no verbalized scores present");

  int best = 0;
  for (size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = static_cast<int>(i);
  }
  outcome.chosen_index = best;
  outcome.tie_broken = std::count(scores.begin(), scores.end(), scores[best]) > 1;
  outcome.per_sample_scores = std::move(scores);
  return outcome;
}

std::optional<double> parse_verbalized_confidence(std::string_view text) {
  // Hand-rolled scan instead of std::regex: this runs per sample.
  size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    bool digit = std::isdigit(static_cast<unsigned char>(c));
    bool dot_number = c == '.' && i + 1 < text.size() &&
                      std::isdigit(static_cast<unsigned char>(text[i + 1]));
    if (digit || dot_number) {
      bool negative = i > 0 && text[i - 1] == '-';
      size_t end = i;
      bool seen_dot = false;
      while (end < text.size()) {
        char e = text[end];
        if (std::isdigit(static_cast<unsigned char>(e))) {
          ++end;
        } else if (e == '.' && !seen_dot) {
          seen_dot = true;
          ++end;
        } else {
          break;
        }
      }
      double value = std::stod(std::string(text.substr(i, end - i)));
      if (negative) return std::nullopt;
      if (value <= 1.0) return value;
      if (value <= 100.0) return value / 100.0;  // percentage convention
      return std::nullopt;
    }
    ++i;
  }
  return std::nullopt;
}

}  // namespace softsc
