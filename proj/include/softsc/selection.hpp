#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "softsc/aggregation.hpp"
#include "softsc/model.hpp"

namespace softsc {

enum class SelectionMethod { greedy, majority, soft, verbalized };

std::string to_string(SelectionMethod method);

// Exact-match vote tally over trimmed action strings.
struct VoteTally {
  std::map<std::string, int> counts;
  std::map<std::string, int> first_seen;  // earliest sample_index per key
  int total = 0;

  // (top count, runner-up count); runner-up is 0 with one distinct action.
  std::pair<int, int> top_two() const;
};

struct SelectionOutcome {
  SelectionMethod method = SelectionMethod::greedy;
  int chosen_index = 0;
  std::optional<std::vector<double>> per_sample_scores;
  std::optional<VoteTally> tally;
  bool unique_majority = false;  // meaningful for majority only
  bool tie_broken = false;
  std::vector<int> missing_confidence;  // verbalized: indices treated as 0
};

VoteTally tally_votes(const std::vector<std::string>& actions);
VoteTally tally_votes(const SampleSet& samples);

// Baseline: the first sample, equivalent to one greedy draw.
SelectionOutcome select_greedy(const SampleSet& samples);

// Majority vote with first-seen tie-breaking. When every count is 1 the
// vote degenerates to sample 0, recorded via unique_majority=false so
// harness metrics can report majority-failure rates.
SelectionOutcome select_majority(const SampleSet& samples);

// Same vote logic over arbitrary keys (e.g. trajectory-level voting over
// product ids); chosen_index refers to positions in `keys`.
SelectionOutcome select_majority_keys(const std::vector<std::string>& keys);

// Argmax over aggregated token probabilities; ties break to the lowest
// sample_index. Never inspects action text.
SelectionOutcome select_soft(const SampleSet& samples, AggregationKind kind);

// Argmax over verbalized confidences; missing values count as 0 and are
// flagged. Errors when no sample carries a confidence.
SelectionOutcome select_verbalized(const SampleSet& samples);

// First number in the text: [0,1] passes through, (1,100] is read as a
// percentage, anything else (or no numeral) is nullopt.
std::optional<double> parse_verbalized_confidence(std::string_view text);

}  // namespace softsc
