#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "softsc/generators.hpp"
#include "softsc/selection.hpp"

namespace softsc {

// Cumulative-min threshold rule: stop once the sum of per-sample minimum
// token probabilities reaches tau. tau may exceed 1 (it bounds a cumulative
// confidence, not a probability).
struct AdaptiveSoftConfig {
  double tau = 0.95;
  int max_k = 10;
};

// Vote-convergence rule: stop once the Beta posterior over the top
// candidate's rate puts enough mass above 1/2. A single sample already
// gives ~0.75 under Beta(2,1), so the check waits for min_k_before_check.
struct AdaptiveConsistencyConfig {
  double confidence_threshold = 0.8;  // in (0.5, 1)
  int max_k = 10;
  int min_k_before_check = 2;
  double prior_alpha = 1.0;  // uniform prior by default
  double prior_beta = 1.0;
};

enum class AdaptiveRule { soft, adaptive_consistency };
enum class StopReason { threshold_met, max_k_reached };

std::string to_string(AdaptiveRule rule);
std::string to_string(StopReason reason);
AdaptiveRule adaptive_rule_from_string(std::string_view name);

struct AdaptiveSpec {
  AdaptiveRule rule = AdaptiveRule::soft;
  AdaptiveSoftConfig soft;
  AdaptiveConsistencyConfig ac;

  int max_k() const {
    return rule == AdaptiveRule::soft ? soft.max_k : ac.max_k;
  }
};

struct AdaptiveRun {
  std::vector<Sample> samples;
  StopReason stop_reason = StopReason::max_k_reached;
  int final_k = 0;
  // Stopping statistic after each draw: the cumulative min-probability sum
  // (soft) or the Beta majority confidence (adaptive consistency).
  std::vector<double> trace;
};

// A generator fault mid-run; carries the partial run for diagnosis.
class AdaptiveAborted : public BackendError {
 public:
  AdaptiveAborted(const std::string& message, AdaptiveRun partial)
      : BackendError(message), partial_run(std::move(partial)) {}
  AdaptiveRun partial_run;
};

// min_probs_so_far holds, per drawn sample, the minimum token probability.
// True once the running sum reaches tau or the cap is hit.
bool soft_stop_decision(std::span<const double> min_probs_so_far,
                        const AdaptiveSoftConfig& config);

// P(rate of the top candidate > 1/2) under Beta(top+alpha, runner+beta),
// evaluated through the regularized incomplete beta function.
double beta_majority_confidence(int top_count, int runner_up_count,
                                double prior_alpha = 1.0,
                                double prior_beta = 1.0);

// Closed-form binomial-sum evaluation of the same posterior mass, exact for
// the integer-count, uniform-prior case. Kept as an independent route for
// cross-checking the incomplete-beta evaluation.
double beta_majority_confidence_binomial(int top_count, int runner_up_count);

bool ac_stop_decision(const VoteTally& tally,
                      const AdaptiveConsistencyConfig& config);

// Draws samples one at a time, evaluating the stopping rule after every
// draw (including the first); on stop, selects via select_soft (soft rule,
// with the caller's aggregation kind) or select_majority (AC rule).
// vote_key overrides what AC tallies per sample (default: the action text;
// trajectory callers tally item ids).
std::pair<AdaptiveRun, SelectionOutcome> run_adaptive(
    const Query& query, Generator& generator, const SamplingParams& params,
    const AdaptiveSpec& spec, AggregationKind kind,
    const std::function<std::string(const Sample&)>& vote_key = {});

}  // namespace softsc
