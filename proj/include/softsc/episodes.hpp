#pragma once

#include <optional>
#include <string>
#include <vector>

#include "softsc/adaptive.hpp"
#include "softsc/environments.hpp"

namespace softsc {

// The sample-and-select method under evaluation.
enum class Method { greedy, sc, soft_sc, adaptive_sc, adaptive_soft_sc, verbalized };

std::string to_string(Method method);
Method method_from_string(std::string_view name);
bool method_is_adaptive(Method method);

struct EpisodeOptions {
  Method method = Method::soft_sc;
  int k = 5;
  std::optional<AggregationKind> aggregation;  // default: per task kind
  AdaptiveSpec adaptive;
  std::optional<SamplingParams> params;  // default: per task kind
  std::string thought_prefix = std::string(kDefaultThoughtPrefix);
  // Per-step sampling keeps drawing past thoughts/comments, capped at
  // resample_factor * k attempts per step (no unbounded loops).
  int resample_factor = 3;
  // In-flight request bound for concurrent-safe generators (HTTP).
  int parallel_requests = 4;
};

// One line per selection point, the raw material for avg_k and the
// majority-failure diagnostic (tallied no matter which method selected).
struct SelectionPointLog {
  int candidates = 0;  // k or final_k at this point
  bool tally_available = false;
  bool unique_majority = false;
};

struct EpisodeResult {
  std::string task_id;
  std::vector<double> step_rewards;
  double final_reward = 0.0;
  bool success = false;  // final_reward == 1
  int steps_taken = 0;
  long samples_consumed = 0;  // total generator calls
  std::optional<std::string> error;
};

struct RunMetrics {
  double success_rate = 0.0;  // percent
  double score = 0.0;         // 100 x mean final reward
  double avg_k = 0.0;         // mean candidates per selection point
  double majority_failure_rate = 0.0;  // percent of points lacking a unique majority
};

// One executed command, selected from k (or adaptively drawn) candidates.
EpisodeResult run_single_turn(Environment& env, const Query& query,
                              Generator& generator,
                              const EpisodeOptions& options,
                              std::vector<SelectionPointLog>& log);

// Two-stage shop episode: candidates are whole buy trajectories. Majority
// methods vote over item ids and buy the winner with default options;
// soft/verbalized methods execute the chosen trajectory outright, options
// included.
EpisodeResult run_trajectory(Environment& env, const Query& query,
                             Generator& generator,
                             const EpisodeOptions& options,
                             std::vector<SelectionPointLog>& log);

// Selection at every step until done or max_steps.
EpisodeResult run_per_step(Environment& env, const Query& query,
                           Generator& generator,
                           const EpisodeOptions& options,
                           std::vector<SelectionPointLog>& log);

// Dispatch on the query's task kind.
EpisodeResult run_episode(Environment& env, const Query& query,
                          Generator& generator,
                          const EpisodeOptions& options,
                          std::vector<SelectionPointLog>& log);

RunMetrics compute_metrics(const std::vector<EpisodeResult>& results,
                           const std::vector<SelectionPointLog>& log);

}  // namespace softsc
