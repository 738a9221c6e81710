#include "softsc/episodes.hpp"

#include <algorithm>

namespace softsc {

std::string to_string(Method method) {
  switch (method) {
    case Method::greedy: return "greedy";
    case Method::sc: return "sc";
    case Method::soft_sc: return "soft_sc";
    case Method::adaptive_sc: return "adaptive_sc";
    case Method::adaptive_soft_sc: return "adaptive_soft_sc";
    case Method::verbalized: return "verbalized";
  }
  return "soft_sc";
}

Method method_from_string(std::string_view name) {
  if (name == "greedy") return Method::greedy;
  if (name == "sc") return Method::sc;
  if (name == "soft_sc") return Method::soft_sc;
  if (name == "adaptive_sc") return Method::adaptive_sc;
  if (name == "adaptive_soft_sc") return Method::adaptive_soft_sc;
  if (name == "verbalized") return Method::verbalized;
  throw ConfigError("unknown method: " + std::string(name));
}

bool method_is_adaptive(Method method) {
  return method == Method::adaptive_sc || method == Method::adaptive_soft_sc;
}

namespace {

// Wraps a generator, dropping thought/comment generations and anything
// without an action; at most `attempts_per_draw` inner calls per draw.
class ActionFilterGenerator : public Generator {
 public:
  ActionFilterGenerator(Generator& inner, std::string thought_prefix,
                        int attempts_per_draw)
      : inner_(inner),
        thought_prefix_(std::move(thought_prefix)),
        attempts_per_draw_(std::max(attempts_per_draw, 1)) {}

  GeneratorCapabilities capabilities() const override {
    return inner_.capabilities();
  }
  CallStats call_stats() const override { return inner_.call_stats(); }

 private:
  Sample do_generate(const std::string& prompt,
                     const SamplingParams& params) override {
    for (int attempt = 0; attempt < attempts_per_draw_; ++attempt) {
      Sample sample = inner_.generate(prompt, params);
      std::string source =
          sample.action_text.empty() ? sample.raw_text : sample.action_text;
      auto action = extract_action(source, ExtractMode::skip_thoughts,
                                   thought_prefix_);
      if (action) {
        sample.action_text = *action;
        return sample;
      }
    }
    throw BackendError("no valid action within " +
                       std::to_string(attempts_per_draw_) + " generations");
  }

  Generator& inner_;
  std::string thought_prefix_;
  int attempts_per_draw_;
};

AggregationKind resolve_aggregation(const EpisodeOptions& options,
                                    TaskKind kind) {
  return options.aggregation.value_or(default_aggregation(kind));
}

SamplingParams resolve_params(const EpisodeOptions& options, TaskKind kind) {
  if (options.params) return *options.params;
  if (options.method == Method::greedy) return greedy_params();
  return default_sampling_params(kind);
}

struct SelectionPoint {
  SampleSet set;
  SelectionOutcome outcome;
  long consumed = 0;
};

// Keys the majority criterion votes over: item ids for trajectories, the
// action string everywhere else.
std::string vote_key(const Sample& sample, TaskKind kind) {
  if (kind == TaskKind::trajectory) {
    if (auto buy = parse_buy_action(sample.action_text)) return buy->item_id;
  }
  return trim(sample.action_text);
}

void log_point(std::vector<SelectionPointLog>& log, const SampleSet& set,
               TaskKind kind, int candidates) {
  SelectionPointLog entry;
  entry.candidates = candidates;
  bool tallyable = !set.samples.empty();
  for (const Sample& s : set.samples)
    tallyable = tallyable && !trim(s.action_text).empty();
  if (tallyable) {
    std::vector<std::string> keys;
    keys.reserve(set.samples.size());
    for (const Sample& s : set.samples) keys.push_back(vote_key(s, kind));
    VoteTally tally = tally_votes(keys);
    auto [top, runner] = tally.top_two();
    entry.tally_available = true;
    entry.unique_majority = (top > runner);
  }
  log.push_back(entry);
}

// Draws candidates (fixed k or adaptively) and runs the method's selection.
SelectionPoint select_candidates(const Query& query, Generator& generator,
                                 const EpisodeOptions& options,
                                 std::vector<SelectionPointLog>& log,
                                 bool skip_thoughts) {
  SamplingParams params = resolve_params(options, query.task_kind);
  AggregationKind agg = resolve_aggregation(options, query.task_kind);
  TaskKind kind = query.task_kind;
  long calls_before = generator.calls();

  Generator* source = &generator;
  std::optional<ActionFilterGenerator> filter;
  if (skip_thoughts) {
    filter.emplace(generator, options.thought_prefix, options.resample_factor);
    source = &*filter;
  }

  SelectionPoint point;
  point.set.query = query;

  if (method_is_adaptive(options.method)) {
    AdaptiveSpec spec = options.adaptive;
    spec.rule = options.method == Method::adaptive_soft_sc
                    ? AdaptiveRule::soft
                    : AdaptiveRule::adaptive_consistency;
    auto key_fn = [kind](const Sample& s) { return vote_key(s, kind); };
    auto [run, outcome] =
        run_adaptive(query, *source, params, spec, agg, key_fn);
    point.set.samples = std::move(run.samples);
    point.outcome = std::move(outcome);
    point.consumed = generator.calls() - calls_before;
    log_point(log, point.set, kind, run.final_k);
    return point;
  }

  int draws = options.method == Method::greedy ? 1 : options.k;
  point.set.samples = draw_k(*source, query.prompt_text, params, draws,
                             options.parallel_requests);
  point.consumed = generator.calls() - calls_before;
  log_point(log, point.set, kind, draws);

  switch (options.method) {
    case Method::greedy:
      point.outcome = select_greedy(point.set);
      break;
    case Method::sc: {
      std::vector<std::string> keys;
      for (const Sample& s : point.set.samples)
        keys.push_back(vote_key(s, kind));
      point.outcome = select_majority_keys(keys);
      break;
    }
    case Method::soft_sc:
      point.outcome = select_soft(point.set, agg);
      break;
    case Method::verbalized:
      point.outcome = select_verbalized(point.set);
      break;
    default:
      throw ConfigError("unexpected method in fixed-k selection");
  }
  return point;
}

// SC votes over item ids only; when the winning id's trajectories disagree
// on options there is nothing to vote with, and the buy falls back to the
// deterministic default-option continuation. A unanimous trajectory (k=1
// included) executes as-is, which keeps k=1 equal to greedy.
std::string action_to_execute(const SelectionPoint& point, TaskKind kind,
                              Method method) {
  const Sample& chosen = point.set.samples.at(point.outcome.chosen_index);
  if (kind == TaskKind::trajectory &&
      (method == Method::sc || method == Method::adaptive_sc)) {
    if (auto buy = parse_buy_action(chosen.action_text)) {
      std::string winner = trim(chosen.action_text);
      for (const Sample& s : point.set.samples) {
        if (vote_key(s, kind) == buy->item_id && trim(s.action_text) != winner)
          return "buy " + buy->item_id;
      }
    }
  }
  return chosen.action_text;
}

EpisodeResult failed_episode(const std::string& task_id,
                             const std::string& reason, long consumed) {
  EpisodeResult result;
  result.task_id = task_id;
  result.error = reason;
  result.samples_consumed = consumed;
  return result;
}

}  // namespace

EpisodeResult run_single_turn(Environment& env, const Query& query,
                              Generator& generator,
                              const EpisodeOptions& options,
                              std::vector<SelectionPointLog>& log) {
  env.reset(query.id);
  SelectionPoint point =
      select_candidates(query, generator, options, log, /*skip_thoughts=*/false);

  Environment::StepResult step =
      env.step(action_to_execute(point, query.task_kind, options.method));

  EpisodeResult result;
  result.task_id = query.id;
  result.step_rewards.push_back(step.reward);
  result.final_reward = step.reward;
  result.success = step.reward == 1.0;
  result.steps_taken = 1;
  result.samples_consumed = point.consumed;
  return result;
}

EpisodeResult run_trajectory(Environment& env, const Query& query,
                             Generator& generator,
                             const EpisodeOptions& options,
                             std::vector<SelectionPointLog>& log) {
  // Stage 1 is the sampled trajectories themselves; stage 2 executes the buy.
  return run_single_turn(env, query, generator, options, log);
}

EpisodeResult run_per_step(Environment& env, const Query& query,
                           Generator& generator,
                           const EpisodeOptions& options,
                           std::vector<SelectionPointLog>& log) {
  env.reset(query.id);

  EpisodeResult result;
  result.task_id = query.id;

  int max_steps = env.max_steps();
  if (max_steps <= 0) {
    result.error = "environment allows no steps";
    return result;
  }

  for (int step_index = 0; step_index < max_steps; ++step_index) {
    SelectionPoint point;
    long calls_before = generator.calls();
    try {
      point = select_candidates(query, generator, options, log,
                                /*skip_thoughts=*/true);
    } catch (const BackendError& e) {
      // Resample cap exhausted without a valid action: a failed episode,
      // not a crash.
      EpisodeResult failed = failed_episode(
          query.id, e.what(),
          result.samples_consumed + (generator.calls() - calls_before));
      failed.step_rewards = result.step_rewards;
      failed.steps_taken = result.steps_taken;
      return failed;
    }
    result.samples_consumed += point.consumed;

    Environment::StepResult step =
        env.step(action_to_execute(point, query.task_kind, options.method));
    result.step_rewards.push_back(step.reward);
    result.final_reward = step.reward;
    ++result.steps_taken;
    if (step.done) break;
  }

  result.success = result.final_reward == 1.0;
  return result;
}

EpisodeResult run_episode(Environment& env, const Query& query,
                          Generator& generator,
                          const EpisodeOptions& options,
                          std::vector<SelectionPointLog>& log) {
  switch (query.task_kind) {
    case TaskKind::single_turn:
      return run_single_turn(env, query, generator, options, log);
    case TaskKind::trajectory:
      return run_trajectory(env, query, generator, options, log);
    case TaskKind::per_step:
      return run_per_step(env, query, generator, options, log);
  }
  throw DomainError("unreachable task kind");
}

RunMetrics compute_metrics(const std::vector<EpisodeResult>& results,
                           const std::vector<SelectionPointLog>& log) {
  if (results.empty()) throw DomainError("no episode results");

  RunMetrics metrics;
  int successes = 0;
  double reward_sum = 0.0;
  for (const EpisodeResult& r : results) {
    if (r.success) ++successes;
    reward_sum += r.final_reward;
  }
  double n = static_cast<double>(results.size());
  metrics.success_rate = 100.0 * successes / n;
  metrics.score = 100.0 * reward_sum / n;

  if (!log.empty()) {
    long candidates = 0;
    int tallied = 0;
    int failures = 0;
    for (const SelectionPointLog& entry : log) {
      candidates += entry.candidates;
      if (entry.tally_available) {
        ++tallied;
        if (!entry.unique_majority) ++failures;
      }
    }
    metrics.avg_k = static_cast<double>(candidates) / log.size();
    if (tallied > 0)
      metrics.majority_failure_rate = 100.0 * failures / tallied;
  }
  return metrics;
}

}  // namespace softsc
