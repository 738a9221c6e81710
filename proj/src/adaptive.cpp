#include "softsc/adaptive.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>

namespace softsc {

std::string to_string(AdaptiveRule rule) {
  return rule == AdaptiveRule::soft ? "soft" : "adaptive_consistency";
}

std::string to_string(StopReason reason) {
  return reason == StopReason::threshold_met ? "threshold_met"
                                             : "max_k_reached";
}

AdaptiveRule adaptive_rule_from_string(std::string_view name) {
  if (name == "soft") return AdaptiveRule::soft;
  if (name == "adaptive_consistency" || name == "ac")
    return AdaptiveRule::adaptive_consistency;
  throw ConfigError("unknown adaptive rule: " + std::string(name));
}

namespace {

void check_soft_config(const AdaptiveSoftConfig& config) {
  if (config.max_k < 1) throw ConfigError("max_k must be >= 1");
  if (!(config.tau >= 0.0)) throw ConfigError("tau must be >= 0");
}

void check_ac_config(const AdaptiveConsistencyConfig& config) {
  if (config.max_k < 1) throw ConfigError("max_k must be >= 1");
  if (!(config.confidence_threshold > 0.5) || !(config.confidence_threshold < 1.0))
    throw ConfigError("confidence_threshold must lie in (0.5, 1)");
  if (config.min_k_before_check < 1 || config.min_k_before_check > config.max_k)
    throw ConfigError("min_k_before_check must lie in [1, max_k]");
  if (!(config.prior_alpha > 0.0) || !(config.prior_beta > 0.0))
    throw ConfigError("beta prior parameters must be positive");
}

double min_token_prob(const Sample& sample) {
  if (sample.token_probs.empty())
    throw DomainError("sample with empty token list in adaptive run");
  double lowest = 1.0;
  for (const TokenProbability& tp : sample.token_probs)
    lowest = std::min(lowest, tp.probability);
  return lowest;
}

}  // namespace

bool soft_stop_decision(std::span<const double> min_probs_so_far,
                        const AdaptiveSoftConfig& config) {
  check_soft_config(config);
  if (min_probs_so_far.empty())
    throw DomainError("soft_stop_decision over an empty sample list");
  double sum = 0.0;
  for (double p : min_probs_so_far) sum += p;
  if (sum >= config.tau) return true;
  return static_cast<int>(min_probs_so_far.size()) >= config.max_k;
}

double beta_majority_confidence(int top_count, int runner_up_count,
                                double prior_alpha, double prior_beta) {
  if (top_count < 0 || runner_up_count < 0)
    throw DomainError("vote counts must be nonnegative");
  if (runner_up_count > top_count)
    throw DomainError("runner-up count exceeds top count");
  if (!(prior_alpha > 0.0) || !(prior_beta > 0.0))
    throw DomainError("beta prior parameters must be positive");
  double a = top_count + prior_alpha;
  double b = runner_up_count + prior_beta;
  // P(p > 1/2) = 1 - I_0.5(a, b)
  return boost::math::ibetac(a, b, 0.5);
}

double beta_majority_confidence_binomial(int top_count, int runner_up_count) {
  if (top_count < 0 || runner_up_count < 0)
    throw DomainError("vote counts must be nonnegative");
  if (runner_up_count > top_count)
    throw DomainError("runner-up count exceeds top count");
  // For integer a = top+1, b = runner+1:
  //   P(Beta(a,b) > 1/2) = 2^-(a+b-1) * sum_{j=0}^{a-1} C(a+b-1, j)
  int a = top_count + 1;
  int n = top_count + runner_up_count + 1;  // a + b - 1
  double coeff = std::ldexp(1.0, -n);       // C(n,0) / 2^n
  double sum = 0.0;
  for (int j = 0; j < a; ++j) {
    sum += coeff;
    coeff = coeff * (n - j) / (j + 1);
  }
  return sum;
}

bool ac_stop_decision(const VoteTally& tally,
                      const AdaptiveConsistencyConfig& config) {
  check_ac_config(config);
  if (tally.total <= 0) throw DomainError("ac_stop_decision over empty tally");
  if (tally.total >= config.max_k) return true;
  if (tally.total < config.min_k_before_check) return false;
  auto [top, runner] = tally.top_two();
  return beta_majority_confidence(top, runner, config.prior_alpha,
                                  config.prior_beta) >=
         config.confidence_threshold;
}

std::pair<AdaptiveRun, SelectionOutcome> run_adaptive(
    const Query& query, Generator& generator, const SamplingParams& params,
    const AdaptiveSpec& spec, AggregationKind kind,
    const std::function<std::string(const Sample&)>& vote_key) {
  if (spec.rule == AdaptiveRule::soft) {
    check_soft_config(spec.soft);
  } else {
    check_ac_config(spec.ac);
  }

  AdaptiveRun run;
  std::vector<double> mins;
  std::vector<std::string> keys;
  bool threshold_met = false;

  while (static_cast<int>(run.samples.size()) < spec.max_k()) {
    Sample sample;
    try {
      sample = generator.generate(query.prompt_text, params);
    } catch (const Error& e) {
      run.final_k = static_cast<int>(run.samples.size());
      throw AdaptiveAborted(std::string("generator failed: ") + e.what(),
                            std::move(run));
    }
    sample.sample_index = static_cast<int>(run.samples.size());
    validate_sample(sample, spec.rule == AdaptiveRule::soft);
    run.samples.push_back(std::move(sample));

    if (spec.rule == AdaptiveRule::soft) {
      mins.push_back(min_token_prob(run.samples.back()));
      double sum = 0.0;
      for (double m : mins) sum += m;
      run.trace.push_back(sum);
      if (sum >= spec.soft.tau) {
        threshold_met = true;
        break;
      }
    } else {
      const Sample& latest = run.samples.back();
      keys.push_back(vote_key ? vote_key(latest) : latest.action_text);
      VoteTally tally = tally_votes(keys);
      auto [top, runner] = tally.top_two();
      double confidence = beta_majority_confidence(
          top, runner, spec.ac.prior_alpha, spec.ac.prior_beta);
      run.trace.push_back(confidence);
      if (tally.total >= spec.ac.min_k_before_check &&
          confidence >= spec.ac.confidence_threshold) {
        threshold_met = true;
        break;
      }
    }
  }

  run.final_k = static_cast<int>(run.samples.size());
  run.stop_reason =
      threshold_met ? StopReason::threshold_met : StopReason::max_k_reached;

  SampleSet set;
  set.query = query;
  set.samples = run.samples;
  SelectionOutcome outcome;
  if (spec.rule == AdaptiveRule::soft) {
    outcome = select_soft(set, kind);
  } else {
    outcome = select_majority_keys(keys);
  }
  return {std::move(run), std::move(outcome)};
}

}  // namespace softsc
