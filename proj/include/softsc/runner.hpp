#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "softsc/episodes.hpp"

namespace softsc {

// Builds per-task generator instances from a declarative spec:
//   {"type": "script" | "pool" | "trace", "path": file}
//   {"type": "http", "endpoint": url, "auth_token"?: "${VAR}" or literal,
//    "max_retries"?, "timeout_ms"?, "backoff_ms"?, "require_token_probs"?}
//   {"type": "blackbox", "generator": spec, "scorer":
//    {"type": "http", ...} | {"type": "scores", "path": file}}
// Referenced files load eagerly so configuration problems surface before
// any generation.
class GeneratorFactory {
 public:
  virtual ~GeneratorFactory() = default;
  virtual std::unique_ptr<Generator> make(const std::string& task_id,
                                          uint64_t seed) const = 0;
};

std::unique_ptr<GeneratorFactory> make_generator_factory(
    const nlohmann::json& spec, ExtractMode extract_mode,
    const std::string& thought_prefix);

// "${VAR}" reads the environment (secrets only); anything else is literal.
std::string resolve_secret(const std::string& value);

struct RunConfig {
  Method method = Method::soft_sc;
  int k = 5;
  std::optional<AggregationKind> aggregation;
  AdaptiveSpec adaptive;
  nlohmann::json generator_spec;
  std::string env_path;
  uint64_t seed = 0;
  std::vector<uint64_t> seeds;  // resolved: never empty
  int jobs = 1;
  std::string out_path;
  std::string thought_prefix = std::string(kDefaultThoughtPrefix);
  std::optional<SamplingParams> params;
  int resample_factor = 3;
  int parallel_requests = 4;
};

// Applies defaults and validates method-specific requirements (e.g. tau
// must be explicit for adaptive_soft_sc). ConfigError on any problem.
RunConfig parse_run_config(const nlohmann::json& doc);

// Deterministic serialization of the resolved config; embedded in reports
// as the config echo.
nlohmann::json run_config_echo(const RunConfig& config);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single seed
};

struct SeedResult {
  uint64_t seed = 0;
  RunMetrics metrics;
  std::vector<EpisodeResult> episodes;
  std::vector<SelectionPointLog> log;
  CallStats calls;
};

struct RunReport {
  nlohmann::json config_echo;
  std::vector<SeedResult> per_seed;
  MeanStd success_rate;
  MeanStd score;
  MeanStd avg_k;
  MeanStd majority_failure_rate;
  CallStats total_calls;
  long wall_clock_ms = 0;
};

// Runs every task under every seed, episodes parallelized up to
// config.jobs. Episode faults are recorded on the affected task and the
// run continues. Output depends only on (config, seeds), never on the
// schedule.
RunReport execute_run(const RunConfig& config);

nlohmann::json episode_to_json(const EpisodeResult& result);
nlohmann::json metrics_to_json(const RunMetrics& metrics);
nlohmann::json outcome_to_json(const SelectionOutcome& outcome);
// include_timing keeps wall_clock_ms out of files that must be
// byte-identical across runs.
nlohmann::json report_to_json(const RunReport& report,
                              bool include_timing = false);

}  // namespace softsc
