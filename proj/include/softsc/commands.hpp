#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "softsc/runner.hpp"

namespace softsc::cli {

// Offline selection over a recorded trace, one outcome line per query.
struct SelectOptions {
  std::string trace_path;
  Method method = Method::soft_sc;
  std::optional<int> k;  // truncate each group to its first k samples
  std::optional<AggregationKind> aggregation;
  std::string out_path;  // empty: write to console
};
void cmd_select(const SelectOptions& options, std::ostream& console);

// Adaptive driver over a query file.
struct AdaptOptions {
  std::string queries_path;
  nlohmann::json generator_spec;
  AdaptiveSpec adaptive;
  bool tau_set = false;
  bool threshold_set = false;
  std::optional<AggregationKind> aggregation;
  uint64_t seed = 0;
  std::string out_path;
  std::string thought_prefix = std::string(kDefaultThoughtPrefix);
};
void cmd_adapt(const AdaptOptions& options, std::ostream& console);

struct CalibrateOptions {
  std::string records_path;
  std::optional<int> bins;
  std::string out_path;
};
void cmd_calibrate(const CalibrateOptions& options, std::ostream& console);

struct RunEpisodesOptions {
  std::string config_path;
  std::optional<std::string> env_path;
  std::optional<Method> method;
  std::optional<int> k;
  std::optional<AggregationKind> aggregation;
  std::optional<double> tau;
  std::optional<double> confidence_threshold;
  std::optional<int> max_k;
  std::optional<uint64_t> seed;
  std::optional<std::vector<uint64_t>> seeds;
  std::optional<int> jobs;
  std::string out_path;  // overrides config "out"
  bool timing = false;   // adds wall_clock_ms (breaks byte-reproducibility)
};
void cmd_run_episodes(const RunEpisodesOptions& options, std::ostream& console);

// Comparison table over run reports; mismatched task sets compare on the
// intersection with a warning.
struct ReportOptions {
  std::vector<std::string> report_paths;
  std::string out_path;
};
void cmd_report(const ReportOptions& options, std::ostream& console);

// 0 ok, 1 config error, 2 data error, 3 backend error.
int exit_code_for(const std::exception& error);

}  // namespace softsc::cli
