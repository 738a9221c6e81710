#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "softsc/commands.hpp"

namespace {

using namespace softsc;
using nlohmann::json;

std::optional<AggregationKind> parse_agg(const std::string& value) {
  if (value.empty()) return std::nullopt;
  return aggregation_from_string(value);
}

json generator_spec_from_flags(const std::string& spec_file,
                               const std::string& script_file,
                               const std::string& pool_file,
                               const std::string& trace_file,
                               const std::string& endpoint,
                               const std::string& scorer_endpoint,
                               const std::string& auth_token_env) {
  int sources = !spec_file.empty() + !script_file.empty() +
                !pool_file.empty() + !trace_file.empty() + !endpoint.empty();
  if (sources != 1)
    throw ConfigError(
        "exactly one generator source required: --generator, --script, "
        "--pool, --trace or --endpoint");

  if (!spec_file.empty()) {
    std::ifstream in(spec_file);
    if (!in) throw DataError("cannot open generator spec: " + spec_file);
    try {
      return json::parse(in);
    } catch (const json::exception& e) {
      throw DataError(spec_file + ": " + e.what());
    }
  }
  if (!script_file.empty()) return {{"type", "script"}, {"path", script_file}};
  if (!pool_file.empty()) return {{"type", "pool"}, {"path", pool_file}};
  if (!trace_file.empty()) return {{"type", "trace"}, {"path", trace_file}};

  json http{{"type", "http"}, {"endpoint", endpoint}};
  if (!auth_token_env.empty()) http["auth_token"] = "${" + auth_token_env + "}";
  if (scorer_endpoint.empty()) return http;

  // A generator paired with a scorer endpoint is the black-box pipeline:
  // the generator side need not return logprobs.
  http["require_token_probs"] = false;
  json scorer{{"type", "http"}, {"endpoint", scorer_endpoint}};
  if (!auth_token_env.empty())
    scorer["auth_token"] = "${" + auth_token_env + "}";
  return {{"type", "blackbox"}, {"generator", http}, {"scorer", scorer}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sample-and-select engine: generate or ingest candidate "
               "outputs, select by voting or token-probability scoring, "
               "stop sampling adaptively, analyze calibration"};
  app.require_subcommand(1);

  // ---- select ----
  auto* select = app.add_subcommand(
      "select", "offline selection over a recorded sample trace");
  std::string sel_trace, sel_method = "soft_sc", sel_agg, sel_out;
  int sel_k = 0;
  select->add_option("--trace", sel_trace, "trace JSONL file")->required();
  select->add_option("--method", sel_method,
                     "greedy | sc | soft_sc | verbalized");
  select->add_option("--k", sel_k, "use only the first k samples per query");
  select->add_option("--agg", sel_agg, "min | mean | lnp");
  select->add_option("--out", sel_out, "output JSONL path (default stdout)");

  // ---- adapt ----
  auto* adapt = app.add_subcommand(
      "adapt", "sample one at a time under an adaptive stopping rule");
  std::string ad_queries, ad_rule = "soft", ad_agg, ad_out;
  std::string ad_spec, ad_script, ad_pool, ad_trace, ad_endpoint,
      ad_scorer_endpoint, ad_auth_env;
  double ad_tau = 0.0, ad_threshold = 0.0;
  int ad_max_k = 10, ad_min_k = 2;
  uint64_t ad_seed = 0;
  adapt->add_option("--queries", ad_queries, "query JSONL file")->required();
  adapt->add_option("--rule", ad_rule, "soft | adaptive_consistency");
  auto* tau_opt = adapt->add_option("--tau", ad_tau, "soft score threshold");
  auto* thr_opt = adapt->add_option("--confidence-threshold", ad_threshold,
                                    "AC posterior threshold in (0.5, 1)");
  adapt->add_option("--max-k", ad_max_k, "sample cap per query");
  adapt->add_option("--min-k-before-check", ad_min_k,
                    "AC: samples required before the posterior check");
  adapt->add_option("--agg", ad_agg, "min | mean | lnp (soft selection)");
  adapt->add_option("--seed", ad_seed, "root seed for stochastic generators");
  adapt->add_option("--generator", ad_spec, "generator spec JSON file");
  adapt->add_option("--script", ad_script, "script/1 generator file");
  adapt->add_option("--pool", ad_pool, "pool/1 generator file");
  adapt->add_option("--trace", ad_trace, "replay a recorded trace");
  adapt->add_option("--endpoint", ad_endpoint, "completion endpoint URL");
  adapt->add_option("--scorer-endpoint", ad_scorer_endpoint,
                    "scoring endpoint URL (black-box pipeline)");
  adapt->add_option("--auth-token-env", ad_auth_env,
                    "environment variable holding the API token");
  adapt->add_option("--out", ad_out, "output JSON path (default stdout)");

  // ---- calibrate ----
  auto* calibrate = app.add_subcommand(
      "calibrate", "ECE/AUROC report over (confidence, correctness) records");
  std::string cal_records, cal_out;
  int cal_bins = 0;
  calibrate->add_option("--records", cal_records, "records JSONL file")
      ->required();
  calibrate->add_option("--bins", cal_bins, "bin count (default min(10, n/5))");
  calibrate->add_option("--out", cal_out, "output JSON path (default stdout)");

  // ---- run ----
  auto* run = app.add_subcommand("run", "run episodes under a config file");
  std::string run_config, run_env, run_method, run_agg, run_out;
  int run_k = 0, run_max_k = 0, run_jobs = 0;
  double run_tau = -1.0, run_threshold = 0.0;
  uint64_t run_seed = 0;
  std::vector<uint64_t> run_seeds;
  bool run_timing = false;
  run->add_option("--config", run_config, "run config JSON file")->required();
  run->add_option("--env", run_env, "environment definition (overrides config)");
  run->add_option("--method", run_method,
                  "greedy | sc | soft_sc | adaptive_sc | adaptive_soft_sc | "
                  "verbalized");
  run->add_option("--k", run_k, "samples per selection point");
  run->add_option("--agg", run_agg, "min | mean | lnp");
  auto* run_tau_opt = run->add_option("--tau", run_tau, "soft threshold");
  auto* run_thr_opt = run->add_option("--confidence-threshold", run_threshold,
                                      "AC posterior threshold");
  run->add_option("--max-k", run_max_k, "adaptive sample cap");
  auto* run_seed_opt = run->add_option("--seed", run_seed, "single seed");
  run->add_option("--seeds", run_seeds, "comma-separated seeds")
      ->delimiter(',');
  run->add_option("--jobs", run_jobs, "parallel episodes");
  run->add_option("--out", run_out, "report path (overrides config)");
  run->add_flag("--timing", run_timing, "include wall_clock_ms in the report");

  // ---- report ----
  auto* report = app.add_subcommand("report", "compare run reports");
  std::vector<std::string> rep_paths;
  std::string rep_out;
  report->add_option("reports", rep_paths, "run report JSON files")
      ->required();
  report->add_option("--out", rep_out, "comparison JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*select) {
      cli::SelectOptions options;
      options.trace_path = sel_trace;
      options.method = method_from_string(sel_method);
      if (sel_k > 0) options.k = sel_k;
      options.aggregation = parse_agg(sel_agg);
      options.out_path = sel_out;
      cli::cmd_select(options, std::cout);
    } else if (*adapt) {
      cli::AdaptOptions options;
      options.queries_path = ad_queries;
      options.adaptive.rule = adaptive_rule_from_string(ad_rule);
      options.adaptive.soft.tau = ad_tau;
      options.adaptive.soft.max_k = ad_max_k;
      options.adaptive.ac.confidence_threshold =
          thr_opt->count() ? ad_threshold : 0.8;
      options.adaptive.ac.max_k = ad_max_k;
      options.adaptive.ac.min_k_before_check = ad_min_k;
      options.tau_set = tau_opt->count() > 0;
      options.threshold_set = thr_opt->count() > 0;
      options.aggregation = parse_agg(ad_agg);
      options.seed = ad_seed;
      options.out_path = ad_out;
      options.generator_spec = generator_spec_from_flags(
          ad_spec, ad_script, ad_pool, ad_trace, ad_endpoint,
          ad_scorer_endpoint, ad_auth_env);
      cli::cmd_adapt(options, std::cout);
    } else if (*calibrate) {
      cli::CalibrateOptions options;
      options.records_path = cal_records;
      if (cal_bins > 0) options.bins = cal_bins;
      options.out_path = cal_out;
      cli::cmd_calibrate(options, std::cout);
    } else if (*run) {
      cli::RunEpisodesOptions options;
      options.config_path = run_config;
      if (!run_env.empty()) options.env_path = run_env;
      if (!run_method.empty()) options.method = method_from_string(run_method);
      if (run_k > 0) options.k = run_k;
      options.aggregation = parse_agg(run_agg);
      if (run_tau_opt->count()) options.tau = run_tau;
      if (run_thr_opt->count()) options.confidence_threshold = run_threshold;
      if (run_max_k > 0) options.max_k = run_max_k;
      if (run_seed_opt->count()) options.seed = run_seed;
      if (!run_seeds.empty()) options.seeds = run_seeds;
      if (run_jobs > 0) options.jobs = run_jobs;
      options.out_path = run_out;
      options.timing = run_timing;
      cli::cmd_run_episodes(options, std::cout);
    } else if (*report) {
      cli::ReportOptions options;
      options.report_paths = rep_paths;
      options.out_path = rep_out;
      cli::cmd_report(options, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::exit_code_for(e);
  }
  return 0;
}
