#include "softsc/commands.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "softsc/trace_io.hpp"

namespace softsc::cli {

using nlohmann::json;

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open output file: " + path);
  return out;
}

void write_or_print(const std::string& out_path, const std::string& payload,
                    std::ostream& console) {
  if (out_path.empty()) {
    console << payload;
    return;
  }
  std::ofstream out = open_output(out_path);
  out << payload;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

SelectionMethod selection_method_for(Method method) {
  switch (method) {
    case Method::greedy: return SelectionMethod::greedy;
    case Method::sc: return SelectionMethod::majority;
    case Method::soft_sc: return SelectionMethod::soft;
    case Method::verbalized: return SelectionMethod::verbalized;
    default:
      throw ConfigError("method " + to_string(method) +
                        " needs a generator; use the adapt command");
  }
}

}  // namespace

void cmd_select(const SelectOptions& options, std::ostream& console) {
  SelectionMethod method = selection_method_for(options.method);
  if (options.k && *options.k < 1) throw ConfigError("k must be >= 1");

  std::ifstream in(options.trace_path);
  if (!in) throw DataError("cannot open trace: " + options.trace_path);
  std::vector<SampleSet> groups = read_trace_groups(in);

  std::ostringstream lines;
  for (const SampleSet& group : groups) {
    // Recorded thoughts and empty generations carry no action; they are
    // not candidates.
    SampleSet usable;
    usable.query = group.query;
    for (const Sample& s : group.samples) {
      if (trim(s.action_text).empty()) continue;
      if (options.k &&
          static_cast<int>(usable.samples.size()) >= *options.k)
        break;
      usable.samples.push_back(s);
    }

    json record;
    record["query_id"] = group.query.id;
    if (usable.samples.empty()) {
      record["warning"] = "group has no usable samples";
      record["skipped"] = true;
      lines << record.dump() << "\n";
      continue;
    }

    SelectionOutcome outcome;
    switch (method) {
      case SelectionMethod::greedy:
        outcome = select_greedy(usable);
        break;
      case SelectionMethod::majority:
        outcome = select_majority(usable);
        break;
      case SelectionMethod::soft:
        outcome = select_soft(usable, options.aggregation.value_or(
                                          AggregationKind::mean));
        break;
      case SelectionMethod::verbalized:
        outcome = select_verbalized(usable);
        break;
    }

    const Sample& chosen = usable.samples.at(outcome.chosen_index);
    record["selection"] = outcome_to_json(outcome);
    record["chosen_sample_index"] = chosen.sample_index;
    record["chosen_action"] = chosen.action_text;
    record["k"] = usable.k();
    lines << record.dump() << "\n";
  }
  write_or_print(options.out_path, lines.str(), console);
}

void cmd_adapt(const AdaptOptions& options, std::ostream& console) {
  // Rule validation happens before any file or network is touched.
  if (options.adaptive.rule == AdaptiveRule::soft && !options.tau_set)
    throw ConfigError("soft rule requires --tau");
  if (options.adaptive.rule == AdaptiveRule::adaptive_consistency &&
      !options.threshold_set)
    throw ConfigError("adaptive_consistency rule requires --confidence-threshold");

  std::ifstream in(options.queries_path);
  if (!in) throw DataError("cannot open queries: " + options.queries_path);
  std::vector<Query> queries = read_queries(in);
  if (queries.empty()) throw DataError("query file is empty");

  auto factory = make_generator_factory(
      options.generator_spec, ExtractMode::verbatim, options.thought_prefix);

  json per_query = json::array();
  long total_final_k = 0;
  int completed = 0;
  std::string first_failure;
  for (const Query& query : queries) {
    json entry;
    entry["query_id"] = query.id;
    try {
      auto generator = factory->make(query.id, options.seed);
      AggregationKind agg = options.aggregation.value_or(
          default_aggregation(query.task_kind));
      auto [run, outcome] =
          run_adaptive(query, *generator,
                       default_sampling_params(query.task_kind),
                       options.adaptive, agg);
      entry["final_k"] = run.final_k;
      entry["stop_reason"] = to_string(run.stop_reason);
      entry["trace"] = run.trace;
      entry["selection"] = outcome_to_json(outcome);
      entry["chosen_action"] =
          run.samples.at(outcome.chosen_index).action_text;
      total_final_k += run.final_k;
      ++completed;
    } catch (const AdaptiveAborted& e) {
      entry["error"] = e.what();
      entry["partial_final_k"] = e.partial_run.final_k;
      if (first_failure.empty()) first_failure = e.what();
    } catch (const Error& e) {
      entry["error"] = e.what();
      if (first_failure.empty()) first_failure = e.what();
    }
    per_query.push_back(std::move(entry));
  }

  json report;
  report["schema_version"] = 1;
  report["rule"] = to_string(options.adaptive.rule);
  report["per_query"] = std::move(per_query);
  if (completed > 0)
    report["avg_final_k"] = static_cast<double>(total_final_k) / completed;
  json echo;
  echo["rule"] = to_string(options.adaptive.rule);
  echo["tau"] = options.adaptive.soft.tau;
  echo["confidence_threshold"] = options.adaptive.ac.confidence_threshold;
  echo["max_k"] = options.adaptive.max_k();
  echo["min_k_before_check"] = options.adaptive.ac.min_k_before_check;
  echo["seed"] = options.seed;
  echo["generator"] = options.generator_spec;
  report["config_echo"] = std::move(echo);

  write_or_print(options.out_path, report.dump(2) + "\n", console);

  // The report (with per-query diagnostics and partial final_k) is written
  // either way; generation failures still fail the command.
  if (!first_failure.empty()) {
    int failed = static_cast<int>(queries.size()) - completed;
    throw BackendError(std::to_string(failed) + " of " +
                       std::to_string(queries.size()) +
                       " queries failed; first: " + first_failure);
  }
}

void cmd_calibrate(const CalibrateOptions& options, std::ostream& console) {
  if (options.bins && *options.bins < 1)
    throw ConfigError("bins must be >= 1");

  std::ifstream in(options.records_path);
  if (!in) throw DataError("cannot open records: " + options.records_path);
  std::vector<PredictionRecord> records = read_prediction_records(in);
  if (records.empty()) throw DataError("records file is empty");

  CalibrationReport report = calibration_report(records, options.bins);

  json doc;
  doc["schema_version"] = 1;
  doc["n"] = report.n;
  doc["ece"] = report.ece;
  if (report.auroc) {
    doc["auroc"] = *report.auroc;
  } else {
    doc["auroc"] = nullptr;  // single-class: AUROC undefined
  }
  json bins = json::array();
  for (const CalibrationBin& bin : report.bins) {
    json b;
    b["low"] = bin.low;
    b["high"] = bin.high;
    b["mean_confidence"] = bin.mean_confidence;
    b["accuracy"] = bin.accuracy;
    b["count"] = bin.count;
    bins.push_back(std::move(b));
  }
  doc["bins"] = std::move(bins);
  write_or_print(options.out_path, doc.dump(2) + "\n", console);
}

void cmd_run_episodes(const RunEpisodesOptions& options, std::ostream& console) {
  json doc = load_json_file(options.config_path);
  if (options.env_path) doc["env"] = *options.env_path;
  if (options.method) doc["method"] = to_string(*options.method);
  if (options.k) doc["k"] = *options.k;
  if (options.aggregation) doc["aggregation"] = to_string(*options.aggregation);
  if (options.tau) doc["adaptive"]["tau"] = *options.tau;
  if (options.confidence_threshold)
    doc["adaptive"]["confidence_threshold"] = *options.confidence_threshold;
  if (options.max_k) doc["adaptive"]["max_k"] = *options.max_k;
  if (options.seed) {
    doc["seed"] = *options.seed;
    doc.erase("seeds");
  }
  if (options.seeds) doc["seeds"] = *options.seeds;
  if (options.jobs) doc["jobs"] = *options.jobs;

  RunConfig config = parse_run_config(doc);
  if (!options.out_path.empty()) config.out_path = options.out_path;

  RunReport report = execute_run(config);
  std::string payload = report_to_json(report, options.timing).dump(2) + "\n";
  if (config.out_path.empty()) {
    console << payload;
  } else {
    open_output(config.out_path) << payload;
  }

  console << std::fixed << std::setprecision(1) << "success_rate "
          << report.success_rate.mean << " +/- " << report.success_rate.std
          << ", score " << report.score.mean << " +/- " << report.score.std
          << ", avg_k " << std::setprecision(2) << report.avg_k.mean
          << ", majority_failure_rate " << std::setprecision(1)
          << report.majority_failure_rate.mean << " (" << report.wall_clock_ms
          << " ms)\n";
  console.unsetf(std::ios::fixed);
}

namespace {

struct LoadedReport {
  std::string path;
  json doc;
  std::set<std::string> task_ids;
  // success flags per (seed, task) for intersection recomputation
  std::vector<std::pair<std::string, std::pair<bool, double>>> episodes;
};

LoadedReport load_report(const std::string& path) {
  LoadedReport loaded;
  loaded.path = path;
  loaded.doc = load_json_file(path);
  try {
    for (const json& seed : loaded.doc.at("per_seed")) {
      for (const json& episode : seed.at("episodes")) {
        std::string id = episode.at("task_id").get<std::string>();
        loaded.task_ids.insert(id);
        loaded.episodes.push_back(
            {id,
             {episode.at("success").get<bool>(),
              episode.at("final_reward").get<double>()}});
      }
    }
  } catch (const json::exception& e) {
    throw DataError(path + ": not a run report: " + e.what());
  }
  return loaded;
}

}  // namespace

void cmd_report(const ReportOptions& options, std::ostream& console) {
  if (options.report_paths.empty())
    throw ConfigError("report needs at least one run report file");

  std::vector<LoadedReport> reports;
  for (const std::string& path : options.report_paths)
    reports.push_back(load_report(path));

  std::set<std::string> intersection = reports.front().task_ids;
  bool mismatched = false;
  for (const LoadedReport& r : reports) {
    if (r.task_ids != reports.front().task_ids) mismatched = true;
    std::set<std::string> keep;
    std::set_intersection(intersection.begin(), intersection.end(),
                          r.task_ids.begin(), r.task_ids.end(),
                          std::inserter(keep, keep.begin()));
    intersection = std::move(keep);
  }
  if (mismatched)
    console << "warning: task sets differ; comparing on the intersection ("
            << intersection.size() << " tasks)\n";

  json rows = json::array();
  double baseline_success = 0.0;
  for (size_t i = 0; i < reports.size(); ++i) {
    const LoadedReport& r = reports[i];
    json row;
    row["report"] = r.path;
    const json& echo = r.doc.at("config_echo");
    row["method"] = echo.value("method", "?");
    row["k"] = echo.value("k", 0);
    row["metrics"] = r.doc.at("metrics");

    int n = 0, successes = 0;
    double reward_sum = 0.0;
    for (const auto& [id, outcome] : r.episodes) {
      if (!intersection.count(id)) continue;
      ++n;
      if (outcome.first) ++successes;
      reward_sum += outcome.second;
    }
    double success_rate = n ? 100.0 * successes / n : 0.0;
    double score = n ? 100.0 * reward_sum / n : 0.0;
    row["intersection"] = {{"tasks", intersection.size()},
                           {"success_rate", success_rate},
                           {"score", score}};
    if (i == 0) baseline_success = success_rate;
    row["delta_success_rate"] = success_rate - baseline_success;
    rows.push_back(std::move(row));
  }

  json doc;
  doc["schema_version"] = 1;
  doc["mismatched_task_sets"] = mismatched;
  doc["rows"] = rows;

  // Text table alongside the machine-readable document.
  console << std::left << std::setw(28) << "report" << std::setw(18)
          << "method" << std::setw(4) << "k" << std::setw(14) << "success"
          << std::setw(12) << "score" << std::setw(10) << "d_succ" << "\n";
  console << std::fixed << std::setprecision(1);
  for (const json& row : rows) {
    std::string name = row["report"].get<std::string>();
    if (name.size() > 26) name = "..." + name.substr(name.size() - 23);
    console << std::setw(28) << name << std::setw(18)
            << row["method"].get<std::string>() << std::setw(4)
            << row["k"].get<int>() << std::setw(14)
            << row["intersection"]["success_rate"].get<double>()
            << std::setw(12) << row["intersection"]["score"].get<double>()
            << std::setw(10) << row["delta_success_rate"].get<double>()
            << "\n";
  }
  console.unsetf(std::ios::fixed);

  if (!options.out_path.empty())
    open_output(options.out_path) << doc.dump(2) << "\n";
}

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const ConfigError*>(&error)) return 1;
  if (dynamic_cast<const BackendError*>(&error)) return 3;
  if (dynamic_cast<const Error*>(&error)) return 2;
  return 2;
}

}  // namespace softsc::cli
