#include "softsc/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "softsc/http_client.hpp"
#include "softsc/seeding.hpp"
#include "softsc/trace_io.hpp"

namespace softsc {

using nlohmann::json;

namespace {

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

ScriptEntry entry_from_json(const json& doc, const std::string& origin) {
  ScriptEntry entry;
  try {
    entry.action_text = doc.at("action").get<std::string>();
    if (doc.contains("probs")) {
      for (const json& p : doc.at("probs"))
        entry.token_probs.push_back(p.get<double>());
    }
    if (doc.contains("confidence") && !doc["confidence"].is_null())
      entry.verbalized_confidence = doc["confidence"].get<double>();
    if (doc.contains("raw") && !doc["raw"].is_null())
      entry.raw_text = doc["raw"].get<std::string>();
    if (doc.contains("reward") && !doc["reward"].is_null())
      entry.reward = doc["reward"].get<double>();
  } catch (const json::exception& e) {
    throw DataError(origin + ": bad script entry: " + e.what());
  }
  return entry;
}

// script/1 and pool/1 files: per-task entry lists plus an optional
// "default" fallback.
template <typename Entry, typename FromJson>
class TaskTable {
 public:
  TaskTable(const json& doc, const std::string& origin, FromJson from_json) {
    if (doc.contains("tasks")) {
      for (const auto& [task_id, entries] : doc.at("tasks").items()) {
        std::vector<Entry> list;
        for (const json& e : entries) list.push_back(from_json(e, origin));
        tasks_[task_id] = std::move(list);
      }
    }
    if (doc.contains("default")) {
      std::vector<Entry> list;
      for (const json& e : doc.at("default")) list.push_back(from_json(e, origin));
      fallback_ = std::move(list);
    }
    if (tasks_.empty() && !fallback_)
      throw ConfigError(origin + ": no tasks and no default entries");
  }

  const std::vector<Entry>& find(const std::string& task_id) const {
    auto it = tasks_.find(task_id);
    if (it != tasks_.end()) return it->second;
    if (fallback_) return *fallback_;
    throw ConfigError("no script entries for task '" + task_id + "'");
  }

 private:
  std::map<std::string, std::vector<Entry>> tasks_;
  std::optional<std::vector<Entry>> fallback_;
};

class ScriptFactory : public GeneratorFactory {
 public:
  ScriptFactory(const json& doc, const std::string& origin)
      : table_(doc, origin, entry_from_json) {}

  std::unique_ptr<Generator> make(const std::string& task_id,
                                  uint64_t /*seed*/) const override {
    return std::make_unique<ScriptedGenerator>(table_.find(task_id));
  }

 private:
  TaskTable<ScriptEntry, decltype(&entry_from_json)> table_;
};

PoolEntry pool_entry_from_json(const json& doc, const std::string& origin) {
  PoolEntry entry;
  entry.entry = entry_from_json(doc, origin);
  entry.weight = doc.value("weight", 1.0);
  return entry;
}

class PoolFactory : public GeneratorFactory {
 public:
  PoolFactory(const json& doc, const std::string& origin)
      : table_(doc, origin, pool_entry_from_json) {}

  std::unique_ptr<Generator> make(const std::string& task_id,
                                  uint64_t seed) const override {
    return std::make_unique<PoolGenerator>(table_.find(task_id),
                                           derive_stream(seed, task_id));
  }

 private:
  TaskTable<PoolEntry, decltype(&pool_entry_from_json)> table_;
};

class TraceFactory : public GeneratorFactory {
 public:
  explicit TraceFactory(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open trace: " + path);
    groups_ = read_trace_groups(in);
  }

  std::unique_ptr<Generator> make(const std::string& task_id,
                                  uint64_t /*seed*/) const override {
    for (const SampleSet& group : groups_) {
      if (group.query.id == task_id) {
        bool probs = true;
        for (const Sample& s : group.samples)
          probs = probs && s.has_token_probs();
        return std::make_unique<ReplayGenerator>(group.samples, probs);
      }
    }
    throw ConfigError("trace lacks samples for task '" + task_id + "'");
  }

 private:
  std::vector<SampleSet> groups_;
};

EndpointConfig endpoint_from_json(const json& spec) {
  EndpointConfig config;
  try {
    config.url = spec.at("endpoint").get<std::string>();
  } catch (const json::exception&) {
    throw ConfigError("http generator spec needs an endpoint url");
  }
  if (spec.contains("auth_token"))
    config.auth_token = resolve_secret(spec["auth_token"].get<std::string>());
  config.max_retries = spec.value("max_retries", 3);
  config.timeout_ms = spec.value("timeout_ms", 30000);
  config.backoff_base_ms = spec.value("backoff_ms", 100);
  config.require_token_probs = spec.value("require_token_probs", true);
  return config;
}

class HttpFactory : public GeneratorFactory {
 public:
  HttpFactory(const json& spec, ExtractMode mode, std::string thought_prefix)
      : config_(endpoint_from_json(spec)),
        mode_(mode),
        thought_prefix_(std::move(thought_prefix)) {}

  std::unique_ptr<Generator> make(const std::string& /*task_id*/,
                                  uint64_t /*seed*/) const override {
    return std::make_unique<HttpGenerator>(config_, mode_, thought_prefix_);
  }

 private:
  EndpointConfig config_;
  ExtractMode mode_;
  std::string thought_prefix_;
};

// scores/1 file: per-task lists of per-call token probability lists.
class ScoresTable {
 public:
  ScoresTable(const json& doc, const std::string& origin) {
    auto parse = [&origin](const json& lists) {
      std::vector<std::vector<double>> out;
      for (const json& list : lists) {
        std::vector<double> probs;
        for (const json& p : list) probs.push_back(p.get<double>());
        out.push_back(std::move(probs));
      }
      return out;
    };
    try {
      if (doc.contains("tasks")) {
        for (const auto& [task_id, lists] : doc.at("tasks").items())
          tasks_[task_id] = parse(lists);
      }
      if (doc.contains("default")) fallback_ = parse(doc.at("default"));
    } catch (const json::exception& e) {
      throw DataError(origin + ": bad scores file: " + e.what());
    }
  }

  std::vector<std::vector<double>> find(const std::string& task_id) const {
    auto it = tasks_.find(task_id);
    if (it != tasks_.end()) return it->second;
    if (fallback_) return *fallback_;
    throw ConfigError("no scores for task '" + task_id + "'");
  }

 private:
  std::map<std::string, std::vector<std::vector<double>>> tasks_;
  std::optional<std::vector<std::vector<double>>> fallback_;
};

class BlackboxFactory : public GeneratorFactory {
 public:
  BlackboxFactory(const json& spec, ExtractMode mode,
                  const std::string& thought_prefix) {
    if (!spec.contains("generator") || !spec.contains("scorer"))
      throw ConfigError("blackbox spec needs generator and scorer");
    inner_ = make_generator_factory(spec["generator"], mode, thought_prefix);
    const json& scorer = spec["scorer"];
    std::string type = scorer.value("type", "http");
    if (type == "http") {
      scorer_endpoint_ = endpoint_from_json(scorer);
    } else if (type == "scores") {
      std::string path = scorer.at("path").get<std::string>();
      scores_.emplace(load_json_file(path), path);
    } else {
      throw ConfigError("unknown scorer type: " + type);
    }
  }

  std::unique_ptr<Generator> make(const std::string& task_id,
                                  uint64_t seed) const override {
    std::unique_ptr<Scorer> scorer;
    if (scores_) {
      scorer = std::make_unique<ScriptedScorer>(scores_->find(task_id));
    } else {
      scorer = std::make_unique<HttpScorer>(*scorer_endpoint_);
    }
    return std::make_unique<RescoringGenerator>(inner_->make(task_id, seed),
                                                std::move(scorer));
  }

 private:
  std::unique_ptr<GeneratorFactory> inner_;
  std::optional<EndpointConfig> scorer_endpoint_;
  std::optional<ScoresTable> scores_;
};

}  // namespace

std::string resolve_secret(const std::string& value) {
  if (value.size() >= 3 && value.rfind("${", 0) == 0 && value.back() == '}') {
    std::string name = value.substr(2, value.size() - 3);
    const char* resolved = std::getenv(name.c_str());
    if (!resolved)
      throw ConfigError("environment variable not set: " + name);
    return resolved;
  }
  return value;
}

std::unique_ptr<GeneratorFactory> make_generator_factory(
    const json& spec, ExtractMode extract_mode,
    const std::string& thought_prefix) {
  if (!spec.is_object() || !spec.contains("type"))
    throw ConfigError("generator spec needs a type");
  std::string type = spec["type"].get<std::string>();

  if (type == "script" || type == "pool") {
    std::string path;
    try {
      path = spec.at("path").get<std::string>();
    } catch (const json::exception&) {
      throw ConfigError(type + " generator spec needs a path");
    }
    json doc = load_json_file(path);
    std::string format = doc.value("format", "");
    if (type == "script") {
      if (format != "script/1")
        throw DataError(path + ": expected format script/1");
      return std::make_unique<ScriptFactory>(doc, path);
    }
    if (format != "pool/1") throw DataError(path + ": expected format pool/1");
    return std::make_unique<PoolFactory>(doc, path);
  }
  if (type == "trace") {
    std::string path;
    try {
      path = spec.at("path").get<std::string>();
    } catch (const json::exception&) {
      throw ConfigError("trace generator spec needs a path");
    }
    return std::make_unique<TraceFactory>(path);
  }
  if (type == "http")
    return std::make_unique<HttpFactory>(spec, extract_mode, thought_prefix);
  if (type == "blackbox")
    return std::make_unique<BlackboxFactory>(spec, extract_mode, thought_prefix);
  throw ConfigError("unknown generator type: " + type);
}

RunConfig parse_run_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("run config must be a JSON object");
  RunConfig config;
  try {
    config.method = method_from_string(doc.at("method").get<std::string>());
    config.env_path = doc.at("env").get<std::string>();
    if (!doc.contains("generator"))
      throw ConfigError("run config needs a generator spec");
    config.generator_spec = doc["generator"];

    config.k = doc.value("k", 5);
    if (config.k < 1) throw ConfigError("k must be >= 1");
    if (doc.contains("aggregation"))
      config.aggregation =
          aggregation_from_string(doc["aggregation"].get<std::string>());

    if (doc.contains("adaptive")) {
      const json& adaptive = doc["adaptive"];
      if (adaptive.contains("rule"))
        config.adaptive.rule =
            adaptive_rule_from_string(adaptive["rule"].get<std::string>());
      if (adaptive.contains("tau"))
        config.adaptive.soft.tau = adaptive["tau"].get<double>();
      if (adaptive.contains("confidence_threshold"))
        config.adaptive.ac.confidence_threshold =
            adaptive["confidence_threshold"].get<double>();
      if (adaptive.contains("max_k")) {
        config.adaptive.soft.max_k = adaptive["max_k"].get<int>();
        config.adaptive.ac.max_k = adaptive["max_k"].get<int>();
      }
      if (adaptive.contains("min_k_before_check"))
        config.adaptive.ac.min_k_before_check =
            adaptive["min_k_before_check"].get<int>();
      if (adaptive.contains("prior_alpha"))
        config.adaptive.ac.prior_alpha = adaptive["prior_alpha"].get<double>();
      if (adaptive.contains("prior_beta"))
        config.adaptive.ac.prior_beta = adaptive["prior_beta"].get<double>();
    }
    if (config.method == Method::adaptive_soft_sc &&
        (!doc.contains("adaptive") || !doc["adaptive"].contains("tau")))
      throw ConfigError("adaptive_soft_sc requires adaptive.tau");
    if (config.method == Method::adaptive_sc &&
        (!doc.contains("adaptive") ||
         !doc["adaptive"].contains("confidence_threshold")))
      throw ConfigError("adaptive_sc requires adaptive.confidence_threshold");

    config.seed = doc.value("seed", 0);
    if (doc.contains("seeds")) {
      for (const json& s : doc["seeds"])
        config.seeds.push_back(s.get<uint64_t>());
    }
    if (config.seeds.empty()) config.seeds.push_back(config.seed);

    config.jobs = doc.value("jobs", 1);
    if (config.jobs < 1) throw ConfigError("jobs must be >= 1");
    config.out_path = doc.value("out", "");
    config.thought_prefix =
        doc.value("thought_prefix", std::string(kDefaultThoughtPrefix));
    config.resample_factor = doc.value("resample_factor", 3);
    config.parallel_requests = doc.value("parallel_requests", 4);
    if (config.parallel_requests < 1)
      throw ConfigError("parallel_requests must be >= 1");

    if (doc.contains("params")) {
      const json& params = doc["params"];
      SamplingParams parsed;
      parsed.temperature = params.value("temperature", 0.7);
      parsed.top_p = params.value("top_p", 0.9);
      parsed.top_k = params.value("top_k", 40);
      parsed.max_tokens = params.value("max_tokens", 100);
      if (params.contains("stop")) {
        for (const json& s : params["stop"])
          parsed.stop_sequences.push_back(s.get<std::string>());
      }
      config.params = parsed;
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
  return config;
}

json run_config_echo(const RunConfig& config) {
  json echo;
  echo["method"] = to_string(config.method);
  echo["k"] = config.k;
  if (config.aggregation) echo["aggregation"] = to_string(*config.aggregation);
  echo["env"] = config.env_path;
  echo["generator"] = config.generator_spec;
  json adaptive;
  adaptive["rule"] = to_string(config.adaptive.rule);
  adaptive["tau"] = config.adaptive.soft.tau;
  adaptive["confidence_threshold"] = config.adaptive.ac.confidence_threshold;
  adaptive["max_k"] = config.adaptive.max_k();
  adaptive["min_k_before_check"] = config.adaptive.ac.min_k_before_check;
  adaptive["prior_alpha"] = config.adaptive.ac.prior_alpha;
  adaptive["prior_beta"] = config.adaptive.ac.prior_beta;
  echo["adaptive"] = std::move(adaptive);
  echo["seeds"] = config.seeds;
  // jobs and the request bound stay out: parallelism must not change what
  // a run produces
  echo["thought_prefix"] = config.thought_prefix;
  echo["resample_factor"] = config.resample_factor;
  if (config.params) {
    json params;
    params["temperature"] = config.params->temperature;
    params["top_p"] = config.params->top_p;
    params["top_k"] = config.params->top_k;
    params["max_tokens"] = config.params->max_tokens;
    params["stop"] = config.params->stop_sequences;
    echo["params"] = std::move(params);
  }
  return echo;
}

namespace {

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / values.size();
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / (values.size() - 1));
  }
  return out;
}

json mean_std_to_json(const MeanStd& value) {
  return json{{"mean", value.mean}, {"std", value.std}};
}

}  // namespace

RunReport execute_run(const RunConfig& config) {
  auto started = std::chrono::steady_clock::now();

  auto definition = load_environment_definition(config.env_path);
  ExtractMode mode = definition->task_kind() == TaskKind::per_step
                         ? ExtractMode::skip_thoughts
                         : ExtractMode::verbatim;
  auto factory =
      make_generator_factory(config.generator_spec, mode, config.thought_prefix);

  EpisodeOptions options;
  options.method = config.method;
  options.k = config.k;
  options.aggregation = config.aggregation;
  options.adaptive = config.adaptive;
  options.params = config.params;
  options.thought_prefix = config.thought_prefix;
  options.resample_factor = config.resample_factor;
  options.parallel_requests = config.parallel_requests;

  const std::vector<EnvTask>& tasks = definition->tasks();
  if (tasks.empty()) throw DataError("environment defines no tasks");

  struct Slot {
    EpisodeResult episode;
    std::vector<SelectionPointLog> log;
    CallStats calls;
  };

  size_t n_seeds = config.seeds.size();
  size_t n_tasks = tasks.size();
  std::vector<Slot> slots(n_seeds * n_tasks);

  std::atomic<size_t> cursor{0};
  auto worker = [&] {
    while (true) {
      size_t index = cursor.fetch_add(1);
      if (index >= slots.size()) break;
      uint64_t seed = config.seeds[index / n_tasks];
      const EnvTask& task = tasks[index % n_tasks];
      Slot& slot = slots[index];

      Query query{task.id, task.prompt, definition->task_kind()};
      std::unique_ptr<Generator> generator;
      try {
        generator = factory->make(task.id, seed);
        auto env = definition->make_environment();
        slot.episode = run_episode(*env, query, *generator, options, slot.log);
      } catch (const Error& e) {
        slot.episode = EpisodeResult{};
        slot.episode.task_id = task.id;
        slot.episode.error = e.what();
      }
      if (generator) slot.calls = generator->call_stats();
    }
  };

  int jobs = std::max(1, std::min<int>(config.jobs, static_cast<int>(slots.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  RunReport report;
  report.config_echo = run_config_echo(config);

  // report ordering contract: task id order within a seed, regardless of
  // definition order or scheduling
  std::vector<size_t> by_id(n_tasks);
  for (size_t t = 0; t < n_tasks; ++t) by_id[t] = t;
  std::stable_sort(by_id.begin(), by_id.end(), [&tasks](size_t a, size_t b) {
    return tasks[a].id < tasks[b].id;
  });

  std::vector<double> success_rates, scores, avg_ks, failure_rates;
  for (size_t s = 0; s < n_seeds; ++s) {
    SeedResult seed_result;
    seed_result.seed = config.seeds[s];
    for (size_t t : by_id) {
      Slot& slot = slots[s * n_tasks + t];
      seed_result.episodes.push_back(std::move(slot.episode));
      seed_result.log.insert(seed_result.log.end(), slot.log.begin(),
                             slot.log.end());
      seed_result.calls.generate_calls += slot.calls.generate_calls;
      seed_result.calls.score_calls += slot.calls.score_calls;
    }
    seed_result.metrics = compute_metrics(seed_result.episodes, seed_result.log);
    success_rates.push_back(seed_result.metrics.success_rate);
    scores.push_back(seed_result.metrics.score);
    avg_ks.push_back(seed_result.metrics.avg_k);
    failure_rates.push_back(seed_result.metrics.majority_failure_rate);
    report.total_calls.generate_calls += seed_result.calls.generate_calls;
    report.total_calls.score_calls += seed_result.calls.score_calls;
    report.per_seed.push_back(std::move(seed_result));
  }

  report.success_rate = mean_std(success_rates);
  report.score = mean_std(scores);
  report.avg_k = mean_std(avg_ks);
  report.majority_failure_rate = mean_std(failure_rates);
  report.wall_clock_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - started)
                             .count();
  return report;
}

json episode_to_json(const EpisodeResult& result) {
  json doc;
  doc["task_id"] = result.task_id;
  doc["step_rewards"] = result.step_rewards;
  doc["final_reward"] = result.final_reward;
  doc["success"] = result.success;
  doc["steps_taken"] = result.steps_taken;
  doc["samples_consumed"] = result.samples_consumed;
  if (result.error) doc["error"] = *result.error;
  return doc;
}

json metrics_to_json(const RunMetrics& metrics) {
  json doc;
  doc["success_rate"] = metrics.success_rate;
  doc["score"] = metrics.score;
  doc["avg_k"] = metrics.avg_k;
  doc["majority_failure_rate"] = metrics.majority_failure_rate;
  return doc;
}

json outcome_to_json(const SelectionOutcome& outcome) {
  json doc;
  doc["method"] = to_string(outcome.method);
  doc["chosen_index"] = outcome.chosen_index;
  doc["tie_broken"] = outcome.tie_broken;
  if (outcome.per_sample_scores)
    doc["per_sample_scores"] = *outcome.per_sample_scores;
  if (outcome.tally) {
    json tally;
    tally["counts"] = outcome.tally->counts;
    tally["first_seen"] = outcome.tally->first_seen;
    tally["total"] = outcome.tally->total;
    doc["tally"] = std::move(tally);
    doc["unique_majority"] = outcome.unique_majority;
  }
  if (!outcome.missing_confidence.empty())
    doc["missing_confidence"] = outcome.missing_confidence;
  return doc;
}

json report_to_json(const RunReport& report, bool include_timing) {
  json doc;
  doc["schema_version"] = 1;
  doc["config_echo"] = report.config_echo;
  json metrics;
  metrics["success_rate"] = mean_std_to_json(report.success_rate);
  metrics["score"] = mean_std_to_json(report.score);
  metrics["avg_k"] = mean_std_to_json(report.avg_k);
  metrics["majority_failure_rate"] =
      mean_std_to_json(report.majority_failure_rate);
  doc["metrics"] = std::move(metrics);

  json per_seed = json::array();
  for (const SeedResult& seed : report.per_seed) {
    json entry;
    entry["seed"] = seed.seed;
    entry["metrics"] = metrics_to_json(seed.metrics);
    json episodes = json::array();
    for (const EpisodeResult& e : seed.episodes)
      episodes.push_back(episode_to_json(e));
    entry["episodes"] = std::move(episodes);
    json calls;
    calls["generate_calls"] = seed.calls.generate_calls;
    calls["score_calls"] = seed.calls.score_calls;
    calls["total"] = seed.calls.total();
    entry["call_accounting"] = std::move(calls);
    per_seed.push_back(std::move(entry));
  }
  doc["per_seed"] = std::move(per_seed);

  json calls;
  calls["generate_calls"] = report.total_calls.generate_calls;
  calls["score_calls"] = report.total_calls.score_calls;
  calls["total"] = report.total_calls.total();
  doc["call_accounting"] = std::move(calls);
  if (include_timing) doc["wall_clock_ms"] = report.wall_clock_ms;
  return doc;
}

}  // namespace softsc
