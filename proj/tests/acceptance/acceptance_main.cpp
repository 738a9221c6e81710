// Acceptance suite: one pass/fail line per criterion, nonzero exit when a
// gating criterion fails. Run through ctest or directly:
//   ./softsc_acceptance --cli /path/to/softsc
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "softsc/adaptive.hpp"
#include "softsc/calibration.hpp"
#include "softsc/commands.hpp"
#include "softsc/http_client.hpp"
#include "softsc/trace_io.hpp"

using namespace softsc;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool pass = true;
  std::ostringstream detail;

  void expect(bool condition, const std::string& message) {
    if (!condition) {
      pass = false;
      if (!detail.str().empty()) detail << "; ";
      detail << message;
    }
  }
};

int g_failures = 0;

template <typename Body>
void criterion(int id, const std::string& name, Body body, bool gating = true,
               double time_bound = 0.0) {
  Check check;
  auto started = std::chrono::steady_clock::now();
  try {
    body(check);
  } catch (const std::exception& e) {
    check.expect(false, std::string("exception: ") + e.what());
  }
  double seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - started)
                       .count();
  if (time_bound > 0.0 && seconds >= time_bound) {
    check.expect(false, "exceeded the " + std::to_string(time_bound) +
                            "s runtime bound");
  }
  std::ostringstream line;
  line << (check.pass ? "PASS" : "FAIL") << "  criterion " << id << ": "
       << name << " (" << std::fixed << std::setprecision(2) << seconds
       << "s)";
  if (!check.pass) line << " -- " << check.detail.str();
  if (!gating && !check.pass) line << " [non-gating]";
  std::cout << line.str() << std::endl;
  if (!check.pass && gating) ++g_failures;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// ---------------------------------------------------------------------------
// 1. aggregator oracles

void aggregator_oracles(Check& check) {
  std::mt19937_64 rng(0xA11CE5);
  std::uniform_real_distribution<double> value(1e-6, 1.0);
  std::uniform_int_distribution<int> length(1, 64);
  for (int i = 0; i < 1000 && check.pass; ++i) {
    std::vector<double> probs(length(rng));
    for (double& p : probs) p = value(rng);

    long double sum = 0.0L, product = 1.0L, lowest = 2.0L;
    for (double p : probs) {
      sum += p;
      product *= p;
      lowest = std::min<long double>(lowest, p);
    }
    long double ref_mean = sum / probs.size();
    long double ref_lnp = std::pow(product, 1.0L / probs.size());

    double mean = agg_mean(probs);
    double low = agg_min(probs);
    double lnp = agg_lnp(probs);
    check.expect(std::abs(mean - static_cast<double>(ref_mean)) <= 1e-9,
                 "mean off at case " + std::to_string(i));
    check.expect(low == static_cast<double>(lowest),
                 "min off at case " + std::to_string(i));
    check.expect(std::abs(lnp - static_cast<double>(ref_lnp)) <= 1e-9,
                 "lnp off at case " + std::to_string(i));
    check.expect(low <= lnp && lnp <= mean,
                 "AM-GM ordering violated at case " + std::to_string(i));
  }
}

// ---------------------------------------------------------------------------
// 2. selection oracles

void selection_oracles(Check& check) {
  std::mt19937_64 rng(0xB0B);
  std::uniform_real_distribution<double> value(1e-6, 1.0);

  for (int trial = 0; trial < 1000 && check.pass; ++trial) {
    int k = 1 + static_cast<int>(rng() % 20);
    SampleSet set;
    set.query = {"q", "p", TaskKind::single_turn};
    std::vector<std::string> actions;
    for (int i = 0; i < k; ++i) {
      Sample s;
      s.sample_index = i;
      s.action_text = s.raw_text = std::string(1, 'a' + rng() % 6);
      actions.push_back(s.action_text);
      int len = 1 + static_cast<int>(rng() % 6);
      for (int t = 0; t < len; ++t) s.token_probs.push_back({"", value(rng)});
      set.samples.push_back(std::move(s));
    }

    // mode by exhaustive counting, first seen wins ties
    int best_count = 0, best_first = k;
    for (int i = 0; i < k; ++i) {
      int count = 0, first = i;
      for (int j = 0; j < k; ++j) {
        if (actions[j] == actions[i]) {
          ++count;
          first = std::min(first, j);
        }
      }
      if (count > best_count || (count == best_count && first < best_first)) {
        best_count = count;
        best_first = first;
      }
    }
    check.expect(select_majority(set).chosen_index == best_first,
                 "majority mismatch at trial " + std::to_string(trial));

    AggregationKind kind = static_cast<AggregationKind>(rng() % 3);
    SelectionOutcome soft = select_soft(set, kind);
    int argmax = 0;
    for (int i = 1; i < k; ++i) {
      if (score_sample(set.samples[i], kind) >
          score_sample(set.samples[argmax], kind))
        argmax = i;
    }
    check.expect(soft.chosen_index == argmax,
                 "soft argmax mismatch at trial " + std::to_string(trial));
  }

  // invariance under 200 random strictly increasing transforms
  std::vector<double> scores;
  for (int i = 0; i < 12; ++i) scores.push_back(value(rng));
  auto argmax_of = [](const std::vector<double>& xs) {
    return static_cast<int>(std::max_element(xs.begin(), xs.end()) -
                            xs.begin());
  };
  int base = argmax_of(scores);
  for (int t = 0; t < 200 && check.pass; ++t) {
    double a = 0.01 + value(rng) * 10.0;
    double b = (value(rng) - 0.5) * 4.0;
    double gamma = 0.05 + value(rng) * 4.0;
    int flavor = static_cast<int>(rng() % 3);
    std::vector<double> mapped;
    for (double s : scores) {
      switch (flavor) {
        case 0: mapped.push_back(a * s + b); break;
        case 1: mapped.push_back(std::pow(s, gamma)); break;
        default: mapped.push_back(1.0 / (1.0 + std::exp(-(a * s + b))));
      }
    }
    check.expect(argmax_of(mapped) == base,
                 "transform " + std::to_string(t) + " moved the argmax");
  }
}

// ---------------------------------------------------------------------------
// 3. adaptive stopping

struct SoftFixture {
  std::vector<double> mins;
  double tau;
  int max_k;
  int expect_k;
  StopReason expect_reason;
};

void adaptive_stopping(Check& check) {
  const auto met = StopReason::threshold_met;
  const auto cap = StopReason::max_k_reached;
  std::vector<SoftFixture> fixtures = {
      // tau = 0: one sample is always enough
      {{0.5}, 0.0, 10, 1, met},
      {{0.9, 0.9}, 0.0, 10, 1, met},
      {std::vector<double>(10, 0.05), 0.0, 10, 1, met},
      {{1.0}, 0.0, 10, 1, met},
      {{0.33, 0.2, 0.1}, 0.0, 10, 1, met},
      // tau = 0.95
      {{0.5, 0.5, 0.9}, 0.95, 10, 2, met},
      {{0.96}, 0.95, 10, 1, met},
      {std::vector<double>(10, 0.2), 0.95, 10, 5, met},
      {{0.9, 0.04, 0.02, 0.5}, 0.95, 10, 3, met},
      {std::vector<double>(10, 0.05), 0.95, 10, 10, cap},
      {{0.6, 0.4, 0.9}, 0.95, 10, 2, met},
      // tau = 3.0
      {std::vector<double>(10, 0.8), 3.0, 10, 4, met},
      {std::vector<double>(10, 0.5), 3.0, 10, 6, met},
      {{0.9, 0.9, 0.9, 0.2, 0.2, 0.9, 0.9}, 3.0, 10, 5, met},
      {std::vector<double>(5, 1.0), 3.0, 10, 3, met},
      {std::vector<double>(10, 0.25), 3.0, 10, 10, cap},
      {{0.96, 0.96, 0.96, 0.2}, 3.0, 10, 4, met},
      // tau = 3.5
      {std::vector<double>(10, 1.0), 3.5, 10, 4, met},
      {std::vector<double>(10, 0.7), 3.5, 10, 5, met},
      {{0.9, 0.8, 0.7, 0.6, 0.5, 0.9}, 3.5, 10, 5, met},
      {std::vector<double>(10, 0.4), 3.5, 10, 9, met},
      {std::vector<double>(5, 0.3), 3.5, 5, 5, cap},
  };

  for (size_t f = 0; f < fixtures.size(); ++f) {
    const SoftFixture& fixture = fixtures[f];
    std::vector<ScriptEntry> script;
    for (double m : fixture.mins) {
      ScriptEntry e;
      e.action_text = "act";
      e.token_probs = {m};
      script.push_back(std::move(e));
    }
    ScriptedGenerator generator(script);
    AdaptiveSpec spec;
    spec.rule = AdaptiveRule::soft;
    spec.soft = {fixture.tau, fixture.max_k};
    Query query{"q", "p", TaskKind::single_turn};
    auto [run, outcome] = run_adaptive(query, generator, greedy_params(), spec,
                                       AggregationKind::mean);
    check.expect(run.final_k == fixture.expect_k,
                 "fixture " + std::to_string(f) + ": final_k " +
                     std::to_string(run.final_k) + " != " +
                     std::to_string(fixture.expect_k));
    check.expect(run.stop_reason == fixture.expect_reason,
                 "fixture " + std::to_string(f) + ": wrong stop reason");
    // the trace proves every non-final step decided to continue
    for (int j = 1; j < run.final_k; ++j) {
      std::vector<double> prefix(fixture.mins.begin(),
                                 fixture.mins.begin() + j);
      check.expect(!soft_stop_decision(prefix, spec.soft),
                   "fixture " + std::to_string(f) + ": premature stop at " +
                       std::to_string(j));
    }
    std::vector<double> full(fixture.mins.begin(),
                             fixture.mins.begin() + run.final_k);
    check.expect(soft_stop_decision(full, spec.soft),
                 "fixture " + std::to_string(f) + ": no stop at final_k");
  }

  // tau monotonicity over 500 random scripts
  std::mt19937_64 rng(0xC0FFEE);
  std::uniform_real_distribution<double> value(0.01, 1.0);
  for (int trial = 0; trial < 500 && check.pass; ++trial) {
    std::vector<double> mins(1 + rng() % 10);
    for (double& m : mins) m = value(rng);
    double tau_low = value(rng) * 4.0;
    double tau_high = tau_low + value(rng) * 2.0;
    auto k_for = [&mins](double tau) {
      double sum = 0.0;
      int k = static_cast<int>(mins.size());
      for (size_t i = 0; i < mins.size(); ++i) {
        sum += mins[i];
        if (sum >= tau) return static_cast<int>(i) + 1;
      }
      return k;
    };
    check.expect(k_for(tau_low) <= k_for(tau_high),
                 "tau monotonicity violated at trial " + std::to_string(trial));
  }

  // Monte-Carlo oracle for the Beta posterior mass, all pairs with
  // top + runner <= 15, 1e6 draws each, parallel over pairs.
  struct Pair {
    int top, runner;
  };
  std::vector<Pair> pairs;
  for (int total = 0; total <= 15; ++total)
    for (int runner = 0; runner * 2 <= total; ++runner)
      pairs.push_back({total - runner, runner});

  std::vector<std::future<double>> estimates;
  for (const Pair& pair : pairs) {
    estimates.push_back(std::async(std::launch::async, [pair] {
      std::mt19937_64 rng(0xBE7A + 1315423911ULL * (pair.top * 31 + pair.runner));
      std::gamma_distribution<double> ga(pair.top + 1.0, 1.0);
      std::gamma_distribution<double> gb(pair.runner + 1.0, 1.0);
      const int draws = 1'000'000;
      int above = 0;
      for (int i = 0; i < draws; ++i) {
        double x = ga(rng);
        double y = gb(rng);
        if (x / (x + y) > 0.5) ++above;
      }
      return static_cast<double>(above) / draws;
    }));
  }
  for (size_t i = 0; i < pairs.size(); ++i) {
    double mc = estimates[i].get();
    double implementation = beta_majority_confidence(pairs[i].top, pairs[i].runner);
    double closed_form =
        beta_majority_confidence_binomial(pairs[i].top, pairs[i].runner);
    std::string tag = "(" + std::to_string(pairs[i].top) + "," +
                      std::to_string(pairs[i].runner) + ")";
    check.expect(std::abs(mc - implementation) <= 2e-3,
                 "MC oracle disagrees at " + tag + ": " + std::to_string(mc) +
                     " vs " + std::to_string(implementation));
    check.expect(std::abs(closed_form - implementation) <= 1e-12,
                 "binomial sum disagrees at " + tag);
  }
}

// ---------------------------------------------------------------------------
// 4. calibration oracles

void calibration_oracles(Check& check) {
  std::mt19937_64 rng(0xCA11B);
  std::uniform_real_distribution<double> conf(0.0, 1.0);

  for (int trial = 0; trial < 500 && check.pass; ++trial) {
    int n = 2 + static_cast<int>(rng() % 199);
    std::vector<PredictionRecord> records;
    records.push_back({conf(rng), true});
    records.push_back({conf(rng), false});
    for (int i = 2; i < n; ++i) {
      double c = (rng() % 3 == 0) ? (rng() % 11) / 10.0 : conf(rng);
      records.push_back({c, rng() % 2 == 0});
    }

    // brute-force AUROC: pair counting
    double wins = 0.0;
    long pairs = 0;
    for (const PredictionRecord& pos : records) {
      if (!pos.correct) continue;
      for (const PredictionRecord& neg : records) {
        if (neg.correct) continue;
        ++pairs;
        if (pos.confidence > neg.confidence) wins += 1.0;
        else if (pos.confidence == neg.confidence) wins += 0.5;
      }
    }
    check.expect(std::abs(auroc(records) - wins / pairs) <= 1e-12,
                 "auroc mismatch at trial " + std::to_string(trial));

    // brute-force equal-mass binning
    int bins = 1 + static_cast<int>(rng() % 20);
    if (bins > n) bins = n;
    std::vector<PredictionRecord> sorted = records;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const PredictionRecord& a, const PredictionRecord& b) {
                       return a.confidence < b.confidence;
                     });
    double expected = 0.0;
    int pos = 0;
    for (int b = 0; b < bins; ++b) {
      int size = n / bins + (b < n % bins ? 1 : 0);
      double c = 0.0, acc = 0.0;
      for (int i = pos; i < pos + size; ++i) {
        c += sorted[i].confidence;
        acc += sorted[i].correct ? 1.0 : 0.0;
      }
      expected += (static_cast<double>(size) / n) *
                  std::abs(acc / size - c / size);
      pos += size;
    }
    check.expect(std::abs(ece(records, bins) - expected) <= 1e-12,
                 "ece mismatch at trial " + std::to_string(trial));
  }

  std::vector<PredictionRecord> perfect(50, {1.0, true});
  check.expect(ece(perfect, 5) == 0.0, "perfect calibration ECE not 0");

  std::vector<PredictionRecord> separated;
  for (int i = 0; i < 25; ++i) separated.push_back({0.9, true});
  for (int i = 0; i < 25; ++i) separated.push_back({0.1, false});
  check.expect(auroc(separated) == 1.0, "perfect separation AUROC not 1");

  std::vector<PredictionRecord> constant;
  for (int i = 0; i < 50; ++i) constant.push_back({0.5, i % 2 == 0});
  check.expect(std::abs(auroc(constant) - 0.5) <= 1e-15,
               "constant confidence AUROC not 0.5");
}

// ---------------------------------------------------------------------------
// shared fixture writing for criteria 5-8

struct SparseFixture {
  fs::path env;
  fs::path script;
  fs::path config;
};

SparseFixture write_sparse_fixture(const fs::path& dir) {
  // 30 tasks; each script draws 5 all-distinct commands where the correct
  // one scores highest but only tasks 0, 10 and 20 put it first.
  json env;
  env["format"] = "toy_bash/1";
  env["tasks"] = json::array();
  json script;
  script["format"] = "script/1";
  for (int i = 0; i < 30; ++i) {
    std::string id = "task" + std::to_string(i);
    std::string correct = "correct-" + std::to_string(i);
    env["tasks"].push_back(
        {{"id", id},
         {"prompt", "toy query " + std::to_string(i)},
         {"rewards", {{correct, 1.0}}}});
    int correct_at = (i % 10 == 0) ? 0 : 1 + (i % 4);
    json entries = json::array();
    for (int slot = 0; slot < 5; ++slot) {
      if (slot == correct_at) {
        entries.push_back({{"action", correct}, {"probs", {0.9, 0.85}}});
      } else {
        double p = 0.2 + 0.05 * slot;
        entries.push_back({{"action", "wrong-" + std::to_string(i) + "-" +
                                          std::to_string(slot)},
                           {"probs", {p, p}}});
      }
    }
    script["tasks"][id] = std::move(entries);
  }
  SparseFixture fixture;
  fixture.env = dir / "sparse_env.json";
  fixture.script = dir / "sparse_script.json";
  fixture.config = dir / "sparse_config.json";
  spit(fixture.env, env.dump(2));
  spit(fixture.script, script.dump(2));
  json config;
  config["method"] = "soft_sc";
  config["k"] = 5;
  config["env"] = fixture.env.string();
  config["generator"] = {{"type", "script"}, {"path", fixture.script.string()}};
  config["seed"] = 1;
  spit(fixture.config, config.dump(2));
  return fixture;
}

// 5. sparse-action suite: soft beats vote fallback by a wide margin

void sparse_action_suite(Check& check, const fs::path& dir) {
  SparseFixture fixture = write_sparse_fixture(dir);
  json doc = json::parse(slurp(fixture.config));

  RunConfig soft_config = parse_run_config(doc);
  RunReport soft = execute_run(soft_config);

  doc["method"] = "sc";
  RunConfig sc_config = parse_run_config(doc);
  RunReport sc = execute_run(sc_config);

  double gap = soft.success_rate.mean - sc.success_rate.mean;
  check.expect(gap >= 30.0, "soft-vs-vote gap only " + std::to_string(gap));
  check.expect(sc.majority_failure_rate.mean >= 80.0,
               "majority failure rate only " +
                   std::to_string(sc.majority_failure_rate.mean));
  check.expect(soft.success_rate.mean == 100.0,
               "soft selection missed a constructed case");
}

// 6. adaptive efficiency: same success, far fewer samples

void adaptive_efficiency(Check& check, const fs::path& dir) {
  json env;
  env["format"] = "toy_bash/1";
  env["tasks"] = json::array();
  json pool;
  pool["format"] = "pool/1";
  for (int i = 0; i < 40; ++i) {
    std::string id = "stoch" + std::to_string(i);
    std::string correct = "good-" + std::to_string(i);
    env["tasks"].push_back({{"id", id},
                            {"prompt", "stochastic query " + std::to_string(i)},
                            {"rewards", {{correct, 1.0}}}});
    pool["tasks"][id] = {
        {{"action", correct}, {"probs", {0.9, 0.8}}, {"weight", 0.8}},
        {{"action", "bad-a-" + std::to_string(i)},
         {"probs", {0.3, 0.1}},
         {"weight", 0.1}},
        {{"action", "bad-b-" + std::to_string(i)},
         {"probs", {0.25, 0.12}},
         {"weight", 0.1}},
    };
  }
  fs::path env_path = dir / "pool_env.json";
  fs::path pool_path = dir / "pool_gen.json";
  spit(env_path, env.dump());
  spit(pool_path, pool.dump());

  json doc;
  doc["env"] = env_path.string();
  doc["generator"] = {{"type", "pool"}, {"path", pool_path.string()}};
  doc["seeds"] = {1, 2, 3};
  doc["adaptive"] = {{"rule", "soft"}, {"tau", 0.95}, {"max_k", 10}};

  doc["method"] = "soft_sc";
  doc["k"] = 10;
  RunReport fixed = execute_run(parse_run_config(doc));

  doc["method"] = "adaptive_soft_sc";
  RunReport adaptive = execute_run(parse_run_config(doc));

  check.expect(adaptive.success_rate.mean >= fixed.success_rate.mean,
               "adaptive success " + std::to_string(adaptive.success_rate.mean) +
                   " below fixed-k " + std::to_string(fixed.success_rate.mean));
  check.expect(adaptive.avg_k.mean <= 0.7 * 10.0,
               "avg_k " + std::to_string(adaptive.avg_k.mean) +
                   " exceeds 0.7 * max_k");
  check.expect(fixed.avg_k.mean == 10.0, "fixed-k run did not draw k samples");
}

// 7. black-box call accounting

void blackbox_accounting(Check& check, const fs::path& dir) {
  json env;
  env["format"] = "toy_bash/1";
  env["tasks"] = {{{"id", "t"}, {"prompt", "p"}, {"rewards", {{"e", 1.0}}}}};
  json script;  // text-only entries: the generator exposes no logprobs
  script["format"] = "script/1";
  script["tasks"]["t"] = {
      {{"action", "a"}}, {{"action", "b"}}, {{"action", "c"}},
      {{"action", "d"}}, {{"action", "e"}},
  };
  json scores;
  scores["format"] = "scores/1";
  scores["tasks"]["t"] = {{0.2}, {0.3}, {0.4}, {0.5}, {0.9}};
  fs::path env_path = dir / "bb_env.json";
  fs::path script_path = dir / "bb_script.json";
  fs::path scores_path = dir / "bb_scores.json";
  spit(env_path, env.dump());
  spit(script_path, script.dump());
  spit(scores_path, scores.dump());

  json doc;
  doc["method"] = "soft_sc";
  doc["k"] = 5;
  doc["env"] = env_path.string();
  doc["generator"] = {
      {"type", "blackbox"},
      {"generator", {{"type", "script"}, {"path", script_path.string()}}},
      {"scorer", {{"type", "scores"}, {"path", scores_path.string()}}}};
  RunReport report = execute_run(parse_run_config(doc));

  check.expect(report.total_calls.generate_calls == 5,
               "generate calls: " +
                   std::to_string(report.total_calls.generate_calls));
  check.expect(report.total_calls.score_calls == 5,
               "score calls: " + std::to_string(report.total_calls.score_calls));
  check.expect(report.total_calls.total() == 10,
               "total calls: " + std::to_string(report.total_calls.total()));
  // the rescored argmax ("e" at 0.9) is also the rewarded action
  check.expect(report.success_rate.mean == 100.0, "rescored run failed");
}

// 8. determinism across executions and job counts

void determinism(Check& check, const fs::path& dir, const std::string& cli) {
  SparseFixture fixture = write_sparse_fixture(dir);

  auto run_inprocess = [&fixture](const fs::path& out, int jobs) {
    cli::RunEpisodesOptions options;
    options.config_path = fixture.config.string();
    options.out_path = out.string();
    options.jobs = jobs;
    options.seeds = std::vector<uint64_t>{7, 8, 9};
    std::ostringstream sink;
    cli::cmd_run_episodes(options, sink);
  };
  run_inprocess(dir / "det_a.json", 1);
  run_inprocess(dir / "det_b.json", 1);
  run_inprocess(dir / "det_c.json", 8);
  std::string a = slurp(dir / "det_a.json");
  check.expect(!a.empty(), "empty report");
  check.expect(a == slurp(dir / "det_b.json"),
               "consecutive runs differ (in-process)");
  check.expect(a == slurp(dir / "det_c.json"),
               "--jobs 1 vs --jobs 8 differ (in-process)");

  if (!cli.empty()) {
    auto run_cli = [&](const fs::path& out, int jobs) {
      std::ostringstream cmd;
      cmd << "'" << cli << "' run --config '" << fixture.config.string()
          << "' --seeds 7,8,9 --jobs " << jobs << " --out '" << out.string()
          << "' > /dev/null";
      return std::system(cmd.str().c_str());
    };
    check.expect(run_cli(dir / "cli_a.json", 1) == 0, "cli run 1 failed");
    check.expect(run_cli(dir / "cli_b.json", 1) == 0, "cli run 2 failed");
    check.expect(run_cli(dir / "cli_c.json", 8) == 0, "cli run 3 failed");
    std::string cli_a = slurp(dir / "cli_a.json");
    check.expect(!cli_a.empty() && cli_a == slurp(dir / "cli_b.json"),
                 "consecutive runs differ (cli)");
    check.expect(cli_a == slurp(dir / "cli_c.json"),
                 "--jobs 1 vs --jobs 8 differ (cli)");
    check.expect(cli_a == a, "cli output differs from in-process output");
  }

  // selection over a trace is equally reproducible
  std::ostringstream trace;
  std::mt19937_64 rng(0xD37);
  for (int q = 0; q < 12; ++q) {
    for (int i = 0; i < 5; ++i) {
      TraceRecord record;
      record.query_id = "q" + std::to_string(q);
      record.prompt = "p";
      record.sample.sample_index = i;
      record.sample.raw_text = record.sample.action_text =
          "cmd-" + std::to_string(rng() % 7);
      int len = 1 + static_cast<int>(rng() % 4);
      for (int t = 0; t < len; ++t)
        record.sample.token_probs.push_back(
            {"", 0.05 + 0.9 * (rng() % 1000) / 1000.0});
      write_trace_record(trace, record);
    }
  }
  spit(dir / "det_trace.jsonl", trace.str());
  auto select_to = [&dir](const fs::path& out) {
    cli::SelectOptions options;
    options.trace_path = (dir / "det_trace.jsonl").string();
    options.method = Method::soft_sc;
    options.out_path = out.string();
    std::ostringstream sink;
    cli::cmd_select(options, sink);
  };
  select_to(dir / "sel_a.jsonl");
  select_to(dir / "sel_b.jsonl");
  check.expect(slurp(dir / "sel_a.jsonl") == slurp(dir / "sel_b.jsonl"),
               "cmd_select output differs across runs");
}

// 9. optional live endpoint smoke test

void live_smoke(Check& check, const fs::path& dir) {
  const char* endpoint = std::getenv("SOFTSC_LIVE_ENDPOINT");
  if (!endpoint) {
    std::cout << "SKIP  criterion 9: live endpoint smoke test "
                 "(SOFTSC_LIVE_ENDPOINT not set)"
              << std::endl;
    return;
  }
  spit(dir / "live_query.jsonl",
       R"({"id":"live1","prompt":"Print the current working directory."})"
       "\n");
  cli::AdaptOptions options;
  options.queries_path = (dir / "live_query.jsonl").string();
  options.generator_spec = {{"type", "http"}, {"endpoint", endpoint}};
  if (const char* env = std::getenv("SOFTSC_LIVE_TOKEN_ENV"))
    options.generator_spec["auth_token"] = "${" + std::string(env) + "}";
  options.adaptive.rule = AdaptiveRule::soft;
  options.adaptive.soft = {0.95, 3};
  options.tau_set = true;
  options.out_path = (dir / "live_report.json").string();
  std::ostringstream sink;
  cli::cmd_adapt(options, sink);
  json report = json::parse(slurp(dir / "live_report.json"));
  check.expect(!report["per_query"].empty() &&
                   !report["per_query"][0].contains("error"),
               "live adapt run reported an error");
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli_path;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--cli") cli_path = argv[i + 1];
  }

  fs::path dir =
      fs::temp_directory_path() /
      ("softsc_acceptance_" + std::to_string(std::random_device{}()));
  fs::create_directories(dir);

  criterion(1, "aggregator oracles vs long-double brute force (1000 lists)",
            [](Check& c) { aggregator_oracles(c); }, true, 5.0);
  criterion(2, "selection oracles: brute-force mode/argmax + 200 transforms",
            [](Check& c) { selection_oracles(c); }, true, 10.0);
  criterion(3, "adaptive stopping: 22 traced fixtures, monotonicity, Beta MC",
            [](Check& c) { adaptive_stopping(c); });
  criterion(4, "calibration oracles on 500 random record sets",
            [](Check& c) { calibration_oracles(c); });
  criterion(5, "sparse-action suite: soft vs vote gap and majority failures",
            [&dir](Check& c) { sparse_action_suite(c, dir); }, true, 30.0);
  criterion(6, "adaptive efficiency: matched success at <= 0.7 max_k samples",
            [&dir](Check& c) { adaptive_efficiency(c, dir); });
  criterion(7, "black-box pipeline: k=5 records exactly 10 calls",
            [&dir](Check& c) { blackbox_accounting(c, dir); });
  criterion(8, "determinism across executions and --jobs 1 vs 8",
            [&dir, &cli_path](Check& c) { determinism(c, dir, cli_path); });

  const char* endpoint = std::getenv("SOFTSC_LIVE_ENDPOINT");
  if (endpoint) {
    criterion(9, "live endpoint smoke test",
              [&dir](Check& c) { live_smoke(c, dir); }, /*gating=*/false);
  } else {
    Check dummy;
    live_smoke(dummy, dir);  // prints the SKIP line
  }

  std::error_code ec;
  fs::remove_all(dir, ec);

  if (g_failures > 0) {
    std::cout << g_failures << " criterion(s) failed" << std::endl;
    return 1;
  }
  std::cout << "all gating criteria passed" << std::endl;
  return 0;
}
