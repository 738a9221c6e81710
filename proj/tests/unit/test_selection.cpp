#include "softsc/selection.hpp"

#include <cmath>
#include <map>
#include <random>

#include "doctest.h"

using namespace softsc;

namespace {

SampleSet set_of(std::vector<std::string> actions,
                 std::vector<std::vector<double>> probs = {},
                 std::vector<std::optional<double>> confs = {}) {
  SampleSet set;
  set.query = {"q", "prompt", TaskKind::single_turn};
  for (size_t i = 0; i < actions.size(); ++i) {
    Sample s;
    s.sample_index = static_cast<int>(i);
    s.raw_text = actions[i];
    s.action_text = actions[i];
    if (i < probs.size())
      for (double p : probs[i]) s.token_probs.push_back({"", p});
    if (i < confs.size()) s.verbalized_confidence = confs[i];
    set.samples.push_back(std::move(s));
  }
  return set;
}

// Brute-force mode with first-seen tie-break, kept deliberately dumb.
int brute_force_mode_index(const std::vector<std::string>& actions) {
  int best_count = 0;
  int best_first = static_cast<int>(actions.size());
  for (size_t i = 0; i < actions.size(); ++i) {
    int count = 0;
    int first = static_cast<int>(i);
    for (size_t j = 0; j < actions.size(); ++j) {
      if (actions[j] == actions[i]) {
        ++count;
        first = std::min(first, static_cast<int>(j));
      }
    }
    if (count > best_count || (count == best_count && first < best_first)) {
      best_count = count;
      best_first = first;
    }
  }
  return best_first;
}

}  // namespace

TEST_CASE("tally_votes counts trimmed exact matches") {
  VoteTally tally = tally_votes(std::vector<std::string>{"ls -l", "ls -l", "pwd"});
  CHECK(tally.counts.at("ls -l") == 2);
  CHECK(tally.counts.at("pwd") == 1);
  CHECK(tally.first_seen.at("ls -l") == 0);
  CHECK(tally.first_seen.at("pwd") == 2);
  CHECK(tally.total == 3);

  // Surface-distinct commands stay distinct.
  VoteTally flags = tally_votes(std::vector<std::string>{"ls -ltr", "ls -trl"});
  CHECK(flags.counts.at("ls -ltr") == 1);
  CHECK(flags.counts.at("ls -trl") == 1);

  VoteTally one = tally_votes(std::vector<std::string>{"a"});
  CHECK(one.counts.at("a") == 1);

  CHECK_THROWS_AS(tally_votes(std::vector<std::string>{}), DomainError);
  CHECK_THROWS_AS(tally_votes(std::vector<std::string>{"a", "  "}), DomainError);
}

TEST_CASE("tally sums to the number of samples") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> actions(1 + rng() % 20);
    for (std::string& a : actions) a = std::string(1, 'a' + rng() % 6);
    VoteTally tally = tally_votes(actions);
    int sum = 0;
    for (const auto& [key, count] : tally.counts) {
      sum += count;
      CHECK(tally.first_seen.count(key) == 1);
    }
    CHECK(sum == static_cast<int>(actions.size()));
  }
}

TEST_CASE("select_majority picks the modal action, first seen on ties") {
  SampleSet set = set_of({"ls -l", "ls -l", "pwd"});
  SelectionOutcome outcome = select_majority(set);
  CHECK(outcome.chosen_index == 0);
  CHECK(outcome.unique_majority);
  CHECK(!outcome.tie_broken);

  SampleSet distinct = set_of({"a", "b", "c", "d", "e"});
  outcome = select_majority(distinct);
  CHECK(outcome.chosen_index == 0);
  CHECK(!outcome.unique_majority);
  CHECK(outcome.tie_broken);

  SampleSet single = set_of({"a"});
  outcome = select_majority(single);
  CHECK(outcome.chosen_index == 0);
  CHECK(outcome.unique_majority);

  // The winner is the modal action's first occurrence, not sample 0.
  SampleSet late = set_of({"x", "y", "y"});
  outcome = select_majority(late);
  CHECK(outcome.chosen_index == 1);
  CHECK(outcome.unique_majority);
}

TEST_CASE("select_majority equals brute-force mode on random sets") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::string> actions(1 + rng() % 20);
    for (std::string& a : actions) a = std::string(1, 'a' + rng() % 6);
    SampleSet set = set_of(actions);
    CHECK(select_majority(set).chosen_index == brute_force_mode_index(actions));
  }
}

TEST_CASE("select_soft picks the argmax score") {
  SampleSet set = set_of({"a", "b", "c"}, {{0.3}, {0.9}, {0.5}});
  SelectionOutcome outcome = select_soft(set, AggregationKind::mean);
  CHECK(outcome.chosen_index == 1);
  REQUIRE(outcome.per_sample_scores);
  CHECK((*outcome.per_sample_scores)[1] == doctest::Approx(0.9));
  CHECK(!outcome.tie_broken);

  SampleSet tied = set_of({"a", "b"}, {{0.7}, {0.7}});
  outcome = select_soft(tied, AggregationKind::mean);
  CHECK(outcome.chosen_index == 0);
  CHECK(outcome.tie_broken);

  SampleSet identical = set_of({"go", "go", "go"}, {{0.6}, {0.6}, {0.6}});
  outcome = select_soft(identical, AggregationKind::min);
  CHECK(outcome.chosen_index == 0);
  CHECK(set_of({"go"}).samples[0].action_text ==
        identical.samples[outcome.chosen_index].action_text);

  SampleSet missing = set_of({"a", "b"}, {{0.5}});
  CHECK_THROWS_AS(select_soft(missing, AggregationKind::mean), DomainError);
}

TEST_CASE("select_soft never inspects action text") {
  SampleSet set = set_of({"a", "b", "c"}, {{0.3, 0.2}, {0.9, 0.7}, {0.5}});
  int before = select_soft(set, AggregationKind::mean).chosen_index;
  for (Sample& s : set.samples) s.action_text = "renamed " + s.action_text;
  CHECK(select_soft(set, AggregationKind::mean).chosen_index == before);
}

TEST_CASE("select_soft equals brute-force argmax on random sets") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> value(1e-6, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    int k = 1 + static_cast<int>(rng() % 20);
    SampleSet set;
    set.query = {"q", "p", TaskKind::single_turn};
    for (int i = 0; i < k; ++i) {
      Sample s;
      s.sample_index = i;
      s.raw_text = s.action_text = "a" + std::to_string(i);
      int len = 1 + static_cast<int>(rng() % 6);
      for (int t = 0; t < len; ++t) s.token_probs.push_back({"", value(rng)});
      set.samples.push_back(std::move(s));
    }
    for (AggregationKind kind :
         {AggregationKind::min, AggregationKind::mean,
          AggregationKind::length_normalized_product}) {
      SelectionOutcome outcome = select_soft(set, kind);
      int expect = 0;
      for (int i = 0; i < k; ++i) {
        if (score_sample(set.samples[i], kind) >
            score_sample(set.samples[expect], kind))
          expect = i;
      }
      CHECK(outcome.chosen_index == expect);
    }
  }
}

TEST_CASE("argmax is invariant under monotone transforms of scores") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> value(1e-6, 1.0);
  SampleSet set;
  set.query = {"q", "p", TaskKind::single_turn};
  for (int i = 0; i < 8; ++i) {
    Sample s;
    s.sample_index = i;
    s.raw_text = s.action_text = "a" + std::to_string(i);
    for (int t = 0; t < 3; ++t) s.token_probs.push_back({"", value(rng)});
    set.samples.push_back(std::move(s));
  }
  SelectionOutcome outcome =
      select_soft(set, AggregationKind::length_normalized_product);
  const std::vector<double>& scores = *outcome.per_sample_scores;

  for (int trial = 0; trial < 50; ++trial) {
    double a = 0.1 + value(rng) * 5.0;
    double b = value(rng) - 0.5;
    double gamma = 0.2 + value(rng) * 3.0;
    auto argmax = [](const std::vector<double>& xs) {
      int best = 0;
      for (size_t i = 1; i < xs.size(); ++i)
        if (xs[i] > xs[best]) best = static_cast<int>(i);
      return best;
    };
    std::vector<double> affine, powed;
    for (double s : scores) {
      affine.push_back(a * s + b);
      powed.push_back(std::pow(s, gamma));
    }
    CHECK(argmax(affine) == outcome.chosen_index);
    CHECK(argmax(powed) == outcome.chosen_index);
  }

  // lnp argmax equals mean-of-log-probabilities argmax
  std::vector<double> mean_logs;
  for (const Sample& s : set.samples) {
    double sum = 0.0;
    for (const TokenProbability& tp : s.token_probs)
      sum += std::log(tp.probability);
    mean_logs.push_back(sum / s.token_probs.size());
  }
  int best = 0;
  for (size_t i = 1; i < mean_logs.size(); ++i)
    if (mean_logs[i] > mean_logs[best]) best = static_cast<int>(i);
  CHECK(best == outcome.chosen_index);
}

TEST_CASE("select_verbalized") {
  SampleSet set = set_of({"a", "b", "c"}, {}, {0.2, 0.95, 0.5});
  SelectionOutcome outcome = select_verbalized(set);
  CHECK(outcome.chosen_index == 1);
  CHECK(outcome.missing_confidence.empty());

  SampleSet with_missing = set_of({"a", "b"}, {}, {std::nullopt, 0.4});
  outcome = select_verbalized(with_missing);
  CHECK(outcome.chosen_index == 1);
  CHECK(outcome.missing_confidence == std::vector<int>{0});

  SampleSet tied = set_of({"a", "b", "c"}, {}, {0.4, std::nullopt, 0.4});
  outcome = select_verbalized(tied);
  CHECK(outcome.chosen_index == 0);
  CHECK(outcome.tie_broken);

  SampleSet none = set_of({"a", "b"}, {}, {std::nullopt, std::nullopt});
  CHECK_THROWS_WITH_AS(select_verbalized(none), "no verbalized scores present",
                       DomainError);
}

TEST_CASE("with k=1 every method returns index 0") {
  SampleSet set = set_of({"only"}, {{0.5, 0.6}}, {0.4});
  CHECK(select_greedy(set).chosen_index == 0);
  CHECK(select_majority(set).chosen_index == 0);
  CHECK(select_soft(set, AggregationKind::mean).chosen_index == 0);
  CHECK(select_verbalized(set).chosen_index == 0);
}

TEST_CASE("parse_verbalized_confidence") {
  CHECK(*parse_verbalized_confidence("Confidence: 0.85") ==
        doctest::Approx(0.85));
  CHECK(*parse_verbalized_confidence("I am 90% sure") == doctest::Approx(0.9));
  CHECK(!parse_verbalized_confidence("very confident"));
  CHECK(*parse_verbalized_confidence("1") == 1.0);
  CHECK(*parse_verbalized_confidence("100") == 1.0);
  CHECK(*parse_verbalized_confidence("score=.75") == doctest::Approx(0.75));
  CHECK(!parse_verbalized_confidence("150 percent"));
  CHECK(!parse_verbalized_confidence("-3"));
  CHECK(!parse_verbalized_confidence(""));
}

TEST_CASE("selection errors on empty sets") {
  SampleSet empty;
  CHECK_THROWS_AS(select_greedy(empty), DomainError);
  CHECK_THROWS_AS(select_majority(empty), DomainError);
  CHECK_THROWS_AS(select_soft(empty, AggregationKind::mean), DomainError);
  CHECK_THROWS_AS(select_verbalized(empty), DomainError);
}
