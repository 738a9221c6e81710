#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "softsc/adaptive.hpp"
#include "softsc/calibration.hpp"
#include "softsc/episodes.hpp"

namespace py = pybind11;
using namespace softsc;

namespace {

std::vector<TokenProbability> probs_from_list(const std::vector<double>& probs) {
  std::vector<TokenProbability> out;
  out.reserve(probs.size());
  for (double p : probs) out.push_back({"", p});
  return out;
}

Sample make_sample(int sample_index, const std::string& raw_text,
                   const std::string& action_text,
                   const std::vector<double>& token_probs,
                   std::optional<double> verbalized_confidence,
                   std::optional<double> reward) {
  Sample s;
  s.sample_index = sample_index;
  s.raw_text = raw_text.empty() ? action_text : raw_text;
  s.action_text = action_text;
  s.token_probs = probs_from_list(token_probs);
  s.verbalized_confidence = verbalized_confidence;
  s.reward = reward;
  return s;
}

SampleSet make_sample_set(const Query& query, std::vector<Sample> samples) {
  SampleSet set;
  set.query = query;
  set.samples = std::move(samples);
  for (size_t i = 0; i < set.samples.size(); ++i)
    set.samples[i].sample_index = static_cast<int>(i);
  return set;
}

// Adapts a Python callable prompt -> (action, token_probs, confidence|None)
// to the generator interface so the adaptive driver can consume it.
class CallbackGenerator : public Generator {
 public:
  explicit CallbackGenerator(py::function callback)
      : callback_(std::move(callback)) {}

  GeneratorCapabilities capabilities() const override { return {true, false}; }

 private:
  Sample do_generate(const std::string& prompt,
                     const SamplingParams& /*params*/) override {
    py::object result = callback_(prompt);
    auto [action, probs, confidence] =
        result.cast<std::tuple<std::string, std::vector<double>,
                               std::optional<double>>>();
    Sample s;
    s.raw_text = action;
    s.action_text = action;
    s.token_probs = probs_from_list(probs);
    s.verbalized_confidence = confidence;
    return s;
  }

  py::function callback_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "sample-and-select engine: probability-aggregation scoring, "
            "majority voting, adaptive stopping, calibration metrics";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<BackendError>(m, "BackendError", PyExc_RuntimeError);

  py::enum_<TaskKind>(m, "TaskKind")
      .value("single_turn", TaskKind::single_turn)
      .value("trajectory", TaskKind::trajectory)
      .value("per_step", TaskKind::per_step);

  py::enum_<AggregationKind>(m, "AggregationKind")
      .value("min", AggregationKind::min)
      .value("mean", AggregationKind::mean)
      .value("lnp", AggregationKind::length_normalized_product);

  py::enum_<ExtractMode>(m, "ExtractMode")
      .value("verbatim", ExtractMode::verbatim)
      .value("skip_thoughts", ExtractMode::skip_thoughts);

  py::enum_<StopReason>(m, "StopReason")
      .value("threshold_met", StopReason::threshold_met)
      .value("max_k_reached", StopReason::max_k_reached);

  py::class_<Query>(m, "Query")
      .def(py::init([](const std::string& id, const std::string& prompt,
                       TaskKind kind) {
             return Query{id, prompt, kind};
           }),
           py::arg("id"), py::arg("prompt"),
           py::arg("task_kind") = TaskKind::single_turn)
      .def_readonly("id", &Query::id)
      .def_readonly("prompt", &Query::prompt_text)
      .def_readonly("task_kind", &Query::task_kind);

  py::class_<Sample>(m, "Sample")
      .def(py::init(&make_sample), py::arg("sample_index") = 0,
           py::arg("raw_text") = "", py::arg("action") = "",
           py::arg("token_probs") = std::vector<double>{},
           py::arg("verbalized_confidence") = std::nullopt,
           py::arg("reward") = std::nullopt)
      .def_readonly("sample_index", &Sample::sample_index)
      .def_readonly("raw_text", &Sample::raw_text)
      .def_readonly("action", &Sample::action_text)
      .def_property_readonly("token_probs",
                             [](const Sample& s) {
                               std::vector<double> out;
                               for (const TokenProbability& tp : s.token_probs)
                                 out.push_back(tp.probability);
                               return out;
                             })
      .def_readonly("verbalized_confidence", &Sample::verbalized_confidence)
      .def_readonly("reward", &Sample::reward)
      .def("__repr__", [](const Sample& s) {
        return "Sample(index=" + std::to_string(s.sample_index) + ", action='" +
               s.action_text + "')";
      });

  py::class_<SampleSet>(m, "SampleSet")
      .def(py::init(&make_sample_set), py::arg("query"), py::arg("samples"))
      .def_readonly("query", &SampleSet::query)
      .def_readonly("samples", &SampleSet::samples)
      .def_property_readonly("k", &SampleSet::k);

  py::class_<VoteTally>(m, "VoteTally")
      .def_readonly("counts", &VoteTally::counts)
      .def_readonly("first_seen", &VoteTally::first_seen)
      .def_readonly("total", &VoteTally::total)
      .def("top_two", &VoteTally::top_two);

  py::class_<SelectionOutcome>(m, "SelectionOutcome")
      .def_readonly("chosen_index", &SelectionOutcome::chosen_index)
      .def_readonly("per_sample_scores", &SelectionOutcome::per_sample_scores)
      .def_readonly("tally", &SelectionOutcome::tally)
      .def_readonly("unique_majority", &SelectionOutcome::unique_majority)
      .def_readonly("tie_broken", &SelectionOutcome::tie_broken)
      .def_readonly("missing_confidence", &SelectionOutcome::missing_confidence)
      .def("__repr__", [](const SelectionOutcome& o) {
        return "SelectionOutcome(method=" + to_string(o.method) +
               ", chosen_index=" + std::to_string(o.chosen_index) + ")";
      });

  py::class_<AdaptiveRun>(m, "AdaptiveRun")
      .def_readonly("samples", &AdaptiveRun::samples)
      .def_readonly("stop_reason", &AdaptiveRun::stop_reason)
      .def_readonly("final_k", &AdaptiveRun::final_k)
      .def_readonly("trace", &AdaptiveRun::trace);

  py::class_<CalibrationBin>(m, "CalibrationBin")
      .def_readonly("low", &CalibrationBin::low)
      .def_readonly("high", &CalibrationBin::high)
      .def_readonly("mean_confidence", &CalibrationBin::mean_confidence)
      .def_readonly("accuracy", &CalibrationBin::accuracy)
      .def_readonly("count", &CalibrationBin::count);

  py::class_<CalibrationReport>(m, "CalibrationReport")
      .def_readonly("ece", &CalibrationReport::ece)
      .def_readonly("auroc", &CalibrationReport::auroc)
      .def_readonly("bins", &CalibrationReport::bins)
      .def_readonly("n", &CalibrationReport::n);

  // ---- text handling ----
  m.def("extract_action", &extract_action, py::arg("raw_text"),
        py::arg("mode") = ExtractMode::verbatim,
        py::arg("thought_prefix") = std::string(kDefaultThoughtPrefix),
        "Trim a generation to its action; None for empty input or skipped "
        "thoughts.");
  m.def("parse_verbalized_confidence", &parse_verbalized_confidence,
        py::arg("text"),
        "First number in the text, percentages divided by 100; None when no "
        "usable numeral exists.");

  // ---- aggregation ----
  m.def("agg_mean",
        [](const std::vector<double>& probs) { return agg_mean(probs); },
        py::arg("probs"));
  m.def("agg_min",
        [](const std::vector<double>& probs) { return agg_min(probs); },
        py::arg("probs"));
  m.def("agg_lnp",
        [](const std::vector<double>& probs) { return agg_lnp(probs); },
        py::arg("probs"), "exp(mean(log p)), accumulated in log space.");
  m.def("score_sample", &score_sample, py::arg("sample"), py::arg("kind"));
  m.def("default_aggregation", &default_aggregation, py::arg("task_kind"));

  // ---- selection ----
  m.def("tally_votes",
        [](const std::vector<std::string>& actions) {
          return tally_votes(actions);
        },
        py::arg("actions"));
  m.def("select_greedy", &select_greedy, py::arg("samples"));
  m.def("select_majority", &select_majority, py::arg("samples"));
  m.def("select_majority_keys", &select_majority_keys, py::arg("keys"));
  m.def("select_soft", &select_soft, py::arg("samples"), py::arg("kind"));
  m.def("select_verbalized", &select_verbalized, py::arg("samples"));

  // ---- adaptive stopping ----
  m.def("soft_stop_decision",
        [](const std::vector<double>& mins, double tau, int max_k) {
          return soft_stop_decision(mins, AdaptiveSoftConfig{tau, max_k});
        },
        py::arg("min_probs_so_far"), py::arg("tau"), py::arg("max_k") = 10);
  m.def("beta_majority_confidence", &beta_majority_confidence,
        py::arg("top_count"), py::arg("runner_up_count"),
        py::arg("prior_alpha") = 1.0, py::arg("prior_beta") = 1.0);
  m.def("beta_majority_confidence_binomial", &beta_majority_confidence_binomial,
        py::arg("top_count"), py::arg("runner_up_count"));
  m.def("ac_stop_decision",
        [](const VoteTally& tally, double confidence_threshold, int max_k,
           int min_k_before_check) {
          AdaptiveConsistencyConfig config;
          config.confidence_threshold = confidence_threshold;
          config.max_k = max_k;
          config.min_k_before_check = min_k_before_check;
          return ac_stop_decision(tally, config);
        },
        py::arg("tally"), py::arg("confidence_threshold"),
        py::arg("max_k") = 10, py::arg("min_k_before_check") = 2);

  m.def("run_adaptive_soft",
        [](const Query& query, py::function generate, double tau, int max_k,
           AggregationKind kind) {
          CallbackGenerator generator(std::move(generate));
          AdaptiveSpec spec;
          spec.rule = AdaptiveRule::soft;
          spec.soft = {tau, max_k};
          return run_adaptive(query, generator,
                              default_sampling_params(query.task_kind), spec,
                              kind);
        },
        py::arg("query"), py::arg("generate"), py::arg("tau"),
        py::arg("max_k") = 10, py::arg("kind") = AggregationKind::mean,
        "Draw samples one at a time from `generate(prompt) -> (action, "
        "token_probs, confidence|None)` until the cumulative minimum "
        "probability reaches tau; returns (AdaptiveRun, SelectionOutcome).");
  m.def("run_adaptive_consistency",
        [](const Query& query, py::function generate,
           double confidence_threshold, int max_k, int min_k_before_check) {
          CallbackGenerator generator(std::move(generate));
          AdaptiveSpec spec;
          spec.rule = AdaptiveRule::adaptive_consistency;
          spec.ac.confidence_threshold = confidence_threshold;
          spec.ac.max_k = max_k;
          spec.ac.min_k_before_check = min_k_before_check;
          return run_adaptive(query, generator,
                              default_sampling_params(query.task_kind), spec,
                              AggregationKind::mean);
        },
        py::arg("query"), py::arg("generate"),
        py::arg("confidence_threshold") = 0.8, py::arg("max_k") = 10,
        py::arg("min_k_before_check") = 2);

  // ---- calibration ----
  m.def("adaptive_bins",
        [](const std::vector<std::pair<double, bool>>& records, int bins) {
          std::vector<PredictionRecord> converted;
          for (const auto& [c, ok] : records) converted.push_back({c, ok});
          return adaptive_bins(converted, bins);
        },
        py::arg("records"), py::arg("bins"));
  m.def("ece",
        [](const std::vector<std::pair<double, bool>>& records, int bins) {
          std::vector<PredictionRecord> converted;
          for (const auto& [c, ok] : records) converted.push_back({c, ok});
          return ece(converted, bins);
        },
        py::arg("records"), py::arg("bins"));
  m.def("auroc",
        [](const std::vector<std::pair<double, bool>>& records) {
          std::vector<PredictionRecord> converted;
          for (const auto& [c, ok] : records) converted.push_back({c, ok});
          return auroc(converted);
        },
        py::arg("records"));
  m.def("pearson_r",
        [](const std::vector<double>& xs, const std::vector<double>& ys) {
          return pearson_r(xs, ys);
        },
        py::arg("xs"), py::arg("ys"));
  m.def("calibration_report",
        [](const std::vector<std::pair<double, bool>>& records,
           std::optional<int> bins) {
          std::vector<PredictionRecord> converted;
          for (const auto& [c, ok] : records) converted.push_back({c, ok});
          return calibration_report(converted, bins);
        },
        py::arg("records"), py::arg("bins") = std::nullopt);

  m.attr("__version__") = "0.1.0";
}
