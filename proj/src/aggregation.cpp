#include "softsc/aggregation.hpp"

#include <algorithm>
#include <cmath>

namespace softsc {

namespace {

void check_probs(std::span<const double> probs) {
  if (probs.empty()) throw DomainError("empty probability list");
  for (double p : probs) {
    if (!(p > 0.0) || p > 1.0) throw DomainError("probability out of (0,1]");
  }
}

}  // namespace

std::string to_string(AggregationKind kind) {
  switch (kind) {
    case AggregationKind::min: return "min";
    case AggregationKind::mean: return "mean";
    case AggregationKind::length_normalized_product: return "lnp";
  }
  return "mean";
}

AggregationKind aggregation_from_string(std::string_view name) {
  if (name == "min") return AggregationKind::min;
  if (name == "mean") return AggregationKind::mean;
  if (name == "lnp" || name == "product" || name == "length_normalized_product")
    return AggregationKind::length_normalized_product;
  throw ConfigError("unknown aggregation: " + std::string(name));
}

double agg_mean(std::span<const double> probs) {
  check_probs(probs);
  double sum = 0.0;
  for (double p : probs) sum += p;
  return std::min(sum / static_cast<double>(probs.size()), 1.0);
}

double agg_min(std::span<const double> probs) {
  check_probs(probs);
  return *std::min_element(probs.begin(), probs.end());
}

double agg_lnp(std::span<const double> probs) {
  check_probs(probs);
  if (probs.size() == 1) return probs[0];  // exp(log p) would lose a ulp
  double log_sum = 0.0;
  for (double p : probs) log_sum += std::log(p);
  return std::min(std::exp(log_sum / static_cast<double>(probs.size())), 1.0);
}

double aggregate(std::span<const double> probs, AggregationKind kind) {
  switch (kind) {
    case AggregationKind::min: return agg_min(probs);
    case AggregationKind::mean: return agg_mean(probs);
    case AggregationKind::length_normalized_product: return agg_lnp(probs);
  }
  throw DomainError("unreachable aggregation kind");
}

double score_sample(const Sample& sample, AggregationKind kind) {
  if (sample.token_probs.empty())
    throw DomainError("cannot score a sample with an empty token list");
  std::vector<double> probs;
  probs.reserve(sample.token_probs.size());
  for (const TokenProbability& tp : sample.token_probs)
    probs.push_back(tp.probability);
  return aggregate(probs, kind);
}

AggregationKind default_aggregation(TaskKind task) {
  switch (task) {
    case TaskKind::single_turn: return AggregationKind::mean;
    case TaskKind::per_step: return AggregationKind::mean;
    case TaskKind::trajectory: return AggregationKind::min;
  }
  return AggregationKind::mean;
}

}  // namespace softsc
