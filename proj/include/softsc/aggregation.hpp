#pragma once

#include <span>
#include <string>
#include <string_view>

#include "softsc/model.hpp"

namespace softsc {

// The aggregation function f over a sample's token probabilities.
// "product" is always length-normalized: exp(mean log p).
enum class AggregationKind { min, mean, length_normalized_product };

std::string to_string(AggregationKind kind);
AggregationKind aggregation_from_string(std::string_view name);

// All three reject an empty list and any element outside (0,1]; a reported
// zero probability for an emitted token is a malformed trace, not a value
// to clamp.
double agg_mean(std::span<const double> probs);
double agg_min(std::span<const double> probs);

// exp((1/n) sum log p), accumulated in log space so hundred-token actions
// cannot underflow.
double agg_lnp(std::span<const double> probs);

double aggregate(std::span<const double> probs, AggregationKind kind);

// Scores a validated sample by dispatching over its token probabilities.
double score_sample(const Sample& sample, AggregationKind kind);

// Task-kind defaults: mean for single-turn and per-step selection, min for
// trajectory scoring. Overridable in config.
AggregationKind default_aggregation(TaskKind task);

}  // namespace softsc
