#pragma once

#include <optional>
#include <span>
#include <vector>

#include "softsc/errors.hpp"

namespace softsc {

struct PredictionRecord {
  double confidence = 0.0;  // in [0, 1]
  bool correct = false;
};

struct CalibrationBin {
  double low = 0.0;   // lowest confidence in the bin
  double high = 0.0;  // highest confidence in the bin
  double mean_confidence = 0.0;
  double accuracy = 0.0;
  int count = 0;
};

struct CalibrationReport {
  double ece = 0.0;
  std::optional<double> auroc;  // empty when the set is single-class
  std::vector<CalibrationBin> bins;
  int n = 0;
};

// Equal-mass bins over confidence-sorted records (stable: ties keep input
// order); sizes differ by at most one, the first bins absorbing the
// remainder.
std::vector<CalibrationBin> adaptive_bins(
    const std::vector<PredictionRecord>& records, int bin_count);

// sum_b (count_b / n) * |accuracy_b - mean_confidence_b| over those bins.
double ece(const std::vector<PredictionRecord>& records, int bin_count);

// Rank-statistic AUROC with average-rank tie correction:
// P(conf_correct > conf_incorrect) + P(equal)/2. Needs both classes.
double auroc(const std::vector<PredictionRecord>& records);

// Pearson product-moment correlation; needs length >= 3 and nonzero
// variance on both sides.
double pearson_r(std::span<const double> xs, std::span<const double> ys);

// min(10, n/5), clamped to at least 1.
int default_bin_count(int n);

CalibrationReport calibration_report(
    const std::vector<PredictionRecord>& records,
    std::optional<int> bin_count = std::nullopt);

}  // namespace softsc
