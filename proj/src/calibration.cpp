#include "softsc/calibration.hpp"

#include <algorithm>
#include <cmath>

namespace softsc {

namespace {

void check_records(const std::vector<PredictionRecord>& records) {
  for (const PredictionRecord& r : records) {
    if (r.confidence < 0.0 || r.confidence > 1.0)
      throw DomainError("confidence out of [0,1]");
  }
}

}  // namespace

std::vector<CalibrationBin> adaptive_bins(
    const std::vector<PredictionRecord>& records, int bin_count) {
  check_records(records);
  if (bin_count < 1) throw DomainError("bin count must be >= 1");
  if (static_cast<int>(records.size()) < bin_count)
    throw DomainError("fewer records than bins");

  std::vector<PredictionRecord> sorted = records;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const PredictionRecord& a, const PredictionRecord& b) {
                     return a.confidence < b.confidence;
                   });

  int n = static_cast<int>(sorted.size());
  int base = n / bin_count;
  int remainder = n % bin_count;

  std::vector<CalibrationBin> bins;
  bins.reserve(bin_count);
  int pos = 0;
  for (int b = 0; b < bin_count; ++b) {
    int size = base + (b < remainder ? 1 : 0);
    CalibrationBin bin;
    bin.count = size;
    bin.low = sorted[pos].confidence;
    bin.high = sorted[pos + size - 1].confidence;
    double conf_sum = 0.0;
    int correct = 0;
    for (int i = pos; i < pos + size; ++i) {
      conf_sum += sorted[i].confidence;
      if (sorted[i].correct) ++correct;
    }
    bin.mean_confidence = conf_sum / size;
    bin.accuracy = static_cast<double>(correct) / size;
    bins.push_back(bin);
    pos += size;
  }
  return bins;
}

double ece(const std::vector<PredictionRecord>& records, int bin_count) {
  std::vector<CalibrationBin> bins = adaptive_bins(records, bin_count);
  double n = static_cast<double>(records.size());
  double total = 0.0;
  for (const CalibrationBin& bin : bins)
    total += (bin.count / n) * std::abs(bin.accuracy - bin.mean_confidence);
  return total;
}

double auroc(const std::vector<PredictionRecord>& records) {
  check_records(records);
  size_t n = records.size();
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return records[a].confidence < records[b].confidence;
  });

  // Average ranks within tie groups, then the Mann-Whitney U statistic.
  std::vector<double> rank(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && records[order[j + 1]].confidence ==
                            records[order[i]].confidence)
      ++j;
    double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }

  long n_pos = 0;
  double rank_sum_pos = 0.0;
  for (size_t k = 0; k < n; ++k) {
    if (records[k].correct) {
      ++n_pos;
      rank_sum_pos += rank[k];
    }
  }
  long n_neg = static_cast<long>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw DomainError("AUROC undefined for single-class records");

  double u = rank_sum_pos - static_cast<double>(n_pos) * (n_pos + 1) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double pearson_r(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw DomainError("pearson_r length mismatch");
  size_t n = xs.size();
  if (n < 3) throw DomainError("pearson_r needs at least 3 points");

  double mean_x = 0.0, mean_y = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mean_x += xs[i];
    mean_y += ys[i];
  }
  mean_x /= n;
  mean_y /= n;

  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double dx = xs[i] - mean_x;
    double dy = ys[i] - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw DomainError("pearson_r undefined for zero variance");
  return sxy / std::sqrt(sxx * syy);
}

int default_bin_count(int n) {
  return std::max(1, std::min(10, n / 5));
}

CalibrationReport calibration_report(
    const std::vector<PredictionRecord>& records,
    std::optional<int> bin_count) {
  if (records.empty()) throw DomainError("no prediction records");
  int bins = bin_count.value_or(default_bin_count(static_cast<int>(records.size())));

  CalibrationReport report;
  report.n = static_cast<int>(records.size());
  report.bins = adaptive_bins(records, bins);
  double n = static_cast<double>(records.size());
  for (const CalibrationBin& bin : report.bins)
    report.ece += (bin.count / n) * std::abs(bin.accuracy - bin.mean_confidence);

  bool any_correct = false, any_incorrect = false;
  for (const PredictionRecord& r : records)
    (r.correct ? any_correct : any_incorrect) = true;
  if (any_correct && any_incorrect) report.auroc = auroc(records);
  return report;
}

}  // namespace softsc
