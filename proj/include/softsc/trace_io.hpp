#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "softsc/calibration.hpp"
#include "softsc/model.hpp"

namespace softsc {

// One line of a trace file. On disk the record stores token logprobs (what
// endpoints return); probabilities are materialized at ingestion.
//
// {schema_version, query_id, prompt, sample_index, raw_text, action,
//  token_logprobs: [numbers], verbalized_confidence?, reward?}
struct TraceRecord {
  int schema_version = 1;
  std::string query_id;
  std::string prompt;
  Sample sample;
};

inline constexpr int kTraceSchemaVersion = 1;

// Line-oriented reader; next() yields records until end of file (nullopt),
// malformed lines raise DataError carrying the line number.
class TraceReader {
 public:
  explicit TraceReader(std::istream& in) : in_(in) {}

  std::optional<TraceRecord> next();
  int line() const { return line_; }

 private:
  std::istream& in_;
  int line_ = 0;
};

void write_trace_record(std::ostream& out, const TraceRecord& record);

// Contiguous same-query_id runs become one SampleSet each; a query id that
// reappears after a different group is a data error.
std::vector<SampleSet> read_trace_groups(std::istream& in);

// Calibration records file: one {"confidence": x, "correct": bool} per line.
std::vector<PredictionRecord> read_prediction_records(std::istream& in);

// Query file: one {"id", "prompt", "task_kind"?} per line.
std::vector<Query> read_queries(std::istream& in);

}  // namespace softsc
