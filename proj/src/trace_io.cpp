#include "softsc/trace_io.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "json.hpp"

namespace softsc {

using nlohmann::json;

namespace {

[[noreturn]] void malformed(int line, const std::string& what) {
  throw DataError("trace line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::optional<TraceRecord> TraceReader::next() {
  std::string text;
  while (std::getline(in_, text)) {
    ++line_;
    if (trim(text).empty()) continue;

    json parsed;
    try {
      parsed = json::parse(text);
    } catch (const json::exception& e) {
      malformed(line_, e.what());
    }

    TraceRecord record;
    try {
      record.schema_version = parsed.value("schema_version", 1);
      if (record.schema_version != kTraceSchemaVersion)
        malformed(line_, "unsupported schema_version " +
                             std::to_string(record.schema_version));
      record.query_id = parsed.at("query_id").get<std::string>();
      record.prompt = parsed.value("prompt", "");
      record.sample.sample_index = parsed.at("sample_index").get<int>();
      record.sample.raw_text = parsed.value("raw_text", "");
      if (parsed.contains("action") && !parsed["action"].is_null())
        record.sample.action_text = parsed["action"].get<std::string>();
      if (parsed.contains("token_logprobs")) {
        for (const json& lp : parsed.at("token_logprobs")) {
          double logprob = lp.get<double>();
          if (logprob > 0.0) malformed(line_, "positive token logprob");
          record.sample.token_probs.push_back(
              {"", probability_from_logprob(logprob)});
        }
      }
      if (parsed.contains("verbalized_confidence") &&
          !parsed["verbalized_confidence"].is_null())
        record.sample.verbalized_confidence =
            parsed["verbalized_confidence"].get<double>();
      if (parsed.contains("reward") && !parsed["reward"].is_null())
        record.sample.reward = parsed["reward"].get<double>();
    } catch (const DataError&) {
      throw;
    } catch (const json::exception& e) {
      malformed(line_, e.what());
    }

    try {
      validate_sample(record.sample, /*require_token_probs=*/false);
    } catch (const DomainError& e) {
      malformed(line_, e.what());
    }
    return record;
  }
  return std::nullopt;
}

void write_trace_record(std::ostream& out, const TraceRecord& record) {
  json line;
  line["schema_version"] = kTraceSchemaVersion;
  line["query_id"] = record.query_id;
  line["prompt"] = record.prompt;
  line["sample_index"] = record.sample.sample_index;
  line["raw_text"] = record.sample.raw_text;
  line["action"] = record.sample.action_text;
  json logprobs = json::array();
  for (const TokenProbability& tp : record.sample.token_probs)
    logprobs.push_back(std::log(tp.probability));
  line["token_logprobs"] = std::move(logprobs);
  if (record.sample.verbalized_confidence)
    line["verbalized_confidence"] = *record.sample.verbalized_confidence;
  if (record.sample.reward) line["reward"] = *record.sample.reward;
  out << line.dump() << "\n";
}

std::vector<SampleSet> read_trace_groups(std::istream& in) {
  TraceReader reader(in);
  std::vector<SampleSet> groups;
  std::vector<std::string> seen;

  while (auto record = reader.next()) {
    if (groups.empty() || groups.back().query.id != record->query_id) {
      for (const std::string& id : seen) {
        if (id == record->query_id)
          throw DataError("trace line " + std::to_string(reader.line()) +
                          ": query id '" + id +
                          "' reappears after another group (trace must be "
                          "grouped by query id)");
      }
      seen.push_back(record->query_id);
      SampleSet set;
      set.query.id = record->query_id;
      set.query.prompt_text = record->prompt.empty() ? record->query_id
                                                     : record->prompt;
      groups.push_back(std::move(set));
    }
    groups.back().samples.push_back(std::move(record->sample));
  }
  return groups;
}

std::vector<PredictionRecord> read_prediction_records(std::istream& in) {
  std::vector<PredictionRecord> records;
  std::string text;
  int line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    PredictionRecord record;
    try {
      json parsed = json::parse(text);
      record.confidence = parsed.at("confidence").get<double>();
      record.correct = parsed.at("correct").get<bool>();
    } catch (const json::exception& e) {
      throw DataError("records line " + std::to_string(line) + ": " + e.what());
    }
    if (record.confidence < 0.0 || record.confidence > 1.0)
      throw DataError("records line " + std::to_string(line) +
                      ": confidence out of [0,1]");
    records.push_back(record);
  }
  return records;
}

std::vector<Query> read_queries(std::istream& in) {
  std::vector<Query> queries;
  std::string text;
  int line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    try {
      json parsed = json::parse(text);
      Query query;
      query.id = parsed.at("id").get<std::string>();
      query.prompt_text = parsed.at("prompt").get<std::string>();
      if (parsed.contains("task_kind"))
        query.task_kind =
            task_kind_from_string(parsed["task_kind"].get<std::string>());
      validate_query(query);
      queries.push_back(std::move(query));
    } catch (const json::exception& e) {
      throw DataError("query line " + std::to_string(line) + ": " + e.what());
    } catch (const DataError&) {
      throw;
    } catch (const Error& e) {
      throw DataError("query line " + std::to_string(line) + ": " + e.what());
    }
  }
  return queries;
}

}  // namespace softsc
