// Copyright 2026 The Cascade Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cascade/trace.hpp"

#include <fstream>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "cascade/error.hpp"

namespace cascade {

using json = nlohmann::json;

double TraceRecord::score(Tier tier) const {
  const auto& stored = tier == Tier::kFirst ? tier1_score : tier2_score;
  if (stored) return *stored;
  if (gold_label) return pred(tier) == *gold_label ? 1.0 : 0.0;
  throw_validation("record '" + id + "' has neither a gold label nor a tier" +
                   std::to_string(static_cast<int>(tier)) + "_score");
}

MetricSpec MetricSpec::parse(std::string_view name, std::string positive_label) {
  if (name == "accuracy") return {MetricKind::kAccuracy, std::move(positive_label)};
  if (name == "f1" || name == "binary-f1") return {MetricKind::kBinaryF1, std::move(positive_label)};
  if (name == "mcc") return {MetricKind::kMcc, std::move(positive_label)};
  if (name == "mean-score") return {MetricKind::kMeanScore, std::move(positive_label)};
  throw_usage("unknown metric '" + std::string(name) +
              "' (expected accuracy, f1, mcc or mean-score)");
}

std::string MetricSpec::name() const {
  switch (kind) {
    case MetricKind::kAccuracy: return "accuracy";
    case MetricKind::kBinaryF1: return "f1";
    case MetricKind::kMcc: return "mcc";
    case MetricKind::kMeanScore: return "mean-score";
  }
  return "unknown";
}

namespace {

bool in_unit_interval(double v) { return v >= 0.0 && v <= 1.0; }

std::set<std::string> gold_label_set(const Trace& trace) {
  std::set<std::string> labels;
  for (const auto& r : trace.records) {
    if (r.gold_label) labels.insert(*r.gold_label);
  }
  return labels;
}

std::string where(std::size_t line_number) { return "line " + std::to_string(line_number); }

std::string require_string(const json& obj, const char* key, std::size_t line_number) {
  auto it = obj.find(key);
  if (it == obj.end()) throw_validation(where(line_number) + ": missing required field '" + key + "'");
  if (!it->is_string()) throw_validation(where(line_number) + ": field '" + key + "' must be a string");
  return it->get<std::string>();
}

std::optional<double> optional_number(const json& obj, const char* key, std::size_t line_number) {
  auto it = obj.find(key);
  if (it == obj.end()) return std::nullopt;
  if (!it->is_number()) throw_validation(where(line_number) + ": field '" + key + "' must be a number");
  return it->get<double>();
}

const std::set<std::string_view>& known_fields() {
  static const std::set<std::string_view> fields = {
      "id",         "gold_label",  "tier1_pred", "tier1_confidence", "tier1_score",
      "tier2_pred", "tier2_score", "tier1_cost", "tier2_cost"};
  return fields;
}

TraceMetadata parse_header(const json& obj, std::size_t line_number) {
  const json& h = obj.at(kTraceHeaderKey);
  if (!h.is_object()) throw_validation(where(line_number) + ": header must be an object");
  TraceMetadata meta;
  auto get = [&](const char* key, std::string& out) {
    auto it = h.find(key);
    if (it == h.end()) return;
    if (!it->is_string()) throw_validation(where(line_number) + ": header field '" + key + "' must be a string");
    out = it->get<std::string>();
  };
  get("dataset", meta.dataset);
  get("metric", meta.metric);
  get("tier1_model", meta.tier1_model);
  get("tier2_model", meta.tier2_model);
  return meta;
}

TraceRecord record_from_json(const json& obj, std::size_t line_number) {
  for (const auto& [key, value] : obj.items()) {
    if (!known_fields().contains(key)) {
      throw_validation(where(line_number) + ": unknown field '" + key + "'");
    }
  }
  TraceRecord r;
  r.id = require_string(obj, "id", line_number);
  if (auto it = obj.find("gold_label"); it != obj.end()) {
    if (!it->is_string()) throw_validation(where(line_number) + ": field 'gold_label' must be a string");
    r.gold_label = it->get<std::string>();
  }
  r.tier1_pred = require_string(obj, "tier1_pred", line_number);
  auto conf = optional_number(obj, "tier1_confidence", line_number);
  if (!conf) throw_validation(where(line_number) + ": missing required field 'tier1_confidence'");
  r.tier1_confidence = *conf;
  r.tier1_score = optional_number(obj, "tier1_score", line_number);
  r.tier2_pred = require_string(obj, "tier2_pred", line_number);
  r.tier2_score = optional_number(obj, "tier2_score", line_number);
  r.tier1_cost = optional_number(obj, "tier1_cost", line_number);
  r.tier2_cost = optional_number(obj, "tier2_cost", line_number);
  return r;
}

json record_to_json(const TraceRecord& r) {
  // Field order follows the record definition so files diff cleanly.
  json obj = json::object();
  obj["id"] = r.id;
  if (r.gold_label) obj["gold_label"] = *r.gold_label;
  obj["tier1_pred"] = r.tier1_pred;
  obj["tier1_confidence"] = r.tier1_confidence;
  if (r.tier1_score) obj["tier1_score"] = *r.tier1_score;
  obj["tier2_pred"] = r.tier2_pred;
  if (r.tier2_score) obj["tier2_score"] = *r.tier2_score;
  if (r.tier1_cost) obj["tier1_cost"] = *r.tier1_cost;
  if (r.tier2_cost) obj["tier2_cost"] = *r.tier2_cost;
  return obj;
}

}  // namespace

void validate_trace(const Trace& trace) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(trace.records.size());
  for (const auto& r : trace.records) {
    if (r.id.empty()) throw_validation("record with empty id");
    if (!seen.insert(r.id).second) throw_validation("duplicate record id '" + r.id + "'");
    if (!in_unit_interval(r.tier1_confidence)) {
      throw_validation("record '" + r.id + "': tier1_confidence " + std::to_string(r.tier1_confidence) +
                       " is outside [0,1]");
    }
    if (r.tier1_score && !in_unit_interval(*r.tier1_score)) {
      throw_validation("record '" + r.id + "': tier1_score is outside [0,1]");
    }
    if (r.tier2_score && !in_unit_interval(*r.tier2_score)) {
      throw_validation("record '" + r.id + "': tier2_score is outside [0,1]");
    }
    if ((r.tier1_cost && !(*r.tier1_cost >= 0.0)) || (r.tier2_cost && !(*r.tier2_cost >= 0.0))) {
      throw_validation("record '" + r.id + "': costs must be non-negative");
    }
    if (!r.gold_label && !(r.tier1_score && r.tier2_score)) {
      throw_validation("record '" + r.id + "': needs gold_label or both tier1_score and tier2_score");
    }
  }
}

void validate_for_metric(const Trace& trace, const MetricSpec& metric) {
  if (trace.empty()) throw_validation("trace is empty");
  if (metric.kind == MetricKind::kMeanScore) {
    for (const auto& r : trace.records) {
      if (!r.tier1_score || !r.tier2_score) {
        throw_validation("metric mean-score needs tier1_score and tier2_score; record '" + r.id +
                         "' lacks them");
      }
    }
    return;
  }
  for (const auto& r : trace.records) {
    if (!r.gold_label) {
      throw_validation("metric " + metric.name() + " needs gold_label; record '" + r.id + "' lacks it");
    }
  }
  if (metric.kind == MetricKind::kAccuracy) return;

  const auto labels = gold_label_set(trace);
  if (metric.kind == MetricKind::kBinaryF1) {
    if (labels.size() != 2) {
      throw_validation("metric f1 needs exactly two distinct gold labels, found " +
                       std::to_string(labels.size()));
    }
    if (metric.positive_label.empty()) throw_validation("metric f1 needs a positive label");
  }
  if (metric.kind == MetricKind::kMcc && labels.size() > 2) {
    throw_validation("metric mcc needs a binary label set, found " + std::to_string(labels.size()) +
                     " distinct gold labels");
  }
  if (!metric.positive_label.empty() && !labels.contains(metric.positive_label)) {
    throw_validation("positive label '" + metric.positive_label + "' does not occur among gold labels");
  }
}

std::string resolve_positive_label(const Trace& trace, const MetricSpec& metric) {
  if (!metric.positive_label.empty()) return metric.positive_label;
  const auto labels = gold_label_set(trace);
  if (labels.empty()) throw_validation("trace has no gold labels");
  return *labels.rbegin();
}

TraceRecord parse_record_line(std::string_view line, std::size_t line_number) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw_validation(where(line_number) + ": malformed record: " + e.what());
  }
  if (!obj.is_object()) throw_validation(where(line_number) + ": record must be an object");
  return record_from_json(obj, line_number);
}

std::string format_record_line(const TraceRecord& record) { return record_to_json(record).dump(); }

Trace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_io("cannot open trace '" + path.string() + "'");

  Trace trace;
  std::string line;
  std::size_t line_number = 0;
  bool seen_record = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw_validation(where(line_number) + ": malformed record: " + e.what());
    }
    if (!obj.is_object()) throw_validation(where(line_number) + ": record must be an object");
    if (obj.contains(kTraceHeaderKey)) {
      if (seen_record) throw_validation(where(line_number) + ": header must precede all records");
      trace.metadata = parse_header(obj, line_number);
      continue;
    }
    seen_record = true;
    trace.records.push_back(record_from_json(obj, line_number));
  }
  if (in.bad()) throw_io("read failure on '" + path.string() + "'");

  validate_trace(trace);
  return trace;
}

Trace load_trace(const std::filesystem::path& path, const MetricSpec& metric) {
  Trace trace = load_trace(path);
  validate_for_metric(trace, metric);
  return trace;
}

void write_trace(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_io("cannot open '" + path.string() + "' for writing");
  if (!trace.metadata.empty()) {
    json h = json::object();
    const auto& m = trace.metadata;
    if (!m.dataset.empty()) h["dataset"] = m.dataset;
    if (!m.metric.empty()) h["metric"] = m.metric;
    if (!m.tier1_model.empty()) h["tier1_model"] = m.tier1_model;
    if (!m.tier2_model.empty()) h["tier2_model"] = m.tier2_model;
    h["format_version"] = kTraceFormatVersion;
    out << json{{kTraceHeaderKey, h}}.dump() << '\n';
  }
  for (const auto& r : trace.records) out << format_record_line(r) << '\n';
  out.flush();
  if (!out) throw_io("write failure on '" + path.string() + "'");
}

}  // namespace cascade
