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

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cascade {

/// Version of the trace line format written by write_trace().
inline constexpr int kTraceFormatVersion = 1;

/// Reserved key identifying the optional metadata line at the top of a trace.
inline constexpr std::string_view kTraceHeaderKey = "__header__";

enum class Tier { kFirst = 1, kSecond = 2 };

/// One evaluation instance, as produced by running both tier models on it.
struct TraceRecord {
  std::string id;
  std::optional<std::string> gold_label;
  std::string tier1_pred;
  /// Max softmax probability of the first tier model.
  double tier1_confidence = 0.0;
  std::optional<double> tier1_score;
  std::string tier2_pred;
  std::optional<double> tier2_score;
  std::optional<double> tier1_cost;
  std::optional<double> tier2_cost;

  const std::string& pred(Tier tier) const {
    return tier == Tier::kFirst ? tier1_pred : tier2_pred;
  }
  const std::optional<double>& cost(Tier tier) const {
    return tier == Tier::kFirst ? tier1_cost : tier2_cost;
  }

  /// Per-instance quality of a tier's prediction: the stored score when
  /// present, otherwise 1/0 correctness against the gold label.
  double score(Tier tier) const;

  bool operator==(const TraceRecord&) const = default;
};

struct TraceMetadata {
  std::string dataset;
  std::string metric;
  std::string tier1_model;
  std::string tier2_model;

  bool empty() const {
    return dataset.empty() && metric.empty() && tier1_model.empty() && tier2_model.empty();
  }
  bool operator==(const TraceMetadata&) const = default;
};

struct Trace {
  std::vector<TraceRecord> records;
  TraceMetadata metadata;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  bool operator==(const Trace&) const = default;
};

enum class MetricKind {
  kAccuracy,
  kBinaryF1,
  kMcc,
  kMeanScore,
};

/// How aggregate performance over a routed trace is computed.
struct MetricSpec {
  MetricKind kind = MetricKind::kAccuracy;
  /// Required for BinaryF1. For MCC it is optional; the metric is symmetric
  /// in the choice of positive class.
  std::string positive_label;

  static MetricSpec accuracy() { return {MetricKind::kAccuracy, {}}; }
  static MetricSpec binary_f1(std::string positive) {
    return {MetricKind::kBinaryF1, std::move(positive)};
  }
  static MetricSpec mcc(std::string positive = {}) { return {MetricKind::kMcc, std::move(positive)}; }
  static MetricSpec mean_score() { return {MetricKind::kMeanScore, {}}; }

  /// Accepts "accuracy", "f1", "mcc" and "mean-score".
  static MetricSpec parse(std::string_view name, std::string positive_label = {});
  std::string name() const;

  /// Accuracy and MeanScore decompose into independent per-instance terms.
  bool separable() const { return kind == MetricKind::kAccuracy || kind == MetricKind::kMeanScore; }
  bool confusion_based() const { return kind == MetricKind::kBinaryF1 || kind == MetricKind::kMcc; }
};

/// Checks record-level invariants: unique ids, confidence and scores in
/// [0,1], non-negative costs, and a gold label or both scores on every record.
void validate_trace(const Trace& trace);

/// Checks that the trace carries everything `metric` needs. Error messages
/// name the first offending record id.
void validate_for_metric(const Trace& trace, const MetricSpec& metric);

/// Positive class used by confusion-based metrics. For MCC without an
/// explicit label this is the lexicographically greatest gold label.
std::string resolve_positive_label(const Trace& trace, const MetricSpec& metric);

Trace load_trace(const std::filesystem::path& path);
Trace load_trace(const std::filesystem::path& path, const MetricSpec& metric);

/// Parses one record line; `line_number` is used only for messages.
TraceRecord parse_record_line(std::string_view line, std::size_t line_number);
std::string format_record_line(const TraceRecord& record);

void write_trace(const Trace& trace, const std::filesystem::path& path);

}  // namespace cascade
