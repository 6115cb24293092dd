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

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cascade/gate.hpp"
#include "cascade/trace.hpp"

namespace cascade {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

/// 2tp / (2tp + fp + fn); 0 when the denominator is 0.
double f1_from_counts(const ConfusionCounts& c);

/// Matthews correlation; 0 when any marginal under the square root is 0.
double mcc_from_counts(const ConfusionCounts& c);

ConfusionCounts confusion(const Decisions& decisions, const Trace& trace, std::string_view positive_label);

/// Aggregate performance of routed decisions. Decisions must cover the
/// trace ids in trace order.
double evaluate(const Decisions& decisions, const Trace& trace, const MetricSpec& metric);

/// Performance when a single tier answers every record.
double tier_only_performance(const Trace& trace, const MetricSpec& metric, Tier tier);

/// Per-record view of a trace under one metric, precomputed so that masks
/// can be scored without building decision lists. Produces bit-identical
/// results to evaluate() for the equivalent decisions.
class MaskEvaluator {
 public:
  MaskEvaluator(const Trace& trace, const MetricSpec& metric);

  double evaluate(std::span<const std::uint8_t> escalated) const;
  ConfusionCounts confusion(std::span<const std::uint8_t> escalated) const;

  const MetricSpec& metric() const { return metric_; }
  std::size_t size() const { return rows_.size(); }

  struct Row {
    double score1 = 0.0;
    double score2 = 0.0;
    bool correct1 = false;
    bool correct2 = false;
    bool gold_positive = false;
    bool pred1_positive = false;
    bool pred2_positive = false;
  };
  const std::vector<Row>& rows() const { return rows_; }

  double from_counts(const ConfusionCounts& c) const;

 private:
  MetricSpec metric_;
  std::vector<Row> rows_;
};

}  // namespace cascade
