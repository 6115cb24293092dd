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

#include "cascade/metrics.hpp"

#include <cmath>

#include "cascade/error.hpp"

namespace cascade {

double f1_from_counts(const ConfusionCounts& c) {
  const double denom = 2.0 * static_cast<double>(c.tp) + static_cast<double>(c.fp) + static_cast<double>(c.fn);
  if (denom == 0.0) return 0.0;
  return 2.0 * static_cast<double>(c.tp) / denom;
}

double mcc_from_counts(const ConfusionCounts& c) {
  const double tp = static_cast<double>(c.tp);
  const double fp = static_cast<double>(c.fp);
  const double tn = static_cast<double>(c.tn);
  const double fn = static_cast<double>(c.fn);
  const double a = tp + fp;
  const double b = tp + fn;
  const double d = tn + fp;
  const double e = tn + fn;
  if (a == 0.0 || b == 0.0 || d == 0.0 || e == 0.0) return 0.0;
  return (tp * tn - fp * fn) / std::sqrt(a * b * d * e);
}

namespace {

void check_coverage(const Decisions& decisions, const Trace& trace) {
  if (decisions.size() != trace.size()) {
    throw_validation("decision list has " + std::to_string(decisions.size()) + " entries for a trace of " +
                     std::to_string(trace.size()) + " records");
  }
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    if (decisions[i].id != trace.records[i].id) {
      throw_validation("decision " + std::to_string(i) + " has id '" + decisions[i].id + "', trace has '" +
                       trace.records[i].id + "'");
    }
  }
}

void require_positive_in_gold(const Trace& trace, std::string_view positive_label) {
  for (const auto& r : trace.records) {
    if (!r.gold_label) throw_validation("record '" + r.id + "' has no gold label");
  }
  for (const auto& r : trace.records) {
    if (*r.gold_label == positive_label) return;
  }
  throw_validation("positive label '" + std::string(positive_label) + "' is absent from the gold label set");
}

}  // namespace

ConfusionCounts confusion(const Decisions& decisions, const Trace& trace, std::string_view positive_label) {
  check_coverage(decisions, trace);
  require_positive_in_gold(trace, positive_label);
  ConfusionCounts c;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    const bool gold_pos = *trace.records[i].gold_label == positive_label;
    const bool pred_pos = decisions[i].final_pred == positive_label;
    if (pred_pos) {
      gold_pos ? ++c.tp : ++c.fp;
    } else {
      gold_pos ? ++c.fn : ++c.tn;
    }
  }
  return c;
}

double evaluate(const Decisions& decisions, const Trace& trace, const MetricSpec& metric) {
  check_coverage(decisions, trace);
  validate_for_metric(trace, metric);
  const double n = static_cast<double>(trace.size());
  switch (metric.kind) {
    case MetricKind::kAccuracy: {
      std::size_t correct = 0;
      for (std::size_t i = 0; i < decisions.size(); ++i) {
        if (decisions[i].final_pred == *trace.records[i].gold_label) ++correct;
      }
      return static_cast<double>(correct) / n;
    }
    case MetricKind::kMeanScore: {
      double sum = 0.0;
      for (const auto& d : decisions) sum += d.final_score;
      return sum / n;
    }
    case MetricKind::kBinaryF1:
      return f1_from_counts(confusion(decisions, trace, resolve_positive_label(trace, metric)));
    case MetricKind::kMcc:
      return mcc_from_counts(confusion(decisions, trace, resolve_positive_label(trace, metric)));
  }
  return 0.0;
}

double tier_only_performance(const Trace& trace, const MetricSpec& metric, Tier tier) {
  EscalationMask mask(trace.size(), tier == Tier::kSecond ? 1 : 0);
  return evaluate(decisions_from_mask(trace, mask), trace, metric);
}

MaskEvaluator::MaskEvaluator(const Trace& trace, const MetricSpec& metric) : metric_(metric) {
  validate_for_metric(trace, metric);
  std::string positive;
  if (metric.confusion_based()) positive = resolve_positive_label(trace, metric);
  rows_.reserve(trace.size());
  for (const auto& r : trace.records) {
    Row row;
    row.score1 = r.score(Tier::kFirst);
    row.score2 = r.score(Tier::kSecond);
    if (r.gold_label) {
      row.correct1 = r.tier1_pred == *r.gold_label;
      row.correct2 = r.tier2_pred == *r.gold_label;
      row.gold_positive = *r.gold_label == positive;
    }
    row.pred1_positive = r.tier1_pred == positive;
    row.pred2_positive = r.tier2_pred == positive;
    rows_.push_back(row);
  }
}

ConfusionCounts MaskEvaluator::confusion(std::span<const std::uint8_t> escalated) const {
  ConfusionCounts c;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& row = rows_[i];
    const bool pred_pos = escalated[i] ? row.pred2_positive : row.pred1_positive;
    if (pred_pos) {
      row.gold_positive ? ++c.tp : ++c.fp;
    } else {
      row.gold_positive ? ++c.fn : ++c.tn;
    }
  }
  return c;
}

double MaskEvaluator::from_counts(const ConfusionCounts& c) const {
  return metric_.kind == MetricKind::kBinaryF1 ? f1_from_counts(c) : mcc_from_counts(c);
}

double MaskEvaluator::evaluate(std::span<const std::uint8_t> escalated) const {
  if (escalated.size() != rows_.size()) throw_validation("escalation mask does not match trace size");
  const double n = static_cast<double>(rows_.size());
  switch (metric_.kind) {
    case MetricKind::kAccuracy: {
      std::size_t correct = 0;
      for (std::size_t i = 0; i < rows_.size(); ++i) {
        if (escalated[i] ? rows_[i].correct2 : rows_[i].correct1) ++correct;
      }
      return static_cast<double>(correct) / n;
    }
    case MetricKind::kMeanScore: {
      double sum = 0.0;
      for (std::size_t i = 0; i < rows_.size(); ++i) sum += escalated[i] ? rows_[i].score2 : rows_[i].score1;
      return sum / n;
    }
    case MetricKind::kBinaryF1:
    case MetricKind::kMcc:
      return from_counts(confusion(escalated));
  }
  return 0.0;
}

}  // namespace cascade
