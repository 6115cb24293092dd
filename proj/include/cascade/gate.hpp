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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cascade/trace.hpp"

namespace cascade {

/// Routing outcome for one record. `final_pred`/`final_score` always come
/// from the tier that produced the answer.
struct RoutingDecision {
  std::string id;
  bool escalated = false;
  std::string final_pred;
  double final_score = 0.0;

  bool operator==(const RoutingDecision&) const = default;
};

using Decisions = std::vector<RoutingDecision>;

/// One byte per record in trace order; nonzero means the record goes to the
/// second tier.
using EscalationMask = std::vector<std::uint8_t>;

Decisions decisions_from_mask(const Trace& trace, std::span<const std::uint8_t> escalated);
EscalationMask mask_of(const Decisions& decisions);
std::size_t escalation_count(std::span<const std::uint8_t> escalated);

/// Escalates a record iff tier1_confidence < threshold.
Decisions route_threshold(const Trace& trace, double threshold);
EscalationMask threshold_mask(const Trace& trace, double threshold);

/// Sends every record to the second tier. This is the operating point a
/// threshold of 1 cannot reach when confidences saturate at 1.0.
Decisions route_escalate_all(const Trace& trace);

/// Escalates each record independently with probability p. The draw for
/// record i depends only on (seed, i).
Decisions route_random(const Trace& trace, double p, std::uint64_t seed);
EscalationMask random_mask(const Trace& trace, double p, std::uint64_t seed);

/// Uniform draw in [0,1) for record `index` under `seed`.
double random_unit(std::uint64_t seed, std::uint64_t index);

struct OracleResult {
  Decisions decisions;
  /// Set when the selection came from a heuristic rather than an exact search.
  bool approximate = false;
};

/// Escalates at most `budget` records so that aggregate performance is
/// maximized, using gold-label access. Exact for Accuracy and MeanScore; for
/// F1 and MCC exact whenever the confusion search space is small enough
/// (always for n <= 20), greedy by accuracy gain otherwise.
OracleResult route_oracle(const Trace& trace, std::size_t budget, const MetricSpec& metric);

/// Oracle under a tier-2 cost budget in seconds, using each record's
/// tier2_cost. Greedy by gain per second of tier-2 cost.
OracleResult route_oracle_cost(const Trace& trace, double budget_seconds, const MetricSpec& metric);

namespace detail {

/// Oracle masks for several budgets at once; one exhaustive enumeration
/// serves all budgets in the confusion-metric case.
std::vector<EscalationMask> oracle_masks(const Trace& trace, std::span<const std::size_t> budgets,
                                         const MetricSpec& metric, bool* approximate);

}  // namespace detail

}  // namespace cascade
