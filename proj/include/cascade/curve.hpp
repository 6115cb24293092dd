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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cascade/gate.hpp"
#include "cascade/trace.hpp"

namespace cascade {

struct ConstantPerInstance {
  double seconds = 0.0;
};

struct LatencyPoint {
  std::size_t batch_size = 1;
  double latency = 0.0;
};

/// Measured batch latencies for one model. Queries between tabulated batch
/// sizes interpolate linearly; queries outside the table clamp to its ends.
class LatencyTable {
 public:
  LatencyTable() = default;
  explicit LatencyTable(std::vector<LatencyPoint> points);

  double latency(std::size_t batch_size) const;
  const std::vector<LatencyPoint>& points() const { return points_; }

 private:
  std::vector<LatencyPoint> points_;
};

using TierCost = std::variant<ConstantPerInstance, LatencyTable>;

/// Wall-clock latency of one batch of `batch_size` instances.
double batch_latency(const TierCost& cost, std::size_t batch_size);

/// Time to push `count` instances through a tier in batches of `batch_size`:
/// full batches at latency(batch_size) plus the residual batch at its own
/// latency.
double batched_time(const TierCost& cost, std::size_t count, std::size_t batch_size);

struct CostModel {
  std::optional<TierCost> tier1;
  std::optional<TierCost> tier2;

  const std::optional<TierCost>& tier(Tier t) const { return t == Tier::kFirst ? tier1 : tier2; }

  static CostModel constant(double tier1_seconds, double tier2_seconds);
  /// Parses the cost-model document; `base_dir` resolves "file" references.
  static CostModel from_json_text(std::string_view text, const std::filesystem::path& base_dir = {});
  static CostModel load(const std::filesystem::path& path);
};

/// Parses a standalone latency-table document (the format the exporter emits).
LatencyTable load_latency_table(const std::filesystem::path& path);

/// Batch size b in the table minimizing latency(b)/b; ties go to smaller b.
std::size_t optimal_batch_size(const LatencyTable& table);

/// Optimal batch size for a tier, or 1 for constant per-instance costs.
std::size_t optimal_batch_size(const TierCost& cost);

struct BatchSizes {
  std::size_t tier1 = 1;
  std::size_t tier2 = 1;
};

/// Cascade inference time: tier 1 on every record plus tier 2 on escalated
/// records. Records carrying measured costs use them; the rest are charged
/// through the cost model.
double total_time(const Decisions& decisions, const Trace& trace, const CostModel& cost, BatchSizes batch = {});
double total_time(std::span<const std::uint8_t> escalated, const Trace& trace, const CostModel& cost,
                  BatchSizes batch = {});

/// Time of running the second tier alone on every record.
double tier2_only_time(const Trace& trace, const CostModel& cost, BatchSizes batch = {});

enum class PolicyFamily { kThreshold, kRandom, kOracle };

std::string_view policy_name(PolicyFamily family);
PolicyFamily parse_policy(std::string_view name);

struct CurvePoint {
  /// Threshold for the threshold family, escalation probability for the
  /// random family, budget fraction for the oracle family.
  double threshold = 0.0;
  double escalation_fraction = 0.0;
  double performance = 0.0;
  double total_time = 0.0;
  double speedup = 0.0;
  double throughput = 0.0;
  /// Marks the synthetic escalate-all point.
  bool tier2_equivalent = false;
};

struct Curve {
  PolicyFamily family = PolicyFamily::kThreshold;
  std::vector<CurvePoint> points;
  double tier1_only_performance = 0.0;
  double tier2_only_performance = 0.0;
  double tier2_only_time = 0.0;
  std::size_t size = 0;
  /// Oracle family only: some point used a heuristic search.
  bool approximate = false;
};

struct SweepOptions {
  BatchSizes batch;
  std::uint64_t seed = 0;
  std::size_t random_repeats = 5;
  std::size_t max_oracle_points = 200;
};

/// Candidate thresholds: 0, every distinct tier-1 confidence, and one value
/// above the largest confidence (escalate-all). Sorted ascending.
std::vector<double> candidate_thresholds(const Trace& trace);

/// Oracle budgets 0..n, subsampled evenly to at most `max_points`.
std::vector<std::size_t> oracle_budgets(std::size_t n, std::size_t max_points);

/// Operating points along the speed/performance curve, sorted by speedup
/// descending (threshold ascending for the threshold family).
Curve sweep(const Trace& trace, const MetricSpec& metric, const CostModel& cost, PolicyFamily family,
            const SweepOptions& options = {});

/// Point with maximum speedup among those reaching q times the second-tier
/// performance; ties go to the smaller threshold.
std::optional<CurvePoint> best_at_quality(const Curve& curve, double q);

std::optional<CurvePoint> speedup_at(const Trace& trace, const MetricSpec& metric, const CostModel& cost, double q,
                                     const SweepOptions& options = {});

/// Delimiter-separated curve table, 6 significant digits.
void write_curve_csv(const Curve& curve, const std::filesystem::path& path);
std::string curve_csv(const Curve& curve);

}  // namespace cascade
