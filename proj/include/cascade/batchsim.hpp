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
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cascade/curve.hpp"
#include "cascade/trace.hpp"

namespace cascade {

/// Flush the partial escalation batch only when the stream ends.
struct EndOfStreamOnly {};

/// Also flush once the oldest queued instance has waited `timeout` seconds.
struct MaxWait {
  double timeout = 0.1;
};

using FlushPolicy = std::variant<EndOfStreamOnly, MaxWait>;

/// Both tiers share one CPU; batch latencies add on a single timeline.
enum class ExecutionModel { kSequentialSharedCpu };

struct SimConfig {
  std::size_t b1 = 1;
  std::size_t b2 = 1;
  CostModel cost;
  FlushPolicy flush = EndOfStreamOnly{};
  ExecutionModel execution = ExecutionModel::kSequentialSharedCpu;

  void validate() const;
};

struct BatchEvent {
  int tier = 1;
  std::size_t batch_size = 0;
  double start = 0.0;
  double end = 0.0;

  bool operator==(const BatchEvent&) const = default;
};

struct InstanceCompletion {
  std::string id;
  double seconds = 0.0;
  bool escalated = false;

  bool operator==(const InstanceCompletion&) const = default;
};

struct SimResult {
  double makespan = 0.0;
  double throughput = 0.0;
  /// Trace order.
  std::vector<InstanceCompletion> completion;
  std::vector<BatchEvent> batch_log;
  std::size_t escalated = 0;
};

/// Replays the trace stream: tier-1 batches of b1 records; low-confidence
/// records queue for tier 2, which runs whenever b2 have accumulated (or the
/// flush policy fires). Deterministic.
SimResult simulate(const Trace& trace, double threshold, const SimConfig& config);
SimResult simulate(const Trace& trace, std::span<const std::uint8_t> escalated, const SimConfig& config);

struct ThroughputRow {
  double threshold = 0.0;
  double throughput_bs1 = 0.0;
  double throughput_opt = 0.0;
  double ratio = 0.0;
};

/// Throughput at each threshold under an unbatched and a batched config.
std::vector<ThroughputRow> compare_batch1_vs_optimal(const Trace& trace, std::span<const double> thresholds,
                                                     const SimConfig& config_b1, const SimConfig& config_opt);

/// Config using each tier's optimal batch size from the cost model.
SimConfig optimal_config(const CostModel& cost, FlushPolicy flush = EndOfStreamOnly{});

void write_batch_log_csv(const SimResult& result, const std::filesystem::path& path);
void write_completion_csv(const SimResult& result, const std::filesystem::path& path);
void write_throughput_csv(const std::vector<ThroughputRow>& rows, const std::filesystem::path& path);

}  // namespace cascade
