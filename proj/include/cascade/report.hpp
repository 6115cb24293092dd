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

#include <span>
#include <string>

#include "cascade/curve.hpp"
#include "cascade/trace.hpp"

namespace cascade {

/// Speedup@q summary as a JSON document: one row per quality fraction with
/// the threshold, random and oracle operating points, plus batched
/// throughput when both tiers have latency tables. Performance values are
/// rounded to 4 decimals, times and rates to 6 significant digits.
std::string calibration_report(const Trace& trace, const MetricSpec& metric, const CostModel& cost,
                               std::span<const double> qualities, const SweepOptions& options = {});

/// Rounds to `digits` significant digits via the same formatting the CSV
/// writers use, so JSON and CSV agree.
double round_significant(double value, int digits = 6);
double round_decimals(double value, int decimals = 4);

}  // namespace cascade
