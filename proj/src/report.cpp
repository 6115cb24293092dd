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

#include "cascade/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include <json.hpp>

#include "cascade/batchsim.hpp"
#include "cascade/error.hpp"

namespace cascade {

using json = nlohmann::json;

double round_significant(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, value);
  return std::strtod(buf, nullptr);
}

double round_decimals(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return std::strtod(buf, nullptr);
}

namespace {

json point_json(const std::optional<CurvePoint>& p) {
  if (!p) return {{"achievable", false}};
  return {{"achievable", true},
          {"threshold", round_significant(p->threshold)},
          {"escalation_fraction", round_significant(p->escalation_fraction)},
          {"performance", round_decimals(p->performance)},
          {"total_time_s", round_significant(p->total_time)},
          {"speedup", round_significant(p->speedup)},
          {"throughput_per_s", round_significant(p->throughput)},
          {"tier2_equivalent", p->tier2_equivalent}};
}

}  // namespace

std::string calibration_report(const Trace& trace, const MetricSpec& metric, const CostModel& cost,
                               std::span<const double> qualities, const SweepOptions& options) {
  for (double q : qualities) {
    if (!(q > 0.0 && q <= 1.0)) throw_usage("quality fraction must lie in (0,1], got " + std::to_string(q));
  }
  const Curve threshold = sweep(trace, metric, cost, PolicyFamily::kThreshold, options);
  const Curve random = sweep(trace, metric, cost, PolicyFamily::kRandom, options);
  const Curve oracle = sweep(trace, metric, cost, PolicyFamily::kOracle, options);

  const bool tables = cost.tier1 && cost.tier2 && std::holds_alternative<LatencyTable>(*cost.tier1) &&
                      std::holds_alternative<LatencyTable>(*cost.tier2);
  std::optional<SimConfig> batched;
  std::optional<SimConfig> unbatched;
  double tier2_opt_throughput = 0.0;
  if (tables) {
    batched = optimal_config(cost);
    unbatched = SimConfig{};
    unbatched->cost = cost;
    const double t2 = batched_time(*cost.tier2, trace.size(), batched->b2);
    tier2_opt_throughput = static_cast<double>(trace.size()) / t2;
  }

  json rows = json::array();
  for (double q : qualities) {
    const auto picked = best_at_quality(threshold, q);
    json row = {{"q", q},
                {"threshold", point_json(picked)},
                {"random", point_json(best_at_quality(random, q))},
                {"oracle", point_json(best_at_quality(oracle, q))}};
    if (picked && batched) {
      const auto sim_opt = simulate(trace, picked->threshold, *batched);
      const auto sim_bs1 = simulate(trace, picked->threshold, *unbatched);
      row["batching"] = {{"b1", batched->b1},
                         {"b2", batched->b2},
                         {"throughput_bs1_per_s", round_significant(sim_bs1.throughput)},
                         {"throughput_opt_per_s", round_significant(sim_opt.throughput)},
                         {"speedup_vs_tier2_opt", round_significant(sim_opt.throughput / tier2_opt_throughput)}};
    }
    rows.push_back(std::move(row));
  }

  json doc = {
      {"metric", metric.name()},
      {"n", trace.size()},
      {"batch", {{"tier1", options.batch.tier1}, {"tier2", options.batch.tier2}}},
      {"tier1_only_performance", round_decimals(threshold.tier1_only_performance)},
      {"tier2_only_performance", round_decimals(threshold.tier2_only_performance)},
      {"tier2_only_time_s", round_significant(threshold.tier2_only_time)},
      {"tier2_only_throughput_per_s",
       round_significant(static_cast<double>(trace.size()) / threshold.tier2_only_time)},
      {"random_seeds", options.random_repeats},
      {"seed", options.seed},
      {"oracle_approximate", oracle.approximate},
      {"rows", rows},
  };
  if (tables) doc["tier2_only_throughput_opt_per_s"] = round_significant(tier2_opt_throughput);
  return doc.dump(2) + "\n";
}

}  // namespace cascade
