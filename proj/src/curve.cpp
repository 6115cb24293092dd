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

#include "cascade/curve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cascade/error.hpp"
#include "cascade/metrics.hpp"

namespace cascade {

using json = nlohmann::json;

LatencyTable::LatencyTable(std::vector<LatencyPoint> points) : points_(std::move(points)) {
  if (points_.empty()) throw_validation("latency table is empty");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& p = points_[i];
    if (p.batch_size < 1) throw_validation("latency table batch sizes must be >= 1");
    if (!(p.latency > 0.0) || !std::isfinite(p.latency)) {
      throw_validation("latency table entry for batch size " + std::to_string(p.batch_size) +
                       " must be strictly positive");
    }
    if (i > 0 && p.batch_size <= points_[i - 1].batch_size) {
      throw_validation("latency table batch sizes must be strictly increasing");
    }
  }
}

double LatencyTable::latency(std::size_t batch_size) const {
  if (points_.empty()) throw_validation("latency table is empty");
  if (batch_size <= points_.front().batch_size) return points_.front().latency;
  if (batch_size >= points_.back().batch_size) return points_.back().latency;
  auto hi = std::lower_bound(points_.begin(), points_.end(), batch_size,
                             [](const LatencyPoint& p, std::size_t b) { return p.batch_size < b; });
  if (hi->batch_size == batch_size) return hi->latency;
  auto lo = hi - 1;
  const double w = static_cast<double>(batch_size - lo->batch_size) / static_cast<double>(hi->batch_size - lo->batch_size);
  return lo->latency + w * (hi->latency - lo->latency);
}

double batch_latency(const TierCost& cost, std::size_t batch_size) {
  if (const auto* c = std::get_if<ConstantPerInstance>(&cost)) return static_cast<double>(batch_size) * c->seconds;
  return std::get<LatencyTable>(cost).latency(batch_size);
}

double batched_time(const TierCost& cost, std::size_t count, std::size_t batch_size) {
  if (batch_size < 1) throw_usage("batch size must be >= 1");
  if (count == 0) return 0.0;
  if (const auto* c = std::get_if<ConstantPerInstance>(&cost)) return static_cast<double>(count) * c->seconds;
  const std::size_t full = count / batch_size;
  const std::size_t residual = count % batch_size;
  double t = static_cast<double>(full) * batch_latency(cost, batch_size);
  if (residual > 0) t += batch_latency(cost, residual);
  return t;
}

namespace {

LatencyTable table_from_json(const json& obj) {
  if (!obj.contains("points") || !obj["points"].is_array()) throw_validation("latency table needs a 'points' array");
  std::vector<LatencyPoint> points;
  for (const auto& p : obj["points"]) {
    if (p.is_array() && p.size() == 2) {
      points.push_back({p[0].get<std::size_t>(), p[1].get<double>()});
    } else if (p.is_object()) {
      points.push_back({p.at("batch_size").get<std::size_t>(), p.at("latency_s").get<double>()});
    } else {
      throw_validation("latency table points must be {batch_size, latency_s} objects");
    }
  }
  return LatencyTable(std::move(points));
}

TierCost tier_from_json(const json& obj, const std::filesystem::path& base_dir) {
  if (!obj.is_object()) throw_validation("tier cost entry must be an object");
  if (auto it = obj.find("file"); it != obj.end()) {
    std::filesystem::path p = it->get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    return load_latency_table(p);
  }
  const std::string type = obj.value("type", obj.contains("points") ? "table" : "constant");
  if (type == "constant") {
    const double s = obj.at("seconds").get<double>();
    if (!(s > 0.0) || !std::isfinite(s)) throw_validation("constant per-instance cost must be strictly positive");
    return ConstantPerInstance{s};
  }
  if (type == "table") return table_from_json(obj);
  throw_validation("unknown tier cost type '" + type + "'");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_io("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

CostModel CostModel::constant(double tier1_seconds, double tier2_seconds) {
  if (!(tier1_seconds > 0.0) || !(tier2_seconds > 0.0)) throw_usage("constant costs must be strictly positive");
  return {ConstantPerInstance{tier1_seconds}, ConstantPerInstance{tier2_seconds}};
}

CostModel CostModel::from_json_text(std::string_view text, const std::filesystem::path& base_dir) {
  try {
    const json doc = json::parse(text);
    if (!doc.is_object()) throw_validation("cost model must be an object");
    CostModel model;
    if (doc.contains("tier1")) model.tier1 = tier_from_json(doc["tier1"], base_dir);
    if (doc.contains("tier2")) model.tier2 = tier_from_json(doc["tier2"], base_dir);
    return model;
  } catch (const json::exception& e) {
    throw_validation(std::string("invalid cost model: ") + e.what());
  }
}

CostModel CostModel::load(const std::filesystem::path& path) {
  return from_json_text(read_file(path), path.parent_path());
}

LatencyTable load_latency_table(const std::filesystem::path& path) {
  try {
    return table_from_json(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    throw_validation("invalid latency table '" + path.string() + "': " + e.what());
  }
}

std::size_t optimal_batch_size(const LatencyTable& table) {
  const auto& pts = table.points();
  if (pts.empty()) throw_validation("latency table is empty");
  std::size_t best = 0;
  double best_per_instance = pts[0].latency / static_cast<double>(pts[0].batch_size);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double per_instance = pts[i].latency / static_cast<double>(pts[i].batch_size);
    if (per_instance < best_per_instance) {
      best = i;
      best_per_instance = per_instance;
    }
  }
  return pts[best].batch_size;
}

std::size_t optimal_batch_size(const TierCost& cost) {
  if (const auto* t = std::get_if<LatencyTable>(&cost)) return optimal_batch_size(*t);
  return 1;
}

namespace {

double tier_time(const Trace& trace, std::span<const std::uint8_t> escalated, const CostModel& cost, Tier tier,
                 std::size_t batch_size) {
  double measured = 0.0;
  std::size_t modeled = 0;
  const TraceRecord* first_unmeasured = nullptr;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (tier == Tier::kSecond && !escalated[i]) continue;
    const auto& r = trace.records[i];
    if (const auto& c = r.cost(tier)) {
      measured += *c;
    } else {
      if (!first_unmeasured) first_unmeasured = &r;
      ++modeled;
    }
  }
  if (modeled == 0) return measured;
  const auto& model = cost.tier(tier);
  if (!model) {
    throw_validation("no cost model for tier " + std::to_string(static_cast<int>(tier)) + " and record '" +
                     first_unmeasured->id + "' has no measured tier" + std::to_string(static_cast<int>(tier)) +
                     "_cost");
  }
  return measured + batched_time(*model, modeled, batch_size);
}

}  // namespace

double total_time(std::span<const std::uint8_t> escalated, const Trace& trace, const CostModel& cost,
                  BatchSizes batch) {
  if (escalated.size() != trace.size()) throw_validation("escalation mask does not match trace size");
  return tier_time(trace, escalated, cost, Tier::kFirst, batch.tier1) +
         tier_time(trace, escalated, cost, Tier::kSecond, batch.tier2);
}

double total_time(const Decisions& decisions, const Trace& trace, const CostModel& cost, BatchSizes batch) {
  if (decisions.size() != trace.size()) throw_validation("decision list does not cover the trace");
  return total_time(mask_of(decisions), trace, cost, batch);
}

double tier2_only_time(const Trace& trace, const CostModel& cost, BatchSizes batch) {
  const EscalationMask all(trace.size(), 1);
  return tier_time(trace, all, cost, Tier::kSecond, batch.tier2);
}

std::string_view policy_name(PolicyFamily family) {
  switch (family) {
    case PolicyFamily::kThreshold: return "threshold";
    case PolicyFamily::kRandom: return "random";
    case PolicyFamily::kOracle: return "oracle";
  }
  return "unknown";
}

PolicyFamily parse_policy(std::string_view name) {
  if (name == "threshold") return PolicyFamily::kThreshold;
  if (name == "random") return PolicyFamily::kRandom;
  if (name == "oracle") return PolicyFamily::kOracle;
  throw_usage("unknown policy '" + std::string(name) + "' (expected threshold, random or oracle)");
}

std::vector<double> candidate_thresholds(const Trace& trace) {
  std::set<double> values{0.0};
  double max_conf = 0.0;
  for (const auto& r : trace.records) {
    values.insert(r.tier1_confidence);
    max_conf = std::max(max_conf, r.tier1_confidence);
  }
  values.insert(std::nextafter(max_conf, std::numeric_limits<double>::infinity()));
  return {values.begin(), values.end()};
}

std::vector<std::size_t> oracle_budgets(std::size_t n, std::size_t max_points) {
  std::vector<std::size_t> budgets;
  if (max_points < 2 || n + 1 <= max_points) {
    for (std::size_t k = 0; k <= n; ++k) budgets.push_back(k);
    return budgets;
  }
  for (std::size_t j = 0; j < max_points; ++j) {
    const auto k = static_cast<std::size_t>(
        std::llround(static_cast<double>(j) * static_cast<double>(n) / static_cast<double>(max_points - 1)));
    if (budgets.empty() || budgets.back() != k) budgets.push_back(k);
  }
  return budgets;
}

namespace {

CurvePoint make_point(double threshold, double escalation_fraction, double performance, double time,
                      double tier2_time, std::size_t n) {
  CurvePoint p;
  p.threshold = threshold;
  p.escalation_fraction = escalation_fraction;
  p.performance = performance;
  p.total_time = time;
  p.speedup = tier2_time / time;
  p.throughput = static_cast<double>(n) / time;
  return p;
}

}  // namespace

Curve sweep(const Trace& trace, const MetricSpec& metric, const CostModel& cost, PolicyFamily family,
            const SweepOptions& options) {
  const MaskEvaluator ev(trace, metric);
  const std::size_t n = trace.size();
  const double nd = static_cast<double>(n);

  Curve curve;
  curve.family = family;
  curve.size = n;
  curve.tier1_only_performance = ev.evaluate(EscalationMask(n, 0));
  curve.tier2_only_performance = ev.evaluate(EscalationMask(n, 1));
  curve.tier2_only_time = tier2_only_time(trace, cost, options.batch);
  const double t2 = curve.tier2_only_time;

  switch (family) {
    case PolicyFamily::kThreshold: {
      const auto candidates = candidate_thresholds(trace);
      for (std::size_t j = 0; j < candidates.size(); ++j) {
        const auto mask = threshold_mask(trace, candidates[j]);
        auto p = make_point(candidates[j], static_cast<double>(escalation_count(mask)) / nd, ev.evaluate(mask),
                            total_time(mask, trace, cost, options.batch), t2, n);
        p.tier2_equivalent = j + 1 == candidates.size();
        curve.points.push_back(p);
      }
      break;
    }
    case PolicyFamily::kRandom: {
      if (options.random_repeats < 1) throw_usage("random sweep needs at least one seed");
      const double reps = static_cast<double>(options.random_repeats);
      for (int j = 0; j <= 20; ++j) {
        const double p = j / 20.0;
        double perf = 0.0, time = 0.0, frac = 0.0;
        for (std::size_t r = 0; r < options.random_repeats; ++r) {
          const auto mask = random_mask(trace, p, options.seed + r);
          perf += ev.evaluate(mask);
          time += total_time(mask, trace, cost, options.batch);
          frac += static_cast<double>(escalation_count(mask)) / nd;
        }
        auto point = make_point(p, frac / reps, perf / reps, time / reps, t2, n);
        point.tier2_equivalent = j == 20;
        curve.points.push_back(point);
      }
      break;
    }
    case PolicyFamily::kOracle: {
      const bool cost_budgets = std::all_of(trace.records.begin(), trace.records.end(),
                                            [](const TraceRecord& r) { return r.tier2_cost.has_value(); });
      if (cost_budgets) {
        double total_cost = 0.0;
        for (const auto& r : trace.records) total_cost += *r.tier2_cost;
        const std::size_t points = std::max<std::size_t>(2, std::min(options.max_oracle_points, n + 1));
        for (std::size_t j = 0; j < points; ++j) {
          const double fraction = static_cast<double>(j) / static_cast<double>(points - 1);
          auto result = route_oracle_cost(trace, fraction * total_cost, metric);
          curve.approximate = curve.approximate || result.approximate;
          const auto mask = mask_of(result.decisions);
          curve.points.push_back(make_point(fraction, static_cast<double>(escalation_count(mask)) / nd,
                                            ev.evaluate(mask), total_time(mask, trace, cost, options.batch), t2,
                                            n));
        }
      } else {
        const auto budgets = oracle_budgets(n, options.max_oracle_points);
        bool approximate = false;
        const auto masks = detail::oracle_masks(trace, budgets, metric, &approximate);
        curve.approximate = approximate;
        for (std::size_t j = 0; j < budgets.size(); ++j) {
          const auto& mask = masks[j];
          curve.points.push_back(make_point(static_cast<double>(budgets[j]) / nd,
                                            static_cast<double>(escalation_count(mask)) / nd, ev.evaluate(mask),
                                            total_time(mask, trace, cost, options.batch), t2, n));
        }
      }
      break;
    }
  }

  std::stable_sort(curve.points.begin(), curve.points.end(),
                   [](const CurvePoint& a, const CurvePoint& b) { return a.speedup > b.speedup; });
  return curve;
}

std::optional<CurvePoint> best_at_quality(const Curve& curve, double q) {
  if (!(q > 0.0 && q <= 1.0)) throw_usage("quality fraction must lie in (0,1], got " + std::to_string(q));
  const double bar = q * curve.tier2_only_performance;
  std::optional<CurvePoint> best;
  for (const auto& p : curve.points) {
    if (!(p.performance >= bar)) continue;
    if (!best || p.speedup > best->speedup || (p.speedup == best->speedup && p.threshold < best->threshold)) {
      best = p;
    }
  }
  return best;
}

std::optional<CurvePoint> speedup_at(const Trace& trace, const MetricSpec& metric, const CostModel& cost, double q,
                                     const SweepOptions& options) {
  if (!(q > 0.0 && q <= 1.0)) throw_usage("quality fraction must lie in (0,1], got " + std::to_string(q));
  return best_at_quality(sweep(trace, metric, cost, PolicyFamily::kThreshold, options), q);
}

std::string curve_csv(const Curve& curve) {
  std::string out = "threshold,escalation_fraction,performance,total_time_s,speedup,throughput_per_s\n";
  char buf[256];
  for (const auto& p : curve.points) {
    std::snprintf(buf, sizeof(buf), "%.6g,%.6g,%.6g,%.6g,%.6g,%.6g\n", p.threshold, p.escalation_fraction,
                  p.performance, p.total_time, p.speedup, p.throughput);
    out += buf;
  }
  return out;
}

void write_curve_csv(const Curve& curve, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_io("cannot open '" + path.string() + "' for writing");
  out << curve_csv(curve);
  if (!out) throw_io("write failure on '" + path.string() + "'");
}

}  // namespace cascade
