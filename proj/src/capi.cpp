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

#include "cascade/cascade.h"

#include <cstring>
#include <new>
#include <string>

#include "cascade/analysis.hpp"
#include "cascade/batchsim.hpp"
#include "cascade/curve.hpp"
#include "cascade/error.hpp"
#include "cascade/fixtures.hpp"
#include "cascade/gate.hpp"
#include "cascade/gateway.hpp"
#include "cascade/metrics.hpp"
#include "cascade/report.hpp"
#include "cascade/trace.hpp"

#ifndef CASCADE_VERSION_STRING
#define CASCADE_VERSION_STRING "0.0.0"
#endif

struct cascade_trace {
  cascade::Trace trace;
};
struct cascade_cost_model {
  cascade::CostModel model;
};
struct cascade_curve {
  cascade::Curve curve;
};
struct cascade_sim_result {
  cascade::SimResult result;
};
struct cascade_heatmap {
  cascade::QuantileHeatmap map;
};
struct cascade_gateway {
  explicit cascade_gateway(cascade::GatewayConfig config) : gateway(std::move(config)) {}
  cascade::Gateway gateway;
};
struct cascade_replay {
  cascade_replay(cascade::Trace trace, cascade::BackendRole role) : backend(std::move(trace), role) {}
  cascade::ReplayBackend backend;
};

namespace {

thread_local std::string g_last_error;

cascade_status status_of(cascade::ErrorKind kind) {
  switch (kind) {
    case cascade::ErrorKind::kUsage: return CASCADE_ERR_USAGE;
    case cascade::ErrorKind::kValidation: return CASCADE_ERR_VALIDATION;
    case cascade::ErrorKind::kIo: return CASCADE_ERR_IO;
    case cascade::ErrorKind::kUpstream: return CASCADE_ERR_UPSTREAM;
  }
  return CASCADE_ERR_INTERNAL;
}

template <typename F>
cascade_status guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return CASCADE_OK;
  } catch (const cascade::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CASCADE_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CASCADE_ERR_INTERNAL;
  }
}

template <typename T>
void require(const T* p, const char* what) {
  if (p == nullptr) cascade::throw_usage(std::string(what) + " must not be NULL");
}

cascade::MetricSpec to_metric(const cascade_metric* metric) {
  require(metric, "metric");
  cascade::MetricSpec spec;
  switch (metric->kind) {
    case CASCADE_METRIC_ACCURACY: spec.kind = cascade::MetricKind::kAccuracy; break;
    case CASCADE_METRIC_BINARY_F1: spec.kind = cascade::MetricKind::kBinaryF1; break;
    case CASCADE_METRIC_MCC: spec.kind = cascade::MetricKind::kMcc; break;
    case CASCADE_METRIC_MEAN_SCORE: spec.kind = cascade::MetricKind::kMeanScore; break;
    default: cascade::throw_usage("unknown metric kind");
  }
  if (metric->positive_label) spec.positive_label = metric->positive_label;
  if (spec.kind == cascade::MetricKind::kBinaryF1 && spec.positive_label.empty()) {
    cascade::throw_usage("metric f1 needs a positive label");
  }
  return spec;
}

cascade::SweepOptions to_options(const cascade_sweep_options* options) {
  cascade::SweepOptions out;
  if (!options) return out;
  out.batch = {options->tier1_batch, options->tier2_batch};
  out.seed = options->seed;
  out.random_repeats = options->random_repeats;
  out.max_oracle_points = options->max_oracle_points;
  if (out.batch.tier1 < 1 || out.batch.tier2 < 1) cascade::throw_usage("batch sizes must be >= 1");
  return out;
}

cascade::PolicyFamily to_policy(cascade_policy policy) {
  switch (policy) {
    case CASCADE_POLICY_THRESHOLD: return cascade::PolicyFamily::kThreshold;
    case CASCADE_POLICY_RANDOM: return cascade::PolicyFamily::kRandom;
    case CASCADE_POLICY_ORACLE: return cascade::PolicyFamily::kOracle;
  }
  cascade::throw_usage("unknown policy");
}

const cascade::CostModel& cost_of(const cascade_cost_model* cost) {
  static const cascade::CostModel empty;
  return cost ? cost->model : empty;
}

cascade::SimConfig to_sim_config(const cascade_sim_config* config, const cascade::CostModel& cost) {
  require(config, "config");
  cascade::SimConfig out;
  out.b1 = config->b1;
  out.b2 = config->b2;
  out.cost = cost;
  if (config->max_wait_s > 0.0) out.flush = cascade::MaxWait{config->max_wait_s};
  return out;
}

cascade_curve_point to_c(const cascade::CurvePoint& p) {
  return {p.threshold, p.escalation_fraction, p.performance, p.total_time, p.speedup, p.throughput,
          p.tier2_equivalent ? 1 : 0};
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void copy_mask(const cascade::EscalationMask& mask, uint8_t* out) { std::memcpy(out, mask.data(), mask.size()); }

}  // namespace

extern "C" {

const char* cascade_version(void) { return CASCADE_VERSION_STRING; }

int cascade_trace_format_version(void) { return cascade::kTraceFormatVersion; }

const char* cascade_last_error(void) { return g_last_error.c_str(); }

void cascade_string_free(char* s) { delete[] s; }

cascade_status cascade_metric_kind_from_name(const char* name, cascade_metric_kind* out) {
  return guard([&] {
    require(name, "name");
    require(out, "out");
    switch (cascade::MetricSpec::parse(name).kind) {
      case cascade::MetricKind::kAccuracy: *out = CASCADE_METRIC_ACCURACY; break;
      case cascade::MetricKind::kBinaryF1: *out = CASCADE_METRIC_BINARY_F1; break;
      case cascade::MetricKind::kMcc: *out = CASCADE_METRIC_MCC; break;
      case cascade::MetricKind::kMeanScore: *out = CASCADE_METRIC_MEAN_SCORE; break;
    }
  });
}

cascade_status cascade_trace_load(const char* path, const cascade_metric* metric, cascade_trace** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    auto handle = std::make_unique<cascade_trace>();
    handle->trace = metric ? cascade::load_trace(path, to_metric(metric)) : cascade::load_trace(path);
    *out = handle.release();
  });
}

cascade_status cascade_trace_write(const cascade_trace* trace, const char* path) {
  return guard([&] {
    require(trace, "trace");
    require(path, "path");
    cascade::write_trace(trace->trace, path);
  });
}

size_t cascade_trace_size(const cascade_trace* trace) { return trace ? trace->trace.size() : 0; }

void cascade_trace_free(cascade_trace* trace) { delete trace; }

void cascade_fixture_params_init(cascade_fixture_params* params) {
  if (!params) return;
  const cascade::FixtureParams d;
  *params = {d.tier1_easy_acc, d.tier1_hard_acc, d.tier2_acc, d.hard_fraction, d.confidence_separation,
             d.with_scores ? 1 : 0, d.tier1_cost, d.tier2_cost};
}

cascade_status cascade_trace_generate(size_t n, uint64_t seed, const cascade_fixture_params* params,
                                      cascade_trace** out) {
  return guard([&] {
    require(out, "out");
    cascade::FixtureParams p;
    if (params) {
      p.tier1_easy_acc = params->tier1_easy_acc;
      p.tier1_hard_acc = params->tier1_hard_acc;
      p.tier2_acc = params->tier2_acc;
      p.hard_fraction = params->hard_fraction;
      p.confidence_separation = params->confidence_separation;
      p.with_scores = params->with_scores != 0;
      p.tier1_cost = params->tier1_cost;
      p.tier2_cost = params->tier2_cost;
    }
    auto handle = std::make_unique<cascade_trace>();
    handle->trace = cascade::generate_trace(n, seed, p);
    *out = handle.release();
  });
}

cascade_status cascade_route_threshold(const cascade_trace* trace, double threshold, uint8_t* escalated) {
  return guard([&] {
    require(trace, "trace");
    require(escalated, "escalated");
    copy_mask(cascade::mask_of(cascade::route_threshold(trace->trace, threshold)), escalated);
  });
}

cascade_status cascade_route_random(const cascade_trace* trace, double p, uint64_t seed, uint8_t* escalated) {
  return guard([&] {
    require(trace, "trace");
    require(escalated, "escalated");
    copy_mask(cascade::random_mask(trace->trace, p, seed), escalated);
  });
}

cascade_status cascade_route_oracle(const cascade_trace* trace, size_t budget, const cascade_metric* metric,
                                    uint8_t* escalated, int* approximate) {
  return guard([&] {
    require(trace, "trace");
    require(escalated, "escalated");
    const auto result = cascade::route_oracle(trace->trace, budget, to_metric(metric));
    copy_mask(cascade::mask_of(result.decisions), escalated);
    if (approximate) *approximate = result.approximate ? 1 : 0;
  });
}

cascade_status cascade_evaluate(const cascade_trace* trace, const uint8_t* escalated, const cascade_metric* metric,
                                double* out) {
  return guard([&] {
    require(trace, "trace");
    require(escalated, "escalated");
    require(out, "out");
    const std::span<const std::uint8_t> mask(escalated, trace->trace.size());
    *out = cascade::evaluate(cascade::decisions_from_mask(trace->trace, mask), trace->trace, to_metric(metric));
  });
}

cascade_status cascade_cost_model_constant(double tier1_s, double tier2_s, cascade_cost_model** out) {
  return guard([&] {
    require(out, "out");
    *out = new cascade_cost_model{cascade::CostModel::constant(tier1_s, tier2_s)};
  });
}

cascade_status cascade_cost_model_load(const char* path, cascade_cost_model** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new cascade_cost_model{cascade::CostModel::load(path)};
  });
}

cascade_status cascade_cost_model_parse(const char* json_text, cascade_cost_model** out) {
  return guard([&] {
    require(json_text, "json_text");
    require(out, "out");
    *out = new cascade_cost_model{cascade::CostModel::from_json_text(json_text)};
  });
}

cascade_status cascade_cost_model_empty(cascade_cost_model** out) {
  return guard([&] {
    require(out, "out");
    *out = new cascade_cost_model{};
  });
}

cascade_status cascade_cost_model_optimal_batch(const cascade_cost_model* cost, int tier, size_t* out) {
  return guard([&] {
    require(cost, "cost");
    require(out, "out");
    if (tier != 1 && tier != 2) cascade::throw_usage("tier must be 1 or 2");
    const auto& t = cost->model.tier(tier == 1 ? cascade::Tier::kFirst : cascade::Tier::kSecond);
    if (!t) cascade::throw_validation("cost model has no entry for tier " + std::to_string(tier));
    *out = cascade::optimal_batch_size(*t);
  });
}

void cascade_cost_model_free(cascade_cost_model* cost) { delete cost; }

cascade_status cascade_total_time(const cascade_trace* trace, const uint8_t* escalated,
                                  const cascade_cost_model* cost, size_t tier1_batch, size_t tier2_batch,
                                  double* out) {
  return guard([&] {
    require(trace, "trace");
    require(escalated, "escalated");
    require(out, "out");
    const std::span<const std::uint8_t> mask(escalated, trace->trace.size());
    *out = cascade::total_time(mask, trace->trace, cost_of(cost), {tier1_batch, tier2_batch});
  });
}

void cascade_sweep_options_init(cascade_sweep_options* options) {
  if (!options) return;
  const cascade::SweepOptions d;
  *options = {d.batch.tier1, d.batch.tier2, d.seed, d.random_repeats, d.max_oracle_points};
}

cascade_status cascade_sweep(const cascade_trace* trace, const cascade_metric* metric, const cascade_cost_model* cost,
                             cascade_policy policy, const cascade_sweep_options* options, cascade_curve** out) {
  return guard([&] {
    require(trace, "trace");
    require(out, "out");
    auto handle = std::make_unique<cascade_curve>();
    handle->curve =
        cascade::sweep(trace->trace, to_metric(metric), cost_of(cost), to_policy(policy), to_options(options));
    *out = handle.release();
  });
}

size_t cascade_curve_size(const cascade_curve* curve) { return curve ? curve->curve.points.size() : 0; }

cascade_status cascade_curve_point_at(const cascade_curve* curve, size_t index, cascade_curve_point* out) {
  return guard([&] {
    require(curve, "curve");
    require(out, "out");
    if (index >= curve->curve.points.size()) cascade::throw_usage("curve point index out of range");
    *out = to_c(curve->curve.points[index]);
  });
}

cascade_status cascade_curve_reference(const cascade_curve* curve, double* tier1_performance,
                                       double* tier2_performance, double* tier2_time_s) {
  return guard([&] {
    require(curve, "curve");
    if (tier1_performance) *tier1_performance = curve->curve.tier1_only_performance;
    if (tier2_performance) *tier2_performance = curve->curve.tier2_only_performance;
    if (tier2_time_s) *tier2_time_s = curve->curve.tier2_only_time;
  });
}

cascade_status cascade_curve_best_at(const cascade_curve* curve, double q, int* achievable,
                                     cascade_curve_point* out) {
  return guard([&] {
    require(curve, "curve");
    require(achievable, "achievable");
    const auto best = cascade::best_at_quality(curve->curve, q);
    *achievable = best ? 1 : 0;
    if (best && out) *out = to_c(*best);
  });
}

cascade_status cascade_curve_write_csv(const cascade_curve* curve, const char* path) {
  return guard([&] {
    require(curve, "curve");
    require(path, "path");
    cascade::write_curve_csv(curve->curve, path);
  });
}

void cascade_curve_free(cascade_curve* curve) { delete curve; }

cascade_status cascade_speedup_at(const cascade_trace* trace, const cascade_metric* metric,
                                  const cascade_cost_model* cost, const cascade_sweep_options* options, double q,
                                  int* achievable, cascade_curve_point* out) {
  return guard([&] {
    require(trace, "trace");
    require(achievable, "achievable");
    const auto best = cascade::speedup_at(trace->trace, to_metric(metric), cost_of(cost), q, to_options(options));
    *achievable = best ? 1 : 0;
    if (best && out) *out = to_c(*best);
  });
}

cascade_status cascade_calibration_report(const cascade_trace* trace, const cascade_metric* metric,
                                          const cascade_cost_model* cost, const cascade_sweep_options* options,
                                          const double* qualities, size_t count, char** json_out) {
  return guard([&] {
    require(trace, "trace");
    require(json_out, "json_out");
    if (count > 0) require(qualities, "qualities");
    const std::span<const double> qs(qualities, count);
    *json_out = dup_string(
        cascade::calibration_report(trace->trace, to_metric(metric), cost_of(cost), qs, to_options(options)));
  });
}

cascade_status cascade_optimal_batch_size_file(const char* latency_table_path, size_t* out) {
  return guard([&] {
    require(latency_table_path, "latency_table_path");
    require(out, "out");
    *out = cascade::optimal_batch_size(cascade::load_latency_table(latency_table_path));
  });
}

cascade_status cascade_simulate(const cascade_trace* trace, double threshold, const cascade_cost_model* cost,
                                const cascade_sim_config* config, cascade_sim_result** out) {
  return guard([&] {
    require(trace, "trace");
    require(out, "out");
    auto handle = std::make_unique<cascade_sim_result>();
    handle->result = cascade::simulate(trace->trace, threshold, to_sim_config(config, cost_of(cost)));
    *out = handle.release();
  });
}

cascade_status cascade_sim_summary_get(const cascade_sim_result* result, cascade_sim_summary* out) {
  return guard([&] {
    require(result, "result");
    require(out, "out");
    const auto& r = result->result;
    *out = {r.makespan, r.throughput, r.batch_log.size(), r.escalated};
  });
}

cascade_status cascade_sim_write_batch_log(const cascade_sim_result* result, const char* path) {
  return guard([&] {
    require(result, "result");
    require(path, "path");
    cascade::write_batch_log_csv(result->result, path);
  });
}

cascade_status cascade_sim_write_completion(const cascade_sim_result* result, const char* path) {
  return guard([&] {
    require(result, "result");
    require(path, "path");
    cascade::write_completion_csv(result->result, path);
  });
}

void cascade_sim_result_free(cascade_sim_result* result) { delete result; }

cascade_status cascade_compare_batching(const cascade_trace* trace, const double* thresholds, size_t count,
                                        const cascade_cost_model* cost, const cascade_sim_config* optimized,
                                        const char* csv_path) {
  return guard([&] {
    require(trace, "trace");
    require(csv_path, "csv_path");
    if (count > 0) require(thresholds, "thresholds");
    const auto& model = cost_of(cost);
    cascade::SimConfig unbatched;
    unbatched.cost = model;
    const cascade::SimConfig batched = optimized ? to_sim_config(optimized, model) : cascade::optimal_config(model);
    const auto rows =
        cascade::compare_batch1_vs_optimal(trace->trace, std::span<const double>(thresholds, count), unbatched, batched);
    cascade::write_throughput_csv(rows, csv_path);
  });
}

cascade_status cascade_heatmap_compute(const cascade_trace* trace, size_t num_quantiles, cascade_heatmap** out) {
  return guard([&] {
    require(trace, "trace");
    require(out, "out");
    *out = new cascade_heatmap{cascade::heatmap(trace->trace, num_quantiles)};
  });
}

cascade_status cascade_heatmap_totals(const cascade_heatmap* map, double* ft_total, double* tf_total) {
  return guard([&] {
    require(map, "map");
    if (ft_total) *ft_total = map->map.ft_total;
    if (tf_total) *tf_total = map->map.tf_total;
  });
}

cascade_status cascade_heatmap_write_csv(const cascade_heatmap* map, const char* path) {
  return guard([&] {
    require(map, "map");
    require(path, "path");
    cascade::write_heatmap_csv(map->map, path);
  });
}

void cascade_heatmap_free(cascade_heatmap* map) { delete map; }

cascade_status cascade_gateway_create(const char* config_json, cascade_gateway** out) {
  return guard([&] {
    require(config_json, "config_json");
    require(out, "out");
    *out = new cascade_gateway(cascade::GatewayConfig::from_json_text(config_json));
  });
}

cascade_status cascade_gateway_start(cascade_gateway* gateway, int* port) {
  return guard([&] {
    require(gateway, "gateway");
    const int bound = gateway->gateway.start();
    if (port) *port = bound;
  });
}

cascade_status cascade_gateway_classify(cascade_gateway* gateway, const char* id, const char* payload,
                                        cascade_classify_result* out) {
  return guard([&] {
    require(gateway, "gateway");
    require(id, "id");
    require(out, "out");
    const auto r = gateway->gateway.classify({id, payload ? payload : ""});
    out->label = dup_string(r.label);
    out->confidence = r.confidence;
    out->tier_used = r.tier_used;
    out->latency_s = r.latency;
    out->degraded = r.degraded ? 1 : 0;
  });
}

void cascade_classify_result_clear(cascade_classify_result* result) {
  if (!result) return;
  delete[] result->label;
  result->label = nullptr;
}

cascade_status cascade_gateway_flush(cascade_gateway* gateway) {
  return guard([&] {
    require(gateway, "gateway");
    gateway->gateway.flush();
  });
}

cascade_status cascade_gateway_counters_json(const cascade_gateway* gateway, char** out) {
  return guard([&] {
    require(gateway, "gateway");
    require(out, "out");
    *out = dup_string(gateway->gateway.counters().to_json_text());
  });
}

cascade_status cascade_gateway_stop(cascade_gateway* gateway) {
  return guard([&] {
    require(gateway, "gateway");
    gateway->gateway.stop();
  });
}

void cascade_gateway_free(cascade_gateway* gateway) { delete gateway; }

cascade_status cascade_replay_start(const cascade_trace* trace, int role, const char* host, int port,
                                    cascade_replay** out) {
  return guard([&] {
    require(trace, "trace");
    require(out, "out");
    if (role != 1 && role != 2) cascade::throw_usage("replay role must be 1 or 2");
    auto handle = std::make_unique<cascade_replay>(
        trace->trace, role == 1 ? cascade::BackendRole::kTier1 : cascade::BackendRole::kTier2);
    handle->backend.start(host ? host : "127.0.0.1", port);
    *out = handle.release();
  });
}

int cascade_replay_port(const cascade_replay* replay) { return replay ? replay->backend.port() : -1; }

size_t cascade_replay_calls(const cascade_replay* replay) { return replay ? replay->backend.calls() : 0; }

void cascade_replay_free(cascade_replay* replay) { delete replay; }

}  // extern "C"
