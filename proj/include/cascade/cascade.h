/*
 * Copyright 2026 The Cascade Toolkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface to the cascade toolkit.
 *
 * Objects are opaque handles created by *_load / *_create / compute calls
 * and released with the matching *_free. Every fallible call returns a
 * cascade_status; on failure cascade_last_error() holds a message for the
 * calling thread. Strings returned through char** out-parameters are owned
 * by the caller and released with cascade_string_free().
 */

#ifndef CASCADE_CASCADE_H_
#define CASCADE_CASCADE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CASCADE_API __declspec(dllexport)
#else
#define CASCADE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cascade_status {
  CASCADE_OK = 0,
  CASCADE_ERR_USAGE = 1,
  CASCADE_ERR_VALIDATION = 2,
  CASCADE_ERR_IO = 3,
  CASCADE_ERR_UPSTREAM = 4,
  CASCADE_ERR_INTERNAL = 5
} cascade_status;

typedef struct cascade_trace cascade_trace;
typedef struct cascade_cost_model cascade_cost_model;
typedef struct cascade_curve cascade_curve;
typedef struct cascade_sim_result cascade_sim_result;
typedef struct cascade_heatmap cascade_heatmap;
typedef struct cascade_gateway cascade_gateway;
typedef struct cascade_replay cascade_replay;

typedef enum cascade_metric_kind {
  CASCADE_METRIC_ACCURACY = 0,
  CASCADE_METRIC_BINARY_F1 = 1,
  CASCADE_METRIC_MCC = 2,
  CASCADE_METRIC_MEAN_SCORE = 3
} cascade_metric_kind;

typedef struct cascade_metric {
  cascade_metric_kind kind;
  /* Required for BINARY_F1, optional for MCC, ignored otherwise. May be NULL. */
  const char* positive_label;
} cascade_metric;

typedef enum cascade_policy {
  CASCADE_POLICY_THRESHOLD = 0,
  CASCADE_POLICY_RANDOM = 1,
  CASCADE_POLICY_ORACLE = 2
} cascade_policy;

typedef struct cascade_sweep_options {
  size_t tier1_batch;
  size_t tier2_batch;
  uint64_t seed;
  size_t random_repeats;
  size_t max_oracle_points;
} cascade_sweep_options;

typedef struct cascade_curve_point {
  double threshold;
  double escalation_fraction;
  double performance;
  double total_time_s;
  double speedup;
  double throughput_per_s;
  int tier2_equivalent;
} cascade_curve_point;

typedef struct cascade_fixture_params {
  double tier1_easy_acc;
  double tier1_hard_acc;
  double tier2_acc;
  double hard_fraction;
  double confidence_separation;
  int with_scores;
  double tier1_cost;
  double tier2_cost;
} cascade_fixture_params;

typedef struct cascade_sim_config {
  size_t b1;
  size_t b2;
  /* <= 0 flushes partial tier-2 batches only at end of stream. */
  double max_wait_s;
} cascade_sim_config;

typedef struct cascade_sim_summary {
  double makespan_s;
  double throughput_per_s;
  size_t batches;
  size_t escalated;
} cascade_sim_summary;

typedef struct cascade_classify_result {
  char* label; /* release with cascade_classify_result_clear */
  double confidence;
  int tier_used;
  double latency_s;
  int degraded;
} cascade_classify_result;

/* ---- library ---------------------------------------------------------- */

CASCADE_API const char* cascade_version(void);
CASCADE_API int cascade_trace_format_version(void);
CASCADE_API const char* cascade_last_error(void);
CASCADE_API void cascade_string_free(char* s);

/* "accuracy", "f1", "mcc" or "mean-score". */
CASCADE_API cascade_status cascade_metric_kind_from_name(const char* name, cascade_metric_kind* out);

/* ---- traces ----------------------------------------------------------- */

/* metric may be NULL to skip metric-specific validation. */
CASCADE_API cascade_status cascade_trace_load(const char* path, const cascade_metric* metric, cascade_trace** out);
CASCADE_API cascade_status cascade_trace_write(const cascade_trace* trace, const char* path);
CASCADE_API size_t cascade_trace_size(const cascade_trace* trace);
CASCADE_API void cascade_trace_free(cascade_trace* trace);

CASCADE_API void cascade_fixture_params_init(cascade_fixture_params* params);
CASCADE_API cascade_status cascade_trace_generate(size_t n, uint64_t seed, const cascade_fixture_params* params,
                                                  cascade_trace** out);

/* ---- routing and metrics (escalated: one byte per record) -------------- */

CASCADE_API cascade_status cascade_route_threshold(const cascade_trace* trace, double threshold, uint8_t* escalated);
CASCADE_API cascade_status cascade_route_random(const cascade_trace* trace, double p, uint64_t seed,
                                                uint8_t* escalated);
CASCADE_API cascade_status cascade_route_oracle(const cascade_trace* trace, size_t budget,
                                                const cascade_metric* metric, uint8_t* escalated,
                                                int* approximate);
CASCADE_API cascade_status cascade_evaluate(const cascade_trace* trace, const uint8_t* escalated,
                                            const cascade_metric* metric, double* out);

/* ---- cost models ------------------------------------------------------ */

CASCADE_API cascade_status cascade_cost_model_constant(double tier1_s, double tier2_s, cascade_cost_model** out);
CASCADE_API cascade_status cascade_cost_model_load(const char* path, cascade_cost_model** out);
CASCADE_API cascade_status cascade_cost_model_parse(const char* json_text, cascade_cost_model** out);
/* An empty model: only valid for traces that carry measured costs. */
CASCADE_API cascade_status cascade_cost_model_empty(cascade_cost_model** out);
CASCADE_API cascade_status cascade_cost_model_optimal_batch(const cascade_cost_model* cost, int tier, size_t* out);
CASCADE_API void cascade_cost_model_free(cascade_cost_model* cost);
CASCADE_API cascade_status cascade_total_time(const cascade_trace* trace, const uint8_t* escalated,
                                              const cascade_cost_model* cost, size_t tier1_batch,
                                              size_t tier2_batch, double* out);

/* ---- curves ----------------------------------------------------------- */

CASCADE_API void cascade_sweep_options_init(cascade_sweep_options* options);
CASCADE_API cascade_status cascade_sweep(const cascade_trace* trace, const cascade_metric* metric,
                                         const cascade_cost_model* cost, cascade_policy policy,
                                         const cascade_sweep_options* options, cascade_curve** out);
CASCADE_API size_t cascade_curve_size(const cascade_curve* curve);
CASCADE_API cascade_status cascade_curve_point_at(const cascade_curve* curve, size_t index, cascade_curve_point* out);
CASCADE_API cascade_status cascade_curve_reference(const cascade_curve* curve, double* tier1_performance,
                                                   double* tier2_performance, double* tier2_time_s);
/* *achievable is set to 0 when no point reaches q times tier-2 performance. */
CASCADE_API cascade_status cascade_curve_best_at(const cascade_curve* curve, double q, int* achievable,
                                                 cascade_curve_point* out);
CASCADE_API cascade_status cascade_curve_write_csv(const cascade_curve* curve, const char* path);
CASCADE_API void cascade_curve_free(cascade_curve* curve);

CASCADE_API cascade_status cascade_speedup_at(const cascade_trace* trace, const cascade_metric* metric,
                                              const cascade_cost_model* cost, const cascade_sweep_options* options,
                                              double q, int* achievable, cascade_curve_point* out);
CASCADE_API cascade_status cascade_calibration_report(const cascade_trace* trace, const cascade_metric* metric,
                                                      const cascade_cost_model* cost,
                                                      const cascade_sweep_options* options, const double* qualities,
                                                      size_t count, char** json_out);
CASCADE_API cascade_status cascade_optimal_batch_size_file(const char* latency_table_path, size_t* out);

/* ---- batch simulation ------------------------------------------------- */

CASCADE_API cascade_status cascade_simulate(const cascade_trace* trace, double threshold,
                                            const cascade_cost_model* cost, const cascade_sim_config* config,
                                            cascade_sim_result** out);
CASCADE_API cascade_status cascade_sim_summary_get(const cascade_sim_result* result, cascade_sim_summary* out);
CASCADE_API cascade_status cascade_sim_write_batch_log(const cascade_sim_result* result, const char* path);
CASCADE_API cascade_status cascade_sim_write_completion(const cascade_sim_result* result, const char* path);
CASCADE_API void cascade_sim_result_free(cascade_sim_result* result);
/* optimized may be NULL to use each tier's optimal batch size. */
CASCADE_API cascade_status cascade_compare_batching(const cascade_trace* trace, const double* thresholds,
                                                    size_t count, const cascade_cost_model* cost,
                                                    const cascade_sim_config* optimized, const char* csv_path);

/* ---- error analysis --------------------------------------------------- */

CASCADE_API cascade_status cascade_heatmap_compute(const cascade_trace* trace, size_t num_quantiles,
                                                   cascade_heatmap** out);
CASCADE_API cascade_status cascade_heatmap_totals(const cascade_heatmap* map, double* ft_total, double* tf_total);
CASCADE_API cascade_status cascade_heatmap_write_csv(const cascade_heatmap* map, const char* path);
CASCADE_API void cascade_heatmap_free(cascade_heatmap* map);

/* ---- gateway ---------------------------------------------------------- */

CASCADE_API cascade_status cascade_gateway_create(const char* config_json, cascade_gateway** out);
/* Starts the HTTP front end; *port receives the bound port. */
CASCADE_API cascade_status cascade_gateway_start(cascade_gateway* gateway, int* port);
CASCADE_API cascade_status cascade_gateway_classify(cascade_gateway* gateway, const char* id, const char* payload,
                                                    cascade_classify_result* out);
CASCADE_API void cascade_classify_result_clear(cascade_classify_result* result);
CASCADE_API cascade_status cascade_gateway_flush(cascade_gateway* gateway);
CASCADE_API cascade_status cascade_gateway_counters_json(const cascade_gateway* gateway, char** out);
CASCADE_API cascade_status cascade_gateway_stop(cascade_gateway* gateway);
CASCADE_API void cascade_gateway_free(cascade_gateway* gateway);

/* role: 1 answers with tier-1 predictions, 2 with tier-2. port 0 picks a free port. */
CASCADE_API cascade_status cascade_replay_start(const cascade_trace* trace, int role, const char* host, int port,
                                                cascade_replay** out);
CASCADE_API int cascade_replay_port(const cascade_replay* replay);
CASCADE_API size_t cascade_replay_calls(const cascade_replay* replay);
CASCADE_API void cascade_replay_free(cascade_replay* replay);

#ifdef __cplusplus
}
#endif

#endif /* CASCADE_CASCADE_H_ */
