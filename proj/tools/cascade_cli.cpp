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

// cascade: command-line front end over the C API.
//
//   cascade sweep     --trace t.jsonl --metric accuracy --cost cost.json --policy all --out curve.csv
//   cascade calibrate --trace t.jsonl --cost cost.json --q 0.99,0.98
//   cascade simulate  --trace t.jsonl --threshold 0.9 --cost cost.json --b1 opt --b2 opt --batch-log log.csv
//   cascade analyze   --trace t.jsonl --quantiles 5 --out heatmap.csv
//   cascade serve     --config gateway.json [--replay t.jsonl]
//   cascade generate  --n 1000 --seed 7 --out t.jsonl

#include <csignal>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cascade/cascade.h"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kUsage = 2, kValidation = 3, kIo = 4, kUpstream = 5 };

struct Failure {
  int code;
  std::string message;
};

int exit_code_for(cascade_status s) {
  switch (s) {
    case CASCADE_OK: return kOk;
    case CASCADE_ERR_USAGE: return kUsage;
    case CASCADE_ERR_VALIDATION: return kValidation;
    case CASCADE_ERR_IO: return kIo;
    case CASCADE_ERR_UPSTREAM: return kUpstream;
    case CASCADE_ERR_INTERNAL: break;
  }
  return kInternal;
}

void check(cascade_status s) {
  if (s != CASCADE_OK) throw Failure{exit_code_for(s), cascade_last_error()};
}

[[noreturn]] void usage_error(const std::string& message) { throw Failure{kUsage, message}; }

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using TracePtr = std::unique_ptr<cascade_trace, Deleter<cascade_trace, cascade_trace_free>>;
using CostPtr = std::unique_ptr<cascade_cost_model, Deleter<cascade_cost_model, cascade_cost_model_free>>;
using CurvePtr = std::unique_ptr<cascade_curve, Deleter<cascade_curve, cascade_curve_free>>;
using SimPtr = std::unique_ptr<cascade_sim_result, Deleter<cascade_sim_result, cascade_sim_result_free>>;
using HeatmapPtr = std::unique_ptr<cascade_heatmap, Deleter<cascade_heatmap, cascade_heatmap_free>>;
using GatewayPtr = std::unique_ptr<cascade_gateway, Deleter<cascade_gateway, cascade_gateway_free>>;
using ReplayPtr = std::unique_ptr<cascade_replay, Deleter<cascade_replay, cascade_replay_free>>;

std::string take_string(char* s) {
  std::string out(s);
  cascade_string_free(s);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kIo, "cannot open " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{kIo, "cannot write " + path};
  out << text;
  if (!out) throw Failure{kIo, "write failed: " + path};
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Provenance for one run. Written next to every data output as
// <output>.manifest.json; only the timestamp varies between reruns.
struct Manifest {
  std::string command;
  json inputs = json::object();
  json config = json::object();
  std::vector<std::uint64_t> seeds;

  void input(const std::string& role, const std::string& path) {
    inputs[role] = {{"path", path}, {"fnv1a64", hex64(fnv1a(read_file(path)))}};
  }

  void write_for(const std::string& output) const {
    json doc = {
        {"command", command},
        {"inputs", inputs},
        {"config", config},
        {"config_digest", hex64(fnv1a(config.dump()))},
        {"seeds", seeds},
        {"tool_version", cascade_version()},
        {"trace_format_version", cascade_trace_format_version()},
        {"output", fs::path(output).filename().string()},
        {"timestamp", utc_timestamp()},
    };
    write_file(output + ".manifest.json", doc.dump(2) + "\n");
  }
};

// ---- shared option groups -------------------------------------------------

struct MetricOptions {
  std::string name = "accuracy";
  std::string positive;

  void add(CLI::App* app) {
    app->add_option("--metric", name, "accuracy, f1, mcc or mean-score")->capture_default_str();
    app->add_option("--positive-label", positive, "positive class for f1 (required) and mcc");
  }

  cascade_metric get() const {
    cascade_metric m{};
    check(cascade_metric_kind_from_name(name.c_str(), &m.kind));
    m.positive_label = positive.empty() ? nullptr : positive.c_str();
    if (m.kind == CASCADE_METRIC_BINARY_F1 && positive.empty()) usage_error("--metric f1 needs --positive-label");
    return m;
  }

  void record(Manifest& manifest) const {
    manifest.config["metric"] = name;
    if (!positive.empty()) manifest.config["positive_label"] = positive;
  }
};

struct CostOptions {
  std::string path;
  std::optional<double> c1;
  std::optional<double> c2;

  void add(CLI::App* app) {
    app->add_option("--cost", path, "cost model JSON file");
    app->add_option("--c1", c1, "constant tier-1 seconds per instance (overrides --cost)");
    app->add_option("--c2", c2, "constant tier-2 seconds per instance (overrides --cost)");
  }

  // Flags override the file, which overrides the empty default. Relative
  // table paths inside the file resolve against the file's directory.
  CostPtr get(Manifest& manifest) const {
    cascade_cost_model* raw = nullptr;
    if (path.empty() && !c1 && !c2) {
      check(cascade_cost_model_empty(&raw));
      return CostPtr(raw);
    }
    json doc = json::object();
    if (!path.empty()) {
      manifest.input("cost", path);
      try {
        doc = json::parse(read_file(path));
      } catch (const json::exception& e) {
        usage_error("invalid cost model " + path + ": " + e.what());
      }
      if (!doc.is_object()) usage_error("cost model must be a JSON object");
      const fs::path base = fs::path(path).parent_path();
      for (const char* tier : {"tier1", "tier2"}) {
        if (doc.contains(tier) && doc[tier].is_object() && doc[tier].contains("file") && doc[tier]["file"].is_string()) {
          const fs::path file = doc[tier]["file"].get<std::string>();
          if (file.is_relative()) doc[tier]["file"] = (base / file).string();
        }
      }
    }
    if (c1) doc["tier1"] = {{"type", "constant"}, {"seconds", *c1}};
    if (c2) doc["tier2"] = {{"type", "constant"}, {"seconds", *c2}};
    manifest.config["cost"] = doc;
    check(cascade_cost_model_parse(doc.dump().c_str(), &raw));
    return CostPtr(raw);
  }
};

// "opt" picks the cost model's optimal batch size for the tier.
std::size_t resolve_batch(const std::string& text, const cascade_cost_model* cost, int tier) {
  if (text == "opt") {
    std::size_t b = 0;
    check(cascade_cost_model_optimal_batch(cost, tier, &b));
    return b;
  }
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size() || v < 1) throw std::invalid_argument("bad");
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    usage_error("batch size must be a positive integer or 'opt', got '" + text + "'");
  }
}

TracePtr load_trace(const std::string& path, const cascade_metric* metric, Manifest& manifest) {
  manifest.input("trace", path);
  cascade_trace* raw = nullptr;
  check(cascade_trace_load(path.c_str(), metric, &raw));
  return TracePtr(raw);
}

std::string with_family(const std::string& out, const std::string& family) {
  fs::path p(out);
  const std::string ext = p.extension().string();
  p.replace_extension();
  return p.string() + "." + family + (ext.empty() ? ".csv" : ext);
}

// ---- commands -------------------------------------------------------------

struct SweepArgs {
  std::string trace;
  MetricOptions metric;
  CostOptions cost;
  std::string b1 = "1";
  std::string b2 = "1";
  std::string policy = "threshold";
  std::size_t seeds = 5;
  std::uint64_t seed = 0;
  std::size_t max_oracle_points = 200;
  std::string out = "curve.csv";
  std::string summary;
};

cascade_sweep_options sweep_options(const std::string& b1, const std::string& b2, const cascade_cost_model* cost,
                                    std::size_t seeds, std::uint64_t seed, std::size_t max_oracle_points,
                                    Manifest& manifest) {
  cascade_sweep_options o;
  cascade_sweep_options_init(&o);
  o.tier1_batch = resolve_batch(b1, cost, 1);
  o.tier2_batch = resolve_batch(b2, cost, 2);
  o.seed = seed;
  o.random_repeats = seeds;
  o.max_oracle_points = max_oracle_points;
  manifest.config["b1"] = o.tier1_batch;
  manifest.config["b2"] = o.tier2_batch;
  manifest.config["random_repeats"] = seeds;
  manifest.config["max_oracle_points"] = max_oracle_points;
  manifest.seeds = {seed};
  return o;
}

int run_sweep(const SweepArgs& a) {
  Manifest manifest{"sweep"};
  const cascade_metric metric = a.metric.get();
  a.metric.record(manifest);
  const TracePtr trace = load_trace(a.trace, &metric, manifest);
  const CostPtr cost = a.cost.get(manifest);
  const cascade_sweep_options options =
      sweep_options(a.b1, a.b2, cost.get(), a.seeds, a.seed, a.max_oracle_points, manifest);
  manifest.config["policy"] = a.policy;

  std::vector<std::pair<std::string, cascade_policy>> families;
  if (a.policy == "all") {
    families = {{"threshold", CASCADE_POLICY_THRESHOLD}, {"random", CASCADE_POLICY_RANDOM}, {"oracle", CASCADE_POLICY_ORACLE}};
  } else if (a.policy == "threshold") {
    families = {{"threshold", CASCADE_POLICY_THRESHOLD}};
  } else if (a.policy == "random") {
    families = {{"random", CASCADE_POLICY_RANDOM}};
  } else if (a.policy == "oracle") {
    families = {{"oracle", CASCADE_POLICY_ORACLE}};
  } else {
    usage_error("--policy must be threshold, random, oracle or all");
  }

  for (const auto& [name, family] : families) {
    cascade_curve* raw = nullptr;
    check(cascade_sweep(trace.get(), &metric, cost.get(), family, &options, &raw));
    const CurvePtr curve(raw);
    const std::string path = families.size() == 1 ? a.out : with_family(a.out, name);
    check(cascade_curve_write_csv(curve.get(), path.c_str()));
    manifest.write_for(path);
    std::cerr << name << ": " << cascade_curve_size(curve.get()) << " points -> " << path << "\n";
  }

  if (!a.summary.empty()) {
    const double qs[] = {0.99, 0.98};
    char* text = nullptr;
    check(cascade_calibration_report(trace.get(), &metric, cost.get(), &options, qs, 2, &text));
    write_file(a.summary, take_string(text));
    manifest.write_for(a.summary);
  }
  return kOk;
}

struct CalibrateArgs {
  std::string trace;
  MetricOptions metric;
  CostOptions cost;
  std::string b1 = "1";
  std::string b2 = "1";
  std::vector<double> q{0.99, 0.98};
  std::size_t seeds = 5;
  std::uint64_t seed = 0;
  std::string out;
};

int run_calibrate(const CalibrateArgs& a) {
  for (double q : a.q) {
    if (!(q > 0.0 && q <= 1.0)) usage_error("--q values must lie in (0,1], got " + std::to_string(q));
  }
  Manifest manifest{"calibrate"};
  const cascade_metric metric = a.metric.get();
  a.metric.record(manifest);
  const TracePtr trace = load_trace(a.trace, &metric, manifest);
  const CostPtr cost = a.cost.get(manifest);
  const cascade_sweep_options options = sweep_options(a.b1, a.b2, cost.get(), a.seeds, a.seed, 200, manifest);
  manifest.config["q"] = a.q;

  char* text = nullptr;
  check(cascade_calibration_report(trace.get(), &metric, cost.get(), &options, a.q.data(), a.q.size(), &text));
  const std::string report = take_string(text);
  if (a.out.empty()) {
    std::cout << report;
  } else {
    write_file(a.out, report);
    manifest.write_for(a.out);
  }
  return kOk;
}

struct SimulateArgs {
  std::string trace;
  CostOptions cost;
  double threshold = 0.0;
  std::string b1 = "1";
  std::string b2 = "1";
  std::optional<double> max_wait;
  std::string batch_log;
  std::string completion;
  std::string summary;
  std::string compare;
  std::vector<double> compare_thresholds;
};

int run_simulate(const SimulateArgs& a) {
  Manifest manifest{"simulate"};
  const TracePtr trace = load_trace(a.trace, nullptr, manifest);
  const CostPtr cost = a.cost.get(manifest);
  cascade_sim_config config{};
  config.b1 = resolve_batch(a.b1, cost.get(), 1);
  config.b2 = resolve_batch(a.b2, cost.get(), 2);
  config.max_wait_s = a.max_wait.value_or(0.0);
  if (a.max_wait && *a.max_wait <= 0.0) usage_error("--max-wait must be positive");
  manifest.config["threshold"] = a.threshold;
  manifest.config["b1"] = config.b1;
  manifest.config["b2"] = config.b2;
  manifest.config["flush"] = a.max_wait ? json(*a.max_wait) : json("end_of_stream");

  cascade_sim_result* raw = nullptr;
  check(cascade_simulate(trace.get(), a.threshold, cost.get(), &config, &raw));
  const SimPtr result(raw);
  cascade_sim_summary s{};
  check(cascade_sim_summary_get(result.get(), &s));

  if (!a.batch_log.empty()) {
    check(cascade_sim_write_batch_log(result.get(), a.batch_log.c_str()));
    manifest.write_for(a.batch_log);
  }
  if (!a.completion.empty()) {
    check(cascade_sim_write_completion(result.get(), a.completion.c_str()));
    manifest.write_for(a.completion);
  }
  const json summary = {{"threshold", a.threshold},   {"b1", config.b1},
                        {"b2", config.b2},            {"makespan_s", s.makespan_s},
                        {"throughput_per_s", s.throughput_per_s}, {"batches", s.batches},
                        {"escalated", s.escalated},   {"n", cascade_trace_size(trace.get())}};
  if (a.summary.empty()) {
    std::cout << summary.dump(2) << "\n";
  } else {
    write_file(a.summary, summary.dump(2) + "\n");
    manifest.write_for(a.summary);
  }
  if (!a.compare.empty()) {
    std::vector<double> ts = a.compare_thresholds.empty() ? std::vector<double>{a.threshold} : a.compare_thresholds;
    check(cascade_compare_batching(trace.get(), ts.data(), ts.size(), cost.get(), &config, a.compare.c_str()));
    manifest.write_for(a.compare);
  }
  return kOk;
}

struct AnalyzeArgs {
  std::string trace;
  std::size_t quantiles = 5;
  std::string out = "heatmap.csv";
};

int run_analyze(const AnalyzeArgs& a) {
  Manifest manifest{"analyze"};
  manifest.config["quantiles"] = a.quantiles;
  const TracePtr trace = load_trace(a.trace, nullptr, manifest);
  cascade_heatmap* raw = nullptr;
  check(cascade_heatmap_compute(trace.get(), a.quantiles, &raw));
  const HeatmapPtr map(raw);
  check(cascade_heatmap_write_csv(map.get(), a.out.c_str()));
  manifest.write_for(a.out);
  double ft = 0.0;
  double tf = 0.0;
  check(cascade_heatmap_totals(map.get(), &ft, &tf));
  std::fprintf(stderr, "F-T %.4f  T-F %.4f -> %s\n", ft, tf, a.out.c_str());
  return kOk;
}

struct GenerateArgs {
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  cascade_fixture_params params{};
  bool with_scores = false;
  std::string out = "trace.jsonl";
};

int run_generate(GenerateArgs a) {
  Manifest manifest{"generate"};
  a.params.with_scores = a.with_scores ? 1 : 0;
  manifest.config = {{"n", a.n},
                     {"tier1_easy_acc", a.params.tier1_easy_acc},
                     {"tier1_hard_acc", a.params.tier1_hard_acc},
                     {"tier2_acc", a.params.tier2_acc},
                     {"hard_fraction", a.params.hard_fraction},
                     {"confidence_separation", a.params.confidence_separation},
                     {"with_scores", a.with_scores},
                     {"tier1_cost", a.params.tier1_cost},
                     {"tier2_cost", a.params.tier2_cost}};
  manifest.seeds = {a.seed};
  cascade_trace* raw = nullptr;
  check(cascade_trace_generate(a.n, a.seed, &a.params, &raw));
  const TracePtr trace(raw);
  check(cascade_trace_write(trace.get(), a.out.c_str()));
  manifest.write_for(a.out);
  return kOk;
}

struct ServeArgs {
  std::string config;
  std::string replay;
  std::optional<double> threshold;
  std::optional<std::string> host;
  std::optional<int> port;
  std::optional<std::string> tier1;
  std::optional<std::string> tier2;
  std::optional<std::size_t> b1;
  std::optional<std::size_t> b2;
  std::optional<double> max_wait;
  std::optional<std::string> flush;
  std::optional<std::string> fallback;
};

int run_serve(const ServeArgs& a) {
  json doc = json::object();
  if (!a.config.empty()) {
    try {
      doc = json::parse(read_file(a.config));
    } catch (const json::exception& e) {
      usage_error("invalid gateway config " + a.config + ": " + e.what());
    }
    if (!doc.is_object()) usage_error("gateway config must be a JSON object");
  }
  if (a.threshold) doc["threshold"] = *a.threshold;
  if (a.host) doc["listen_host"] = *a.host;
  if (a.port) doc["listen_port"] = *a.port;
  if (a.tier1) doc["tier1"]["endpoint"] = *a.tier1;
  if (a.tier2) doc["tier2"]["endpoint"] = *a.tier2;
  if (a.b1) doc["tier1"]["batch_size"] = *a.b1;
  if (a.b2) doc["tier2"]["batch_size"] = *a.b2;
  if (a.max_wait) doc["max_wait_s"] = *a.max_wait;
  if (a.flush) doc["flush"] = *a.flush;
  if (a.fallback) doc["tier2_fallback"] = *a.fallback;

  // Signals are handled synchronously: block them before any worker thread
  // exists so every thread inherits the mask, then sigwait below.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  TracePtr trace;
  ReplayPtr replay1;
  ReplayPtr replay2;
  if (!a.replay.empty()) {
    cascade_trace* raw = nullptr;
    check(cascade_trace_load(a.replay.c_str(), nullptr, &raw));
    trace.reset(raw);
    cascade_replay* r = nullptr;
    check(cascade_replay_start(trace.get(), 1, "127.0.0.1", 0, &r));
    replay1.reset(r);
    check(cascade_replay_start(trace.get(), 2, "127.0.0.1", 0, &r));
    replay2.reset(r);
    doc["tier1"]["endpoint"] = "http://127.0.0.1:" + std::to_string(cascade_replay_port(replay1.get())) + "/predict";
    doc["tier2"]["endpoint"] = "http://127.0.0.1:" + std::to_string(cascade_replay_port(replay2.get())) + "/predict";
  }

  cascade_gateway* raw = nullptr;
  check(cascade_gateway_create(doc.dump().c_str(), &raw));
  const GatewayPtr gateway(raw);
  int port = 0;
  check(cascade_gateway_start(gateway.get(), &port));
  std::cout << "listening on port " << port << std::endl;

  int sig = 0;
  sigwait(&signals, &sig);
  std::cerr << "received signal " << sig << ", shutting down\n";
  check(cascade_gateway_stop(gateway.get()));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-tier cascade evaluation, simulation and serving"};
  app.require_subcommand(0, 1);
  bool version = false;
  app.add_flag("--version", version, "print tool and trace format versions");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "performance vs speedup curves");
  sweep_cmd->add_option("--trace", sweep.trace, "trace file (JSONL)")->required();
  sweep.metric.add(sweep_cmd);
  sweep.cost.add(sweep_cmd);
  sweep_cmd->add_option("--b1", sweep.b1, "tier-1 batch size or 'opt'")->capture_default_str();
  sweep_cmd->add_option("--b2", sweep.b2, "tier-2 batch size or 'opt'")->capture_default_str();
  sweep_cmd->add_option("--policy", sweep.policy, "threshold, random, oracle or all")->capture_default_str();
  sweep_cmd->add_option("--seeds", sweep.seeds, "random-policy repeats")->capture_default_str();
  sweep_cmd->add_option("--seed", sweep.seed, "base seed")->capture_default_str();
  sweep_cmd->add_option("--max-oracle-points", sweep.max_oracle_points)->capture_default_str();
  sweep_cmd->add_option("--out", sweep.out, "curve CSV; with --policy all, one file per family")->capture_default_str();
  sweep_cmd->add_option("--summary", sweep.summary, "speedup@0.99/0.98 report (JSON)");

  CalibrateArgs cal;
  auto* cal_cmd = app.add_subcommand("calibrate", "speedup at quality fractions");
  cal_cmd->add_option("--trace", cal.trace, "trace file (JSONL)")->required();
  cal.metric.add(cal_cmd);
  cal.cost.add(cal_cmd);
  cal_cmd->add_option("--b1", cal.b1)->capture_default_str();
  cal_cmd->add_option("--b2", cal.b2)->capture_default_str();
  cal_cmd->add_option("--q", cal.q, "quality fractions in (0,1]")->delimiter(',')->capture_default_str();
  cal_cmd->add_option("--seeds", cal.seeds)->capture_default_str();
  cal_cmd->add_option("--seed", cal.seed)->capture_default_str();
  cal_cmd->add_option("--out", cal.out, "report path (stdout if omitted)");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "batched execution on a shared CPU timeline");
  sim_cmd->add_option("--trace", sim.trace, "trace file (JSONL)")->required();
  sim.cost.add(sim_cmd);
  sim_cmd->add_option("--threshold", sim.threshold)->capture_default_str();
  sim_cmd->add_option("--b1", sim.b1)->capture_default_str();
  sim_cmd->add_option("--b2", sim.b2)->capture_default_str();
  sim_cmd->add_option("--max-wait", sim.max_wait, "flush partial tier-2 batches after this many seconds");
  sim_cmd->add_option("--batch-log", sim.batch_log, "tier,batch_size,start_s,end_s CSV");
  sim_cmd->add_option("--completion", sim.completion, "per-instance completion CSV");
  sim_cmd->add_option("--summary", sim.summary, "summary JSON (stdout if omitted)");
  sim_cmd->add_option("--compare", sim.compare, "batch-1 vs configured throughput CSV");
  sim_cmd->add_option("--compare-thresholds", sim.compare_thresholds)->delimiter(',');

  AnalyzeArgs an;
  auto* an_cmd = app.add_subcommand("analyze", "F-T / T-F error heatmap by confidence quantile");
  an_cmd->add_option("--trace", an.trace, "trace file (JSONL)")->required();
  an_cmd->add_option("--quantiles", an.quantiles)->capture_default_str();
  an_cmd->add_option("--out", an.out)->capture_default_str();

  GenerateArgs gen;
  cascade_fixture_params_init(&gen.params);
  auto* gen_cmd = app.add_subcommand("generate", "synthetic fixture trace");
  gen_cmd->add_option("--n", gen.n)->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed)->capture_default_str();
  gen_cmd->add_option("--tier1-easy-acc", gen.params.tier1_easy_acc)->capture_default_str();
  gen_cmd->add_option("--tier1-hard-acc", gen.params.tier1_hard_acc)->capture_default_str();
  gen_cmd->add_option("--tier2-acc", gen.params.tier2_acc)->capture_default_str();
  gen_cmd->add_option("--hard-fraction", gen.params.hard_fraction)->capture_default_str();
  gen_cmd->add_option("--confidence-separation", gen.params.confidence_separation)->capture_default_str();
  gen_cmd->add_option("--tier1-cost", gen.params.tier1_cost, "measured seconds per record (0: omit)");
  gen_cmd->add_option("--tier2-cost", gen.params.tier2_cost, "measured seconds per record (0: omit)");
  gen_cmd->add_flag("--with-scores", gen.with_scores);
  gen_cmd->add_option("--out", gen.out)->capture_default_str();

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "run the cascade gateway");
  serve_cmd->add_option("--config", serve.config, "gateway config JSON");
  serve_cmd->add_option("--replay", serve.replay, "serve both tiers from this trace");
  serve_cmd->add_option("--threshold", serve.threshold);
  serve_cmd->add_option("--host", serve.host);
  serve_cmd->add_option("--port", serve.port);
  serve_cmd->add_option("--tier1", serve.tier1, "tier-1 endpoint URL");
  serve_cmd->add_option("--tier2", serve.tier2, "tier-2 endpoint URL");
  serve_cmd->add_option("--b1", serve.b1);
  serve_cmd->add_option("--b2", serve.b2);
  serve_cmd->add_option("--max-wait", serve.max_wait);
  serve_cmd->add_option("--flush", serve.flush, "max_wait or end_of_stream");
  serve_cmd->add_option("--fallback", serve.fallback, "fail or degrade");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (version) {
      std::cout << "cascade " << cascade_version() << " (trace format " << cascade_trace_format_version() << ")\n";
      return kOk;
    }
    if (*sweep_cmd) return run_sweep(sweep);
    if (*cal_cmd) return run_calibrate(cal);
    if (*sim_cmd) return run_simulate(sim);
    if (*an_cmd) return run_analyze(an);
    if (*gen_cmd) return run_generate(gen);
    if (*serve_cmd) return run_serve(serve);
    std::cerr << app.help();
    return kUsage;
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
}
