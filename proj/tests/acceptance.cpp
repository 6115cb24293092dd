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

// Acceptance run: one PASS/FAIL line per criterion. Tolerances and time
// limits are fixed here. Usage: acceptance <path to cascade CLI>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cascade/analysis.hpp"
#include "cascade/batchsim.hpp"
#include "cascade/curve.hpp"
#include "cascade/error.hpp"
#include "cascade/fixtures.hpp"
#include "cascade/gate.hpp"
#include "cascade/gateway.hpp"
#include "cascade/metrics.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace cascade;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Collects the first few failure messages of a criterion.
struct Outcome {
  std::size_t checks = 0;
  std::size_t failures = 0;
  std::string first_failure;
  std::string note;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (ok) return;
    if (failures++ == 0) first_failure = what;
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// ---- criteria ---------------------------------------------------------------

void gate_monotonicity(Outcome& o) {
  testgen::Rng rng(1001);
  for (int i = 0; i < 1000; ++i) {
    const Trace t = testgen::random_trace(rng, 64, i % 2 ? 0 : 10);
    double t1 = testgen::uniform(rng), t2 = testgen::uniform(rng);
    if (t1 > t2) std::swap(t1, t2);
    if (i % 10 == 0) t1 = t2;
    const auto lo = threshold_mask(t, t1);
    const auto hi = threshold_mask(t, t2);
    bool subset = true;
    for (std::size_t k = 0; k < lo.size(); ++k) subset &= !lo[k] || hi[k];
    o.expect(subset, "trace " + std::to_string(i) + ": escalated(" + fmt(t1) + ") not within escalated(" + fmt(t2) + ")");
  }
  o.note = "1000 traces, n=64";
}

void endpoint_identities(Outcome& o) {
  testgen::Rng rng(1002);
  const CostModel cost = CostModel::constant(0.01, 0.1);
  for (int i = 0; i < 100; ++i) {
    testgen::TraceShape shape;
    shape.n = testgen::uniform_int(rng, 2, 200);
    shape.grid = i % 2 ? 0 : 6;
    shape.scores = true;
    shape.cover_labels = true;
    const Trace t = testgen::random_trace(rng, shape);
    const MetricSpec metrics[] = {MetricSpec::accuracy(), MetricSpec::binary_f1("a"), MetricSpec::mcc("a"),
                                  MetricSpec::mean_score()};
    const MetricSpec& m = metrics[i % 4];
    const double p1 = tier_only_performance(t, m, Tier::kFirst);
    const double p2 = tier_only_performance(t, m, Tier::kSecond);
    o.expect(evaluate(route_threshold(t, 0.0), t, m) == p1, "threshold 0 differs from tier 1 only, trace " + std::to_string(i));
    o.expect(evaluate(route_escalate_all(t), t, m) == p2, "escalate-all differs from tier 2 only, trace " + std::to_string(i));
    const Curve c = sweep(t, m, cost, PolicyFamily::kThreshold);
    std::size_t flagged = 0;
    for (const auto& p : c.points) {
      if (p.tier2_equivalent) {
        ++flagged;
        o.expect(p.performance == p2, "curve escalate-all point differs, trace " + std::to_string(i));
      }
      if (p.threshold == 0.0) o.expect(p.performance == p1, "curve threshold-0 point differs, trace " + std::to_string(i));
    }
    o.expect(flagged == 1, "expected one escalate-all point, trace " + std::to_string(i));
  }
  o.note = "100 traces, bitwise";
}

void cost_formula(Outcome& o) {
  Trace t;
  for (int i = 0; i < 100; ++i) {
    t.records.push_back({.id = "k" + std::to_string(i), .gold_label = "a", .tier1_pred = "a",
                         .tier1_confidence = i < 20 ? 0.1 : 0.9, .tier2_pred = "a"});
  }
  const CostModel cost = CostModel::constant(1, 10);
  const double total = total_time(route_threshold(t, 0.5), t, cost);
  o.expect(std::abs(total - 300.0) <= 1e-9, "total_time " + fmt(total) + " != 300");
  const Curve c = sweep(t, MetricSpec::accuracy(), cost, PolicyFamily::kThreshold);
  bool found = false;
  for (const auto& p : c.points) {
    if (p.escalation_fraction == 0.2) {
      found = true;
      o.expect(std::abs(p.total_time - 300.0) <= 1e-9, "curve total_time " + fmt(p.total_time));
      o.expect(std::abs(p.speedup - 10.0 / 3.0) <= 1e-9, "speedup " + fmt(p.speedup) + " != 3.3333");
    }
  }
  o.expect(found, "no curve point at 20% escalation");

  testgen::Rng rng(1003);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const Trace r = testgen::random_trace(rng, testgen::uniform_int(rng, 1, 300), i % 2 ? 0 : 8);
    SimConfig cfg;
    cfg.cost = CostModel::constant(0.001 + 0.01 * testgen::uniform(rng), 0.01 + 0.5 * testgen::uniform(rng));
    const double th = testgen::uniform(rng);
    const double makespan = simulate(r, th, cfg).makespan;
    const double expected = total_time(route_threshold(r, th), r, cfg.cost);
    const double rel = std::abs(makespan - expected) / expected;
    worst = std::max(worst, rel);
    o.expect(rel <= 1e-9, "simulator vs curve, trace " + std::to_string(i) + ": relative error " + fmt(rel));
  }
  o.note = "300s, 10/3x; simulator worst relative error " + fmt(worst);
}

void oracle_exactness(Outcome& o) {
  testgen::Rng rng(1004);
  std::size_t budgets = 0;
  for (int i = 0; i < 500; ++i) {
    const int kind = i % 3;
    testgen::TraceShape shape;
    shape.n = testgen::uniform_int(rng, kind == 0 ? 1 : 2, kind == 0 ? 16 : 12);
    shape.grid = i % 2 ? 0 : 4;
    shape.cover_labels = true;
    const std::size_t n = shape.n;
    const Trace t = testgen::random_trace(rng, shape);
    const MetricSpec spec = kind == 0 ? MetricSpec::accuracy() : kind == 1 ? MetricSpec::binary_f1("a") : MetricSpec::mcc("a");
    const oracle::Metric om = kind == 0 ? oracle::Metric::kAccuracy : kind == 1 ? oracle::Metric::kF1 : oracle::Metric::kMcc;
    const auto best = oracle::exhaustive_best(t, om, "a");
    for (std::size_t k = 0; k <= n; ++k, ++budgets) {
      const OracleResult r = route_oracle(t, k, spec);
      const double got = evaluate(r.decisions, t, spec);
      o.expect(!r.approximate, "approximate result at n=" + std::to_string(n));
      o.expect(escalation_count(mask_of(r.decisions)) <= k, "budget exceeded");
      o.expect(std::abs(got - best[k]) <= 1e-12, spec.name() + " trace " + std::to_string(i) + " budget " + std::to_string(k) +
                                                     ": " + fmt(got) + " vs exhaustive " + fmt(best[k]));
    }
  }
  o.note = "500 traces, " + std::to_string(budgets) + " budgets";
}

void metric_oracles(Outcome& o) {
  std::size_t cases = 0;
  for (std::size_t tp = 0; tp <= 5; ++tp)
    for (std::size_t fp = 0; fp <= 5; ++fp)
      for (std::size_t tn = 0; tn <= 5; ++tn)
        for (std::size_t fn = 0; fn <= 5; ++fn, ++cases) {
          const ConfusionCounts c{tp, fp, tn, fn};
          const double f1 = oracle::f1_definition(tp, fp, tn, fn);
          const double mcc = oracle::mcc_definition(tp, fp, tn, fn);
          const std::string at = " at " + std::to_string(tp) + "," + std::to_string(fp) + "," + std::to_string(tn) +
                                 "," + std::to_string(fn);
          o.expect(std::abs(f1_from_counts(c) - f1) <= 1e-12, "F1" + at);
          o.expect(std::abs(mcc_from_counts(c) - mcc) <= 1e-12, "MCC" + at);
        }
  o.note = std::to_string(cases) + " confusion matrices";
}

// Linear interpolation of threshold-curve performance at an escalation
// fraction, over points ordered by fraction.
double performance_at(const std::vector<CurvePoint>& by_fraction, double f) {
  auto it = std::lower_bound(by_fraction.begin(), by_fraction.end(), f,
                             [](const CurvePoint& p, double x) { return p.escalation_fraction < x; });
  if (it == by_fraction.end()) return by_fraction.back().performance;
  if (it == by_fraction.begin() || it->escalation_fraction == f) return it->performance;
  const auto& a = *(it - 1);
  const auto& b = *it;
  const double w = (f - a.escalation_fraction) / (b.escalation_fraction - a.escalation_fraction);
  return a.performance + w * (b.performance - a.performance);
}

void sweep_dominance(Outcome& o) {
  const CostModel cost = CostModel::constant(0.01, 0.2);
  const MetricSpec acc = MetricSpec::accuracy();
  SweepOptions opts;
  opts.random_repeats = 5;
  std::size_t compared = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    FixtureParams p;
    p.confidence_separation = 0.25 * static_cast<double>(seed % 5);
    const std::size_t n = 1000;
    const Trace t = generate_trace(n, seed, p);
    opts.seed = seed;
    const Curve thr = sweep(t, acc, cost, PolicyFamily::kThreshold, opts);
    const Curve orc = sweep(t, acc, cost, PolicyFamily::kOracle, opts);
    const Curve rnd = sweep(t, acc, cost, PolicyFamily::kRandom, opts);

    // Threshold performance by escalation count; the escalate-all point
    // shares its count with the highest real threshold.
    std::vector<double> by_count(n + 1, -1.0);
    std::vector<CurvePoint> by_fraction;
    for (const auto& pt : thr.points) {
      const auto m = static_cast<std::size_t>(std::llround(pt.escalation_fraction * n));
      by_count[m] = std::max(by_count[m], pt.performance);
      by_fraction.push_back(pt);
    }
    std::sort(by_fraction.begin(), by_fraction.end(),
              [](const CurvePoint& a, const CurvePoint& b) { return a.escalation_fraction < b.escalation_fraction; });

    for (const auto& pt : orc.points) {
      const auto k = static_cast<std::size_t>(std::llround(pt.escalation_fraction * n));
      if (by_count[k] < 0) continue;
      ++compared;
      o.expect(pt.performance >= by_count[k] - 1e-12, "seed " + std::to_string(seed) + ": oracle " + fmt(pt.performance) +
                                                          " below threshold " + fmt(by_count[k]) + " at k=" + std::to_string(k));
    }
    const double reps = static_cast<double>(opts.random_repeats);
    for (const auto& pt : rnd.points) {
      const double a = pt.performance;
      const double sigma = std::sqrt(a * (1 - a) / (static_cast<double>(n) * reps));
      const double th = performance_at(by_fraction, pt.escalation_fraction);
      ++compared;
      o.expect(th >= a - 2 * sigma, "seed " + std::to_string(seed) + ": threshold " + fmt(th) + " below random " + fmt(a) +
                                        " - 2 sigma at fraction " + fmt(pt.escalation_fraction));
    }
  }
  o.note = "10 fixtures, " + std::to_string(compared) + " matched points";
}

Trace uniform_trace(std::size_t n, double confidence) {
  Trace t;
  for (std::size_t i = 0; i < n; ++i) {
    t.records.push_back({.id = "u" + std::to_string(i), .gold_label = "a", .tier1_pred = "a",
                         .tier1_confidence = confidence, .tier2_pred = "a"});
  }
  return t;
}

SimConfig table_config(std::size_t b1, std::size_t b2, double l1, double l2) {
  SimConfig c;
  c.b1 = b1;
  c.b2 = b2;
  c.cost.tier1 = LatencyTable({{b1, l1}});
  c.cost.tier2 = LatencyTable({{b2, l2}});
  return c;
}

void simulator_arithmetic(Outcome& o) {
  const SimResult a = simulate(uniform_trace(100, 0.9), 0.0, table_config(10, 10, 0.050, 1.0));
  o.expect(a.makespan == 0.5, "no-escalation makespan " + fmt(a.makespan));
  o.expect(a.throughput == 200.0, "no-escalation throughput " + fmt(a.throughput));
  const SimResult b = simulate(uniform_trace(100, 0.1), 0.5, table_config(10, 20, 0.050, 0.400));
  o.expect(b.makespan == 2.5, "all-escalate makespan " + fmt(b.makespan));
  SimConfig one;
  one.b1 = 4;
  one.b2 = 8;
  one.cost.tier1 = LatencyTable({{1, 0.003}, {4, 0.009}});
  one.cost.tier2 = LatencyTable({{1, 0.070}, {8, 0.300}});
  const SimResult kept = simulate(uniform_trace(1, 0.2), 0.1, one);
  const SimResult esc = simulate(uniform_trace(1, 0.2), 0.5, one);
  o.expect(kept.makespan == 0.003, "singleton makespan " + fmt(kept.makespan));
  o.expect(esc.makespan == 0.003 + 0.070, "escalated singleton makespan " + fmt(esc.makespan));

  testgen::Rng rng(1007);
  for (int i = 0; i < 200; ++i) {
    testgen::TraceShape shape;
    shape.n = testgen::uniform_int(rng, 1, 200);
    shape.tier1_costs = i % 7 == 0;
    shape.tier2_costs = i % 5 == 0;
    const Trace t = testgen::random_trace(rng, shape);
    SimConfig cfg;
    cfg.b1 = testgen::uniform_int(rng, 1, 16);
    cfg.b2 = testgen::uniform_int(rng, 1, 16);
    cfg.cost = CostModel{testgen::random_table(rng), testgen::random_table(rng)};
    if (i % 2) cfg.flush = MaxWait{0.001 + 0.2 * testgen::uniform(rng)};
    const auto mask = random_mask(t, testgen::uniform(rng), i);
    const SimResult r = simulate(t, mask, cfg);
    const std::string at = "pair " + std::to_string(i) + ": ";
    std::size_t t1 = 0, t2 = 0;
    double prev = 0.0;
    bool ordered = true, sized = true;
    for (const auto& e : r.batch_log) {
      sized &= e.batch_size >= 1 && e.batch_size <= (e.tier == 1 ? cfg.b1 : cfg.b2);
      ordered &= e.start == prev && e.end > e.start;
      prev = e.end;
      (e.tier == 1 ? t1 : t2) += e.batch_size;
    }
    const std::size_t m = escalation_count(mask);
    o.expect(sized, at + "batch size out of range");
    o.expect(ordered, at + "batches overlap or leave gaps");
    o.expect(t1 == t.size(), at + "tier-1 items " + std::to_string(t1));
    o.expect(t2 == m, at + "tier-2 items " + std::to_string(t2) + " vs " + std::to_string(m));
    o.expect(r.makespan == prev, at + "makespan is not the last batch end");
    bool complete = r.completion.size() == t.size();
    for (std::size_t k = 0; complete && k < t.size(); ++k) {
      complete = r.completion[k].seconds > 0 && r.completion[k].seconds <= r.makespan &&
                 r.completion[k].escalated == (mask[k] != 0);
    }
    o.expect(complete, at + "completion times inconsistent");
  }
  o.note = "3 scenarios exact, 200 conservation pairs";
}

void heatmap_consistency(Outcome& o) {
  testgen::Rng rng(1008);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = testgen::uniform_int(rng, 1, 400);
    const Trace t = testgen::random_trace(rng, n, i % 2 ? 0 : 5);
    const QuantileHeatmap base = heatmap(t, 1);
    for (std::size_t q : {1, 2, 5, 10}) {
      const QuantileHeatmap h = heatmap(t, q);
      const std::string at = "trace " + std::to_string(i) + " q=" + std::to_string(q) + ": ";
      o.expect(h.ft_total == base.ft_total && h.tf_total == base.tf_total, at + "totals vary with quantile count");
      double pop = 0, ft = 0, tf = 0;
      for (const auto& c : h.quantiles) {
        pop += c.population_fraction;
        ft += c.ft_fraction;
        tf += c.tf_fraction;
      }
      o.expect(std::abs(pop - 1.0) <= 1e-9, at + "population sums to " + fmt(pop));
      o.expect(std::abs(ft - h.ft_total) <= 1e-9, at + "F-T cells sum to " + fmt(ft));
      o.expect(std::abs(tf - h.tf_total) <= 1e-9, at + "T-F cells sum to " + fmt(tf));
    }
  }
  o.note = "100 traces, q in {1,2,5,10}";
}

void gateway_consistency(Outcome& o) {
  const Trace t = generate_trace(500, 2026);
  const std::size_t b2 = 16;
  for (double th : {0.0, 0.5, 0.9, 1.0}) {
    ReplayBackend tier1(t, BackendRole::kTier1);
    ReplayBackend tier2(t, BackendRole::kTier2);
    tier1.start();
    tier2.start();
    GatewayConfig c;
    c.threshold = th;
    c.tier1.port = tier1.port();
    c.tier1.batch_size = 8;
    c.tier2.port = tier2.port();
    c.tier2.batch_size = b2;
    c.flush = GatewayFlush::kEndOfStream;
    Gateway g(c);
    std::vector<std::future<ClassifyResponse>> futures;
    for (const auto& r : t.records) futures.push_back(g.submit({r.id, "text"}));
    g.flush();
    // Confidences lie below 1, so 1.0 is the escalate-all point.
    const Decisions expected = th == 1.0 ? route_escalate_all(t) : route_threshold(t, th);
    std::size_t m = 0, mismatched = 0;
    for (std::size_t i = 0; i < futures.size(); ++i) {
      try {
        const ClassifyResponse resp = futures[i].get();
        mismatched += resp.id != expected[i].id || resp.tier_used != (expected[i].escalated ? 2 : 1) ||
                      resp.label != expected[i].final_pred;
      } catch (const std::exception&) {
        ++mismatched;
      }
      m += expected[i].escalated;
    }
    const std::string at = "threshold " + fmt(th) + ": ";
    o.expect(mismatched == 0, at + std::to_string(mismatched) + " responses differ from route_threshold");
    o.expect(tier2.calls() == (m + b2 - 1) / b2,
             at + "tier-2 calls " + std::to_string(tier2.calls()) + ", expected ceil(" + std::to_string(m) + "/16)");
    g.stop();
  }
  o.note = "500 records, thresholds {0, 0.5, 0.9, escalate-all}";
}

// ---- CLI determinism ---------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void cli_determinism(Outcome& o, const std::string& cli) {
  const fs::path root = fs::temp_directory_path() / "cascade_acceptance_determinism";
  fs::remove_all(root);
  const std::vector<std::string> commands = {
      "generate --n 400 --seed 17 --with-scores --tier1-cost 0.002 --tier2-cost 0.04 --out trace.jsonl",
      "generate --n 400 --seed 18 --out plain.jsonl",
      "sweep --trace plain.jsonl --cost cost.json --b1 opt --b2 opt --policy all --seeds 5 --seed 3 --out curve.csv "
      "--summary summary.json",
      "sweep --trace trace.jsonl --metric mean-score --c1 0.01 --c2 0.2 --policy random --out scores.csv",
      "calibrate --trace plain.jsonl --metric mcc --positive-label pos --c1 0.01 --c2 0.2 --q 0.99 0.95 --out calib.json",
      "simulate --trace plain.jsonl --cost cost.json --threshold 0.8 --b1 opt --b2 opt --max-wait 0.05 "
      "--batch-log log.csv --completion done.csv --summary sim.json --compare cmp.csv --compare-thresholds 0 0.8 1",
      "simulate --trace trace.jsonl --threshold 0.7 --b1 4 --b2 8 --summary measured.json",
      "analyze --trace plain.jsonl --quantiles 5 --out heatmap.csv",
  };
  for (const char* run : {"a", "b"}) {
    const fs::path dir = root / run;
    fs::create_directories(dir);
    std::ofstream(dir / "cost.json") << R"({"tier1": {"points": [[1, 0.004], [8, 0.012], [32, 0.040]]},
      "tier2": {"points": [[1, 0.080], [4, 0.200], [16, 0.720]]}})";
    for (const auto& args : commands) {
      const std::string cmd = "cd '" + dir.string() + "' && '" + cli + "' " + args + " >/dev/null 2>&1";
      const int status = std::system(cmd.c_str());
      o.expect(WIFEXITED(status) && WEXITSTATUS(status) == 0, "command failed: " + args);
    }
  }
  std::size_t outputs = 0, manifests = 0;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    const std::string name = entry.path().filename().string();
    const fs::path other = root / "b" / name;
    if (!fs::exists(other)) {
      o.expect(false, name + " missing from rerun");
      continue;
    }
    if (name.ends_with(".manifest.json")) {
      ++manifests;
      json ja = json::parse(slurp(entry.path()));
      json jb = json::parse(slurp(other));
      o.expect(ja.contains("timestamp") && jb.contains("timestamp"), name + " lacks a timestamp");
      ja.erase("timestamp");
      jb.erase("timestamp");
      o.expect(ja == jb, name + " differs beyond its timestamp");
    } else {
      ++outputs;
      o.expect(slurp(entry.path()) == slurp(other), name + " differs between runs");
    }
  }
  o.expect(manifests >= 10, "only " + std::to_string(manifests) + " manifests written");
  o.note = std::to_string(outputs) + " data files, " + std::to_string(manifests) + " manifests";
  fs::remove_all(root);
}

struct Criterion {
  std::string name;
  double time_limit;  // seconds; 0 for none
  std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <cascade-cli>\n");
    return 2;
  }
  const std::string cli = fs::absolute(argv[1]).string();
  const std::vector<Criterion> criteria = {
      {"gate monotonicity", 10, gate_monotonicity},
      {"endpoint identities", 5, endpoint_identities},
      {"cost formula", 0, cost_formula},
      {"oracle exactness", 60, oracle_exactness},
      {"metric oracles", 0, metric_oracles},
      {"sweep dominance", 0, sweep_dominance},
      {"simulator arithmetic", 0, simulator_arithmetic},
      {"heatmap consistency", 0, heatmap_consistency},
      {"gateway consistency", 30, gateway_consistency},
      {"CLI determinism", 0, [&](Outcome& o) { cli_determinism(o, cli); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit > 0) {
      o.expect(secs < c.time_limit, "took " + fmt(secs) + "s, limit " + fmt(c.time_limit) + "s");
    }
    const bool ok = o.failures == 0;
    failed += !ok;
    std::printf("%s %s: %s; %zu checks; %.2fs%s\n", ok ? "PASS" : "FAIL", c.name.c_str(), o.note.c_str(), o.checks, secs,
                ok ? "" : ("; " + std::to_string(o.failures) + " failed, first: " + o.first_failure).c_str());
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
