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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cascade/batchsim.hpp"
#include "cascade/error.hpp"
#include "cascade/gate.hpp"
#include "generators.hpp"

using namespace cascade;

namespace {

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

// Structural checks on any simulation result.
void check_conservation(const Trace& t, const EscalationMask& mask, const SimConfig& cfg, const SimResult& r) {
  std::size_t t1 = 0, t2 = 0;
  double prev_end = 0.0;
  for (const auto& e : r.batch_log) {
    CHECK(e.batch_size >= 1);
    CHECK(e.batch_size <= (e.tier == 1 ? cfg.b1 : cfg.b2));
    CHECK(e.start == prev_end);
    CHECK(e.end > e.start);
    prev_end = e.end;
    (e.tier == 1 ? t1 : t2) += e.batch_size;
  }
  const std::size_t m = escalation_count(mask);
  CHECK(t1 == t.size());
  CHECK(t2 == m);
  CHECK(r.escalated == m);
  CHECK(r.makespan == prev_end);
  CHECK(r.throughput == doctest::Approx(static_cast<double>(t.size()) / r.makespan));
  REQUIRE(r.completion.size() == t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(r.completion[i].id == t.records[i].id);
    CHECK(r.completion[i].escalated == (mask[i] != 0));
    CHECK(r.completion[i].seconds > 0.0);
    CHECK(r.completion[i].seconds <= r.makespan);
  }
}

}  // namespace

TEST_CASE("no escalations: ten tier-1 batches of 50ms") {
  const Trace t = uniform_trace(100, 0.9);
  const SimResult r = simulate(t, 0.0, table_config(10, 10, 0.050, 1.0));
  CHECK(r.makespan == 0.5);
  CHECK(r.throughput == 200.0);
  CHECK(r.batch_log.size() == 10);
  CHECK(r.escalated == 0);
}

TEST_CASE("all escalate: a tier-2 batch after every second tier-1 batch") {
  const Trace t = uniform_trace(100, 0.1);
  const SimResult r = simulate(t, 0.5, table_config(10, 20, 0.050, 0.400));
  CHECK(r.makespan == 2.5);
  REQUIRE(r.batch_log.size() == 15);
  for (std::size_t i = 0; i < 15; ++i) {
    CHECK(r.batch_log[i].tier == (i % 3 == 2 ? 2 : 1));
  }
  CHECK(r.batch_log[2].start == doctest::Approx(0.1));
  CHECK(r.batch_log[2].end == doctest::Approx(0.5));
}

TEST_CASE("singleton stream") {
  const Trace low = uniform_trace(1, 0.2);
  SimConfig one = table_config(4, 8, 0.003, 0.070);
  one.cost.tier1 = LatencyTable({{1, 0.003}, {4, 0.009}});
  one.cost.tier2 = LatencyTable({{1, 0.070}, {8, 0.300}});
  const SimResult kept = simulate(low, 0.1, one);
  CHECK(kept.makespan == 0.003);
  REQUIRE(kept.batch_log.size() == 1);
  CHECK(kept.batch_log[0].batch_size == 1);
  const SimResult esc = simulate(low, 0.5, one);
  CHECK(esc.makespan == 0.003 + 0.070);
  REQUIRE(esc.batch_log.size() == 2);
  CHECK(esc.batch_log[1].tier == 2);
  CHECK(esc.batch_log[1].batch_size == 1);
}

TEST_CASE("unbatched constant costs match the curve formula") {
  testgen::Rng rng(41);
  for (int i = 0; i < 100; ++i) {
    const Trace t = testgen::random_trace(rng, testgen::uniform_int(rng, 1, 300), 0);
    const double c1 = 0.001 + 0.01 * testgen::uniform(rng);
    const double c2 = 0.01 + 0.5 * testgen::uniform(rng);
    const double th = testgen::uniform(rng);
    SimConfig cfg;
    cfg.cost = CostModel::constant(c1, c2);
    const SimResult r = simulate(t, th, cfg);
    const double expected = total_time(route_threshold(t, th), t, cfg.cost);
    CHECK(std::abs(r.makespan - expected) <= 1e-9 * expected);
  }
}

TEST_CASE("end-of-stream makespan equals batched curve time for any batch sizes") {
  testgen::Rng rng(42);
  for (int i = 0; i < 100; ++i) {
    const Trace t = testgen::random_trace(rng, testgen::uniform_int(rng, 1, 300), 0);
    SimConfig cfg;
    cfg.b1 = testgen::uniform_int(rng, 1, 32);
    cfg.b2 = testgen::uniform_int(rng, 1, 32);
    cfg.cost = CostModel{testgen::convex_table(rng), testgen::convex_table(rng)};
    const auto mask = random_mask(t, testgen::uniform(rng), i);
    const SimResult r = simulate(t, mask, cfg);
    const double expected = total_time(mask, t, cfg.cost, {cfg.b1, cfg.b2});
    CHECK(std::abs(r.makespan - expected) <= 1e-9 * expected);
  }
}

TEST_CASE("conservation over random traces and configs") {
  testgen::Rng rng(43);
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
    check_conservation(t, mask, cfg, simulate(t, mask, cfg));
  }
}

TEST_CASE("max-wait bounds queueing delay before dispatch") {
  // Tier-2 batch of 100 never fills; max-wait forces partial batches.
  const Trace t = uniform_trace(50, 0.1);
  SimConfig cfg = table_config(1, 100, 0.010, 0.050);
  cfg.cost.tier2 = LatencyTable({{1, 0.050}, {100, 0.500}});
  cfg.flush = MaxWait{0.035};
  const SimResult r = simulate(t, 0.5, cfg);
  std::size_t tier2_batches = 0;
  for (const auto& e : r.batch_log) tier2_batches += e.tier == 2;
  CHECK(tier2_batches > 1);
  // Flush checks happen at batch boundaries, so the wait can overshoot the
  // bound by at most one tier-1 batch.
  double enqueued = 0.0;
  std::size_t pending = 0;
  for (const auto& e : r.batch_log) {
    if (e.tier == 1) {
      if (pending == 0) enqueued = e.end;
      ++pending;
    } else {
      CHECK(e.start - enqueued <= 0.035 + 0.010 + 1e-12);
      pending = 0;
    }
  }
  SimConfig eos = cfg;
  eos.flush = EndOfStreamOnly{};
  const SimResult r2 = simulate(t, 0.5, eos);
  CHECK(r2.batch_log.back().tier == 2);
  CHECK(r2.batch_log.back().batch_size == 50);
}

TEST_CASE("measured costs drive batch latency when every member has one") {
  Trace t = uniform_trace(4, 0.1);
  for (auto& r : t.records) {
    r.tier1_cost = 0.25;
    r.tier2_cost = 1.0;
  }
  SimConfig cfg;
  cfg.b1 = 2;
  cfg.b2 = 4;
  const SimResult r = simulate(t, 0.5, cfg);
  CHECK(r.makespan == 1.0 + 4.0);
}

TEST_CASE("invalid configs are usage errors") {
  const Trace t = uniform_trace(3, 0.5);
  SimConfig cfg = table_config(1, 1, 0.1, 0.1);
  cfg.b1 = 0;
  CHECK_THROWS_AS(simulate(t, 0.5, cfg), Error);
  cfg.b1 = 1;
  cfg.flush = MaxWait{0.0};
  CHECK_THROWS_AS(simulate(t, 0.5, cfg), Error);
}

TEST_CASE("batch-1 versus optimal batching") {
  SUBCASE("linear latency tables give ratio 1") {
    testgen::Rng rng(44);
    const Trace t = testgen::random_trace(rng, 256, 0);
    CostModel cost{LatencyTable({{1, 0.01}, {16, 0.16}}), LatencyTable({{1, 0.1}, {16, 1.6}})};
    SimConfig b1;
    b1.cost = cost;
    const SimConfig opt = optimal_config(cost);
    const std::vector<double> ts{0.0, 0.3, 0.7, 1.0};
    for (const auto& row : compare_batch1_vs_optimal(t, ts, b1, opt)) {
      CHECK(row.ratio == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  SUBCASE("sublinear tier-1 table helps at high-speedup thresholds") {
    testgen::Rng rng(45);
    const Trace t = testgen::random_trace(rng, 256, 0);
    CostModel cost{LatencyTable({{1, 0.010}, {32, 0.080}}), LatencyTable({{1, 0.1}})};
    SimConfig b1;
    b1.cost = cost;
    const SimConfig opt = optimal_config(cost);
    CHECK(opt.b1 == 32);
    CHECK(opt.b2 == 1);
    const std::vector<double> ts{0.0, 0.1};
    const auto rows = compare_batch1_vs_optimal(t, ts, b1, opt);
    // Closed form at t = 0: 256 * 10ms versus 8 * 80ms.
    CHECK(rows[0].ratio == doctest::Approx((256 * 0.010) / (8 * 0.080)));
    CHECK(rows[1].ratio > 1.0);
  }
  SUBCASE("unbatched config must use batch size 1") {
    const Trace t = uniform_trace(4, 0.5);
    SimConfig bad = table_config(2, 1, 0.1, 0.1);
    const std::vector<double> ts{0.5};
    CHECK_THROWS_AS(compare_batch1_vs_optimal(t, ts, bad, bad), Error);
  }
}

TEST_CASE("batch log CSV") {
  const Trace t = uniform_trace(4, 0.1);
  const SimResult r = simulate(t, 0.5, table_config(2, 4, 0.5, 2.0));
  const auto path = std::filesystem::temp_directory_path() / "cascade_batch_log.csv";
  write_batch_log_csv(r, path);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == "tier,batch_size,start_s,end_s\n1,2,0,0.5\n1,2,0.5,1\n2,4,1,3\n");
}
