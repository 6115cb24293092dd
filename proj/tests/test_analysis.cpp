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

#include "cascade/analysis.hpp"
#include "cascade/error.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace cascade;

TEST_CASE("identical tiers have no flips") {
  testgen::Rng rng(51);
  Trace t = testgen::random_trace(rng, 100);
  for (auto& r : t.records) r.tier2_pred = r.tier1_pred;
  const QuantileHeatmap h = heatmap(t);
  CHECK(h.ft_total == 0.0);
  CHECK(h.tf_total == 0.0);
  for (const auto& c : h.quantiles) {
    CHECK(c.ft_fraction == 0.0);
    CHECK(c.tf_fraction == 0.0);
  }
}

TEST_CASE("totals match direct counting and do not depend on the quantile count") {
  testgen::Rng rng(52);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = testgen::uniform_int(rng, 1, 300);
    const Trace t = testgen::random_trace(rng, n, i % 2 ? 0 : 4);
    const auto flips = oracle::count_flips(t);
    const double ft = static_cast<double>(flips.ft) / n;
    const double tf = static_cast<double>(flips.tf) / n;
    for (std::size_t q : {1, 2, 3, 5, 10, 17}) {
      const QuantileHeatmap h = heatmap(t, q);
      CHECK(h.ft_total == ft);
      CHECK(h.tf_total == tf);
      REQUIRE(h.quantiles.size() == q);
      double pop = 0, fts = 0, tfs = 0;
      std::size_t count = 0, smallest = n, largest = 0;
      for (const auto& c : h.quantiles) {
        pop += c.population_fraction;
        fts += c.ft_fraction;
        tfs += c.tf_fraction;
        count += c.count;
        smallest = std::min(smallest, c.count);
        largest = std::max(largest, c.count);
      }
      CHECK(count == n);
      CHECK(largest - smallest <= 1);
      CHECK(std::abs(pop - 1.0) <= 1e-9);
      CHECK(std::abs(fts - ft) <= 1e-9);
      CHECK(std::abs(tfs - tf) <= 1e-9);
    }
  }
}

TEST_CASE("quantiles are ordered by confidence then id") {
  Trace t;
  // Equal confidences: id order decides which quantile each lands in.
  for (const char* id : {"d", "b", "c", "a"}) {
    t.records.push_back({.id = id, .gold_label = "x", .tier1_pred = "y", .tier1_confidence = 0.5, .tier2_pred = "x"});
  }
  t.records[3].tier2_pred = "y";  // id "a": no flip
  const QuantileHeatmap h = heatmap(t, 4);
  CHECK(h.quantiles[0].ft_fraction == 0.0);
  for (std::size_t q = 1; q < 4; ++q) CHECK(h.quantiles[q].ft_fraction == 0.25);

  testgen::Rng rng(53);
  const Trace r = testgen::random_trace(rng, 97, 0);
  const QuantileHeatmap h2 = heatmap(r, 7);
  for (std::size_t q = 1; q < 7; ++q) {
    CHECK(h2.quantiles[q].min_confidence >= h2.quantiles[q - 1].max_confidence);
  }
}

TEST_CASE("more quantiles than records leaves empty cells") {
  testgen::Rng rng(54);
  const Trace t = testgen::random_trace(rng, 3);
  const QuantileHeatmap h = heatmap(t, 10);
  std::size_t empty = 0;
  for (const auto& c : h.quantiles) empty += c.count == 0;
  CHECK(empty == 7);
}

TEST_CASE("heatmap CSV") {
  Trace t;
  t.records.push_back({.id = "1", .gold_label = "x", .tier1_pred = "y", .tier1_confidence = 0.1, .tier2_pred = "x"});
  t.records.push_back({.id = "2", .gold_label = "x", .tier1_pred = "x", .tier1_confidence = 0.9, .tier2_pred = "y"});
  t.records.push_back({.id = "3", .gold_label = "x", .tier1_pred = "x", .tier1_confidence = 0.8, .tier2_pred = "x"});
  const std::string csv = heatmap_csv(heatmap(t, 2));
  CHECK(csv ==
        "row,q1,q2,total\n"
        "population,0.667,0.333,1.000\n"
        "F-T,0.333,0.000,0.333\n"
        "T-F,0.000,0.333,0.333\n");
}

TEST_CASE("heatmap input errors") {
  testgen::Rng rng(55);
  Trace t = testgen::random_trace(rng, 5);
  CHECK_THROWS_AS(heatmap(t, 0), Error);
  t.records[2].gold_label.reset();
  t.records[2].tier1_score = 0.5;
  t.records[2].tier2_score = 0.5;
  CHECK_THROWS_AS(heatmap(t), Error);
}
