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

#include "cascade/fixtures.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "cascade/error.hpp"

namespace cascade {

namespace {

bool is_probability(double v) { return v >= 0.0 && v <= 1.0; }

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  // Built from raw engine bits rather than std:: distributions, whose
  // output differs between standard library implementations.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }

  // Kumaraswamy(a, b) by inverse CDF: unimodal on [0,1] for a, b > 1.
  double kumaraswamy(double a, double b) {
    const double u = uniform();
    return std::pow(1.0 - std::pow(1.0 - u, 1.0 / b), 1.0 / a);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace

void FixtureParams::validate() const {
  if (!is_probability(tier1_easy_acc) || !is_probability(tier1_hard_acc) || !is_probability(tier2_acc) ||
      !is_probability(hard_fraction) || !is_probability(confidence_separation)) {
    throw_usage("fixture probabilities must lie in [0,1]");
  }
  if (negative_label.empty() || positive_label.empty() || negative_label == positive_label) {
    throw_usage("fixture labels must be two distinct non-empty strings");
  }
  if (!(tier1_cost >= 0.0) || !(tier2_cost >= 0.0)) throw_usage("fixture costs must be non-negative");
}

Trace generate_trace(std::size_t n, std::uint64_t seed, const FixtureParams& params) {
  if (n < 1) throw_usage("fixture size must be >= 1");
  params.validate();

  Stream rng(seed);
  const double s = params.confidence_separation;
  const double easy_lo = 0.5 + 0.25 * s;
  const double easy_hi = 1.0;
  const double hard_lo = 0.5;
  const double hard_hi = 1.0 - 0.25 * s;

  const std::size_t width = std::max<std::size_t>(6, std::to_string(n == 0 ? 0 : n - 1).size());
  Trace trace;
  trace.metadata.dataset = "synthetic";
  trace.metadata.tier1_model = "fixture-tier1";
  trace.metadata.tier2_model = "fixture-tier2";
  trace.records.reserve(n);

  for (std::size_t i = 0; i < n; ++i) {
    const bool gold_pos = rng.bernoulli(0.5);
    const bool hard = rng.bernoulli(params.hard_fraction);
    const bool right1 = rng.bernoulli(hard ? params.tier1_hard_acc : params.tier1_easy_acc);
    const bool right2 = rng.bernoulli(params.tier2_acc);
    const double x = hard ? rng.kumaraswamy(2.0, 5.0) : rng.kumaraswamy(5.0, 2.0);
    const double lo = hard ? hard_lo : easy_lo;
    const double hi = hard ? hard_hi : easy_hi;
    double conf = lo + x * (hi - lo);
    if (conf >= hi) conf = std::nextafter(hi, lo);

    const std::string& gold = gold_pos ? params.positive_label : params.negative_label;
    const std::string& other = gold_pos ? params.negative_label : params.positive_label;

    std::string digits = std::to_string(i);
    std::string id = "fx-" + std::string(width - std::min<std::size_t>(width, digits.size()), '0') + digits;
    TraceRecord r;
    r.id = id;
    r.gold_label = gold;
    r.tier1_pred = right1 ? gold : other;
    r.tier1_confidence = conf;
    r.tier2_pred = right2 ? gold : other;
    if (params.with_scores) {
      r.tier1_score = right1 ? 1.0 : 0.0;
      r.tier2_score = right2 ? 1.0 : 0.0;
    }
    if (params.tier1_cost > 0.0) r.tier1_cost = params.tier1_cost;
    if (params.tier2_cost > 0.0) r.tier2_cost = params.tier2_cost;
    trace.records.push_back(std::move(r));
  }
  return trace;
}

}  // namespace cascade
