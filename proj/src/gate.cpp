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

#include "cascade/gate.hpp"

#include <algorithm>
#include <array>
#include <numeric>

#include "cascade/error.hpp"
#include "cascade/metrics.hpp"

namespace cascade {

namespace {

// Upper bound on confusion-type combinations searched exhaustively.
constexpr double kExactSearchLimit = 2.0e6;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw_usage(std::string(what) + " must lie in [0,1], got " + std::to_string(v));
}

}  // namespace

Decisions decisions_from_mask(const Trace& trace, std::span<const std::uint8_t> escalated) {
  if (escalated.size() != trace.size()) throw_validation("escalation mask does not match trace size");
  Decisions out;
  out.reserve(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& r = trace.records[i];
    const Tier tier = escalated[i] ? Tier::kSecond : Tier::kFirst;
    out.push_back({r.id, escalated[i] != 0, r.pred(tier), r.score(tier)});
  }
  return out;
}

EscalationMask mask_of(const Decisions& decisions) {
  EscalationMask mask(decisions.size());
  for (std::size_t i = 0; i < decisions.size(); ++i) mask[i] = decisions[i].escalated ? 1 : 0;
  return mask;
}

std::size_t escalation_count(std::span<const std::uint8_t> escalated) {
  return static_cast<std::size_t>(std::count_if(escalated.begin(), escalated.end(), [](auto v) { return v != 0; }));
}

EscalationMask threshold_mask(const Trace& trace, double threshold) {
  EscalationMask mask(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) mask[i] = trace.records[i].tier1_confidence < threshold ? 1 : 0;
  return mask;
}

Decisions route_threshold(const Trace& trace, double threshold) {
  check_unit(threshold, "threshold");
  return decisions_from_mask(trace, threshold_mask(trace, threshold));
}

Decisions route_escalate_all(const Trace& trace) {
  return decisions_from_mask(trace, EscalationMask(trace.size(), 1));
}

double random_unit(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t h = splitmix64(splitmix64(seed) ^ (index * 0xD1B54A32D192ED03ULL));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

EscalationMask random_mask(const Trace& trace, double p, std::uint64_t seed) {
  check_unit(p, "escalation probability");
  EscalationMask mask(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) mask[i] = random_unit(seed, i) < p ? 1 : 0;
  return mask;
}

Decisions route_random(const Trace& trace, double p, std::uint64_t seed) {
  return decisions_from_mask(trace, random_mask(trace, p, seed));
}

namespace detail {

namespace {

std::vector<EscalationMask> separable_oracle(const MaskEvaluator& ev, std::span<const std::size_t> budgets) {
  const auto& rows = ev.rows();
  const bool use_correctness = ev.metric().kind == MetricKind::kAccuracy;
  std::vector<std::size_t> order;
  std::vector<double> gain(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    gain[i] = use_correctness ? static_cast<double>(rows[i].correct2) - static_cast<double>(rows[i].correct1)
                              : rows[i].score2 - rows[i].score1;
    if (gain[i] > 0.0) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return gain[a] > gain[b]; });

  std::vector<EscalationMask> out;
  for (std::size_t k : budgets) {
    EscalationMask mask(rows.size(), 0);
    for (std::size_t j = 0; j < std::min(k, order.size()); ++j) mask[order[j]] = 1;
    out.push_back(std::move(mask));
  }
  return out;
}

// Records whose escalation changes the confusion matrix fall into four
// transitions; the matrix depends only on how many of each are escalated.
enum Transition { kFnToTp = 0, kTpToFn = 1, kFpToTn = 2, kTnToFp = 3 };

std::vector<EscalationMask> confusion_oracle(const MaskEvaluator& ev, std::span<const std::size_t> budgets,
                                             bool* approximate) {
  const auto& rows = ev.rows();
  std::array<std::vector<std::size_t>, 4> members;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.pred1_positive == r.pred2_positive) continue;
    if (r.gold_positive) {
      members[r.pred2_positive ? kFnToTp : kTpToFn].push_back(i);
    } else {
      members[r.pred1_positive ? kFpToTn : kTnToFp].push_back(i);
    }
  }

  double space = 1.0;
  for (const auto& m : members) space *= static_cast<double>(m.size() + 1);

  std::vector<EscalationMask> out;
  if (space > kExactSearchLimit) {
    *approximate = true;
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!rows[i].correct1 && rows[i].correct2) order.push_back(i);
    }
    for (std::size_t k : budgets) {
      EscalationMask mask(rows.size(), 0);
      for (std::size_t j = 0; j < std::min(k, order.size()); ++j) mask[order[j]] = 1;
      out.push_back(std::move(mask));
    }
    return out;
  }

  const ConfusionCounts base = ev.confusion(EscalationMask(rows.size(), 0));
  const std::size_t max_total = members[0].size() + members[1].size() + members[2].size() + members[3].size();
  using Combo = std::array<std::size_t, 4>;
  std::vector<double> best_value(max_total + 1, 0.0);
  std::vector<Combo> best_combo(max_total + 1);
  std::vector<bool> seen(max_total + 1, false);

  Combo c{};
  for (c[0] = 0; c[0] <= members[0].size(); ++c[0]) {
    for (c[1] = 0; c[1] <= members[1].size(); ++c[1]) {
      for (c[2] = 0; c[2] <= members[2].size(); ++c[2]) {
        for (c[3] = 0; c[3] <= members[3].size(); ++c[3]) {
          ConfusionCounts counts = base;
          counts.tp = counts.tp + c[kFnToTp] - c[kTpToFn];
          counts.fn = counts.fn - c[kFnToTp] + c[kTpToFn];
          counts.tn = counts.tn + c[kFpToTn] - c[kTnToFp];
          counts.fp = counts.fp - c[kFpToTn] + c[kTnToFp];
          const double value = ev.from_counts(counts);
          const std::size_t s = c[0] + c[1] + c[2] + c[3];
          if (!seen[s] || value > best_value[s]) {
            seen[s] = true;
            best_value[s] = value;
            best_combo[s] = c;
          }
        }
      }
    }
  }

  for (std::size_t k : budgets) {
    std::size_t pick = 0;
    for (std::size_t s = 1; s <= std::min(k, max_total); ++s) {
      if (best_value[s] > best_value[pick]) pick = s;
    }
    EscalationMask mask(rows.size(), 0);
    for (int t = 0; t < 4; ++t) {
      for (std::size_t j = 0; j < best_combo[pick][t]; ++j) mask[members[t][j]] = 1;
    }
    out.push_back(std::move(mask));
  }
  return out;
}

}  // namespace

std::vector<EscalationMask> oracle_masks(const Trace& trace, std::span<const std::size_t> budgets,
                                         const MetricSpec& metric, bool* approximate) {
  for (std::size_t k : budgets) {
    if (k > trace.size()) {
      throw_usage("oracle budget " + std::to_string(k) + " exceeds trace size " + std::to_string(trace.size()));
    }
  }
  const MaskEvaluator ev(trace, metric);
  bool approx = false;
  auto masks = metric.separable() ? separable_oracle(ev, budgets) : confusion_oracle(ev, budgets, &approx);
  if (approximate) *approximate = approx;
  return masks;
}

}  // namespace detail

OracleResult route_oracle(const Trace& trace, std::size_t budget, const MetricSpec& metric) {
  OracleResult result;
  const std::size_t budgets[] = {budget};
  auto masks = detail::oracle_masks(trace, budgets, metric, &result.approximate);
  result.decisions = decisions_from_mask(trace, masks.front());
  return result;
}

OracleResult route_oracle_cost(const Trace& trace, double budget_seconds, const MetricSpec& metric) {
  if (!(budget_seconds >= 0.0)) throw_usage("oracle cost budget must be non-negative");
  for (const auto& r : trace.records) {
    if (!r.tier2_cost) throw_validation("cost-budget oracle needs tier2_cost; record '" + r.id + "' lacks it");
  }
  const MaskEvaluator ev(trace, metric);
  const auto& rows = ev.rows();
  const bool use_correctness = metric.kind != MetricKind::kMeanScore;

  std::vector<std::size_t> order;
  std::vector<double> gain(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    gain[i] = use_correctness ? static_cast<double>(rows[i].correct2) - static_cast<double>(rows[i].correct1)
                              : rows[i].score2 - rows[i].score1;
    if (gain[i] > 0.0) order.push_back(i);
  }
  auto ratio = [&](std::size_t i) {
    const double cost = *trace.records[i].tier2_cost;
    return cost > 0.0 ? gain[i] / cost : std::numeric_limits<double>::infinity();
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ratio(a) > ratio(b); });

  EscalationMask mask(rows.size(), 0);
  double spent = 0.0;
  for (std::size_t i : order) {
    const double cost = *trace.records[i].tier2_cost;
    if (spent + cost <= budget_seconds) {
      spent += cost;
      mask[i] = 1;
    }
  }

  OracleResult result;
  const double first_cost = trace.empty() ? 0.0 : *trace.records.front().tier2_cost;
  const bool uniform = std::all_of(trace.records.begin(), trace.records.end(),
                                   [&](const TraceRecord& r) { return *r.tier2_cost == first_cost; });
  result.approximate = !(metric.separable() && uniform);
  result.decisions = decisions_from_mask(trace, mask);
  return result;
}

}  // namespace cascade
