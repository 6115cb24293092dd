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

#include "cascade/analysis.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "cascade/error.hpp"

namespace cascade {

QuantileHeatmap heatmap(const Trace& trace, std::size_t num_quantiles) {
  if (num_quantiles < 1) throw_usage("number of quantiles must be >= 1");
  if (trace.empty()) throw_validation("trace is empty");
  for (const auto& r : trace.records) {
    if (!r.gold_label) throw_validation("heatmap needs gold labels; record '" + r.id + "' lacks one");
  }

  const std::size_t n = trace.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ra = trace.records[a];
    const auto& rb = trace.records[b];
    if (ra.tier1_confidence != rb.tier1_confidence) return ra.tier1_confidence < rb.tier1_confidence;
    return ra.id < rb.id;
  });

  QuantileHeatmap map;
  map.num_quantiles = num_quantiles;
  const double nd = static_cast<double>(n);
  const std::size_t base = n / num_quantiles;
  const std::size_t extra = n % num_quantiles;
  std::size_t ft_all = 0;
  std::size_t tf_all = 0;
  std::size_t pos = 0;
  for (std::size_t q = 0; q < num_quantiles; ++q) {
    QuantileCell cell;
    cell.count = base + (q < extra ? 1 : 0);
    std::size_t ft = 0;
    std::size_t tf = 0;
    for (std::size_t j = 0; j < cell.count; ++j) {
      const auto& r = trace.records[order[pos + j]];
      const bool right1 = r.tier1_pred == *r.gold_label;
      const bool right2 = r.tier2_pred == *r.gold_label;
      if (!right1 && right2) ++ft;
      if (right1 && !right2) ++tf;
    }
    if (cell.count > 0) {
      cell.min_confidence = trace.records[order[pos]].tier1_confidence;
      cell.max_confidence = trace.records[order[pos + cell.count - 1]].tier1_confidence;
    }
    cell.population_fraction = static_cast<double>(cell.count) / nd;
    cell.ft_fraction = static_cast<double>(ft) / nd;
    cell.tf_fraction = static_cast<double>(tf) / nd;
    ft_all += ft;
    tf_all += tf;
    pos += cell.count;
    map.quantiles.push_back(cell);
  }
  map.ft_total = static_cast<double>(ft_all) / nd;
  map.tf_total = static_cast<double>(tf_all) / nd;
  return map;
}

std::string heatmap_csv(const QuantileHeatmap& map) {
  std::string out = "row";
  for (std::size_t q = 0; q < map.num_quantiles; ++q) out += ",q" + std::to_string(q + 1);
  out += ",total\n";
  char buf[32];
  auto row = [&](const char* name, auto field, double total) {
    out += name;
    for (const auto& cell : map.quantiles) {
      std::snprintf(buf, sizeof(buf), ",%.3f", cell.*field);
      out += buf;
    }
    std::snprintf(buf, sizeof(buf), ",%.3f\n", total);
    out += buf;
  };
  row("population", &QuantileCell::population_fraction, 1.0);
  row("F-T", &QuantileCell::ft_fraction, map.ft_total);
  row("T-F", &QuantileCell::tf_fraction, map.tf_total);
  return out;
}

void write_heatmap_csv(const QuantileHeatmap& map, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_io("cannot open '" + path.string() + "' for writing");
  out << heatmap_csv(map);
  if (!out) throw_io("write failure on '" + path.string() + "'");
}

}  // namespace cascade
