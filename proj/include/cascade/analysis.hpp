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

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cascade/trace.hpp"

namespace cascade {

inline constexpr std::size_t kDefaultQuantiles = 5;

struct QuantileCell {
  std::size_t count = 0;
  double min_confidence = 0.0;
  double max_confidence = 0.0;
  // Fractions of the whole trace, not of the quantile.
  double population_fraction = 0.0;
  double ft_fraction = 0.0;
  double tf_fraction = 0.0;
};

/// F-T: tier 1 wrong, tier 2 right. T-F: tier 1 right, tier 2 wrong.
struct QuantileHeatmap {
  std::size_t num_quantiles = 0;
  std::vector<QuantileCell> quantiles;
  double ft_total = 0.0;
  double tf_total = 0.0;
};

/// Splits records, ranked by (tier1_confidence, id) ascending, into
/// contiguous groups whose sizes differ by at most one.
QuantileHeatmap heatmap(const Trace& trace, std::size_t num_quantiles = kDefaultQuantiles);

/// Rows population, F-T, T-F; one column per quantile plus a total.
std::string heatmap_csv(const QuantileHeatmap& map);
void write_heatmap_csv(const QuantileHeatmap& map, const std::filesystem::path& path);

}  // namespace cascade
