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

#include <cstdint>
#include <string>

#include "cascade/trace.hpp"

namespace cascade {

/// Synthetic two-population trace: "easy" records get high tier-1
/// confidence and accuracy, "hard" records low confidence and accuracy.
struct FixtureParams {
  double tier1_easy_acc = 0.95;
  double tier1_hard_acc = 0.60;
  double tier2_acc = 0.93;
  double hard_fraction = 0.30;
  /// 0: both populations span the same confidence range (different modes).
  /// 1: easy confidences in [0.75, 1), hard in [0.5, 0.75).
  double confidence_separation = 0.5;
  std::string negative_label = "neg";
  std::string positive_label = "pos";
  /// Emit tier1_score/tier2_score as 0/1 correctness.
  bool with_scores = false;
  /// Per-record measured costs in seconds; 0 leaves the field out.
  double tier1_cost = 0.0;
  double tier2_cost = 0.0;

  void validate() const;
};

/// Deterministic in (n, seed, params). Confidences are max-softmax values of
/// a binary classifier, so they fall in [0.5, 1).
Trace generate_trace(std::size_t n, std::uint64_t seed, const FixtureParams& params = {});

}  // namespace cascade
