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

#include "cascade/batchsim.hpp"

#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>

#include "cascade/error.hpp"
#include "cascade/gate.hpp"

namespace cascade {

namespace {

// Neumaier-compensated running sum, so that long batch sequences land on
// the correctly rounded total.
class Timeline {
 public:
  double now() const { return sum_ + compensation_; }

  void advance(double dt) {
    const double t = sum_ + dt;
    if (std::abs(sum_) >= std::abs(dt)) {
      compensation_ += (sum_ - t) + dt;
    } else {
      compensation_ += (dt - t) + sum_;
    }
    sum_ = t;
  }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

class Simulator {
 public:
  Simulator(const Trace& trace, std::span<const std::uint8_t> escalated, const SimConfig& config)
      : trace_(trace), escalated_(escalated), config_(config) {
    result_.completion.resize(trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
      result_.completion[i].id = trace.records[i].id;
      result_.completion[i].escalated = escalated[i] != 0;
    }
  }

  SimResult run() {
    const std::size_t n = trace_.size();
    for (std::size_t start = 0; start < n; start += config_.b1) {
      flush_expired();
      const std::size_t end = std::min(n, start + config_.b1);
      std::vector<std::size_t> members;
      for (std::size_t i = start; i < end; ++i) members.push_back(i);
      const double done = run_batch(Tier::kFirst, members);
      for (std::size_t i : members) {
        result_.completion[i].seconds = done;
        if (escalated_[i]) {
          queue_.push_back({i, done});
          ++result_.escalated;
        }
      }
      while (queue_.size() >= config_.b2) dispatch_tier2(config_.b2);
      flush_expired();
    }
    while (!queue_.empty()) dispatch_tier2(std::min(config_.b2, queue_.size()));

    result_.makespan = clock_.now();
    result_.throughput = result_.makespan > 0.0 ? static_cast<double>(n) / result_.makespan : 0.0;
    return std::move(result_);
  }

 private:
  struct Queued {
    std::size_t index;
    double enqueued_at;
  };

  double batch_cost(Tier tier, const std::vector<std::size_t>& members) const {
    double measured = 0.0;
    bool all_measured = true;
    for (std::size_t i : members) {
      const auto& c = trace_.records[i].cost(tier);
      if (!c) {
        all_measured = false;
        break;
      }
      measured += *c;
    }
    if (all_measured) return measured;
    const auto& model = config_.cost.tier(tier);
    if (!model) {
      throw_validation("no cost model for tier " + std::to_string(static_cast<int>(tier)) +
                       " and the batch lacks measured costs");
    }
    return batch_latency(*model, members.size());
  }

  double run_batch(Tier tier, const std::vector<std::size_t>& members) {
    const double start = clock_.now();
    clock_.advance(batch_cost(tier, members));
    const double end = clock_.now();
    result_.batch_log.push_back({static_cast<int>(tier), members.size(), start, end});
    return end;
  }

  void dispatch_tier2(std::size_t count) {
    std::vector<std::size_t> members;
    for (std::size_t j = 0; j < count; ++j) {
      members.push_back(queue_.front().index);
      queue_.pop_front();
    }
    const double done = run_batch(Tier::kSecond, members);
    for (std::size_t i : members) result_.completion[i].seconds = done;
  }

  void flush_expired() {
    const auto* wait = std::get_if<MaxWait>(&config_.flush);
    if (!wait) return;
    while (!queue_.empty() && clock_.now() - queue_.front().enqueued_at >= wait->timeout) {
      dispatch_tier2(std::min(config_.b2, queue_.size()));
    }
  }

  const Trace& trace_;
  std::span<const std::uint8_t> escalated_;
  const SimConfig& config_;
  Timeline clock_;
  std::deque<Queued> queue_;
  SimResult result_;
};

}  // namespace

void SimConfig::validate() const {
  if (b1 < 1 || b2 < 1) throw_usage("batch sizes must be >= 1");
  if (const auto* w = std::get_if<MaxWait>(&flush); w && !(w->timeout > 0.0)) {
    throw_usage("max-wait timeout must be > 0");
  }
}

SimResult simulate(const Trace& trace, std::span<const std::uint8_t> escalated, const SimConfig& config) {
  config.validate();
  if (trace.empty()) throw_validation("trace is empty");
  if (escalated.size() != trace.size()) throw_validation("escalation mask does not match trace size");
  return Simulator(trace, escalated, config).run();
}

SimResult simulate(const Trace& trace, double threshold, const SimConfig& config) {
  if (!(threshold >= 0.0)) throw_usage("threshold must be >= 0");
  const auto mask = threshold_mask(trace, threshold);
  return simulate(trace, mask, config);
}

std::vector<ThroughputRow> compare_batch1_vs_optimal(const Trace& trace, std::span<const double> thresholds,
                                                     const SimConfig& config_b1, const SimConfig& config_opt) {
  if (config_b1.b1 != 1 || config_b1.b2 != 1) throw_usage("the unbatched config must use b1 = b2 = 1");
  std::vector<ThroughputRow> rows;
  for (double t : thresholds) {
    ThroughputRow row;
    row.threshold = t;
    row.throughput_bs1 = simulate(trace, t, config_b1).throughput;
    row.throughput_opt = simulate(trace, t, config_opt).throughput;
    row.ratio = row.throughput_opt / row.throughput_bs1;
    rows.push_back(row);
  }
  return rows;
}

SimConfig optimal_config(const CostModel& cost, FlushPolicy flush) {
  if (!cost.tier1 || !cost.tier2) throw_validation("optimal batch sizes need cost models for both tiers");
  SimConfig config;
  config.b1 = optimal_batch_size(*cost.tier1);
  config.b2 = optimal_batch_size(*cost.tier2);
  config.cost = cost;
  config.flush = flush;
  return config;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_io("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

void write_batch_log_csv(const SimResult& result, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "tier,batch_size,start_s,end_s\n";
  char buf[128];
  for (const auto& e : result.batch_log) {
    std::snprintf(buf, sizeof(buf), "%d,%zu,%.9g,%.9g\n", e.tier, e.batch_size, e.start, e.end);
    out << buf;
  }
  if (!out) throw_io("write failure on '" + path.string() + "'");
}

void write_completion_csv(const SimResult& result, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "id,escalated,completion_s\n";
  char buf[64];
  for (const auto& c : result.completion) {
    std::snprintf(buf, sizeof(buf), ",%d,%.9g\n", c.escalated ? 1 : 0, c.seconds);
    out << c.id << buf;
  }
  if (!out) throw_io("write failure on '" + path.string() + "'");
}

void write_throughput_csv(const std::vector<ThroughputRow>& rows, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "threshold,throughput_bs1_per_s,throughput_opt_per_s,ratio\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.6g,%.6g,%.6g,%.6g\n", r.threshold, r.throughput_bs1, r.throughput_opt,
                  r.ratio);
    out << buf;
  }
  if (!out) throw_io("write failure on '" + path.string() + "'");
}

}  // namespace cascade
