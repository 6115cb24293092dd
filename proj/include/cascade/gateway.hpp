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

#include <cstddef>
#include <future>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cascade/trace.hpp"

namespace cascade {

enum class BackendRole { kTier1, kTier2 };

std::string_view role_name(BackendRole role);

/// Upstream model server speaking the predict protocol:
/// POST {path} {"inputs": [{"id": ..., "text": ...}, ...]}
///   -> {"labels": [...], "confidences": [...]}
struct BackendDescriptor {
  std::string host = "127.0.0.1";
  int port = 0;
  std::string path = "/predict";
  std::size_t batch_size = 1;
  double timeout = 5.0;
  BackendRole role = BackendRole::kTier1;

  /// Accepts "http://host:port/path"; scheme and path are optional.
  void set_endpoint(std::string_view endpoint);
  std::string endpoint() const;
  void validate() const;
};

enum class GatewayFlush { kMaxWait, kEndOfStream };
enum class Tier2Fallback { kFail, kDegrade };

struct GatewayConfig {
  double threshold = 0.5;
  BackendDescriptor tier1{.role = BackendRole::kTier1};
  BackendDescriptor tier2{.role = BackendRole::kTier2};
  /// Bound on how long an escalated request waits for its tier-2 batch.
  double max_wait = 0.1;
  /// kEndOfStream dispatches partial tier-2 batches only on flush() or stop().
  GatewayFlush flush = GatewayFlush::kMaxWait;
  Tier2Fallback tier2_fallback = Tier2Fallback::kFail;
  bool counters_enabled = true;
  std::string listen_host = "127.0.0.1";
  int listen_port = 8080;
  std::size_t server_threads = 64;
  std::size_t tier2_workers = 4;

  void validate() const;
  /// Missing keys keep their defaults.
  static GatewayConfig from_json_text(std::string_view text);
  std::string to_json_text() const;
};

struct ClassifyRequest {
  std::string id;
  std::string payload;
};

struct ClassifyResponse {
  std::string id;
  std::string label;
  /// Confidence reported by the tier that produced the label.
  double confidence = 0.0;
  int tier_used = 1;
  double latency = 0.0;
  /// Tier 2 failed and the tier-1 answer was returned instead.
  bool degraded = false;
};

struct LatencySummary {
  std::size_t count = 0;
  double mean = 0.0;
  double max = 0.0;
};

struct GatewayCounters {
  std::size_t total = 0;
  std::size_t escalated = 0;
  std::size_t answered = 0;
  std::size_t failed = 0;
  std::size_t degraded = 0;
  std::size_t tier1_batches = 0;
  std::size_t tier2_batches = 0;
  double mean_batch_fill = 0.0;
  LatencySummary tier1_latency;
  LatencySummary tier2_latency;

  std::string to_json_text() const;
};

/// Two-tier cascade service. Requests are micro-batched to tier 1; those
/// below the confidence threshold queue for tier 2, which is dispatched in
/// batches of tier2.batch_size (or earlier per the flush policy).
class Gateway {
 public:
  explicit Gateway(GatewayConfig config);
  ~Gateway();

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  /// In-process entry point; the HTTP front end uses it too. The future
  /// holds an Error(kUpstream) on backend failure.
  std::future<ClassifyResponse> submit(ClassifyRequest request);
  ClassifyResponse classify(ClassifyRequest request);

  /// Waits for the tier-1 stage to go idle, then dispatches every queued
  /// escalation. This is the end-of-stream signal.
  void flush();

  GatewayCounters counters() const;
  const GatewayConfig& config() const;

  /// Serves POST /classify, POST /flush and GET /counters. Returns the bound
  /// port (config.listen_port 0 picks a free one).
  int start();
  /// Stops the HTTP server, answers all queued requests, and joins workers.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Backend that answers from a trace by record id: the stored tier-1
/// prediction and confidence, or the stored tier-2 prediction (confidence
/// reported as 1, since traces carry no tier-2 confidence).
class ReplayBackend {
 public:
  ReplayBackend(Trace trace, BackendRole role);
  ~ReplayBackend();

  ReplayBackend(const ReplayBackend&) = delete;
  ReplayBackend& operator=(const ReplayBackend&) = delete;

  struct Answer {
    std::string label;
    double confidence = 0.0;
  };

  /// Throws Error(kValidation) naming the first unknown id.
  std::vector<Answer> lookup(std::span<const std::string> ids) const;

  int start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();
  int port() const;

  /// Predict calls served and items answered, for tests and diagnostics.
  std::size_t calls() const;
  std::size_t items() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cascade
