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

#include "cascade/gateway.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>
#include <unordered_map>

#include <httplib.h>
#include <json.hpp>

#include "cascade/error.hpp"

namespace cascade {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string_view role_name(BackendRole role) { return role == BackendRole::kTier1 ? "tier1" : "tier2"; }

void BackendDescriptor::set_endpoint(std::string_view endpoint) {
  std::string_view rest = endpoint;
  if (rest.starts_with("http://")) rest.remove_prefix(7);
  if (rest.starts_with("https://")) throw_usage("TLS endpoints are not supported: " + std::string(endpoint));
  std::string_view authority = rest;
  path = "/predict";
  if (auto slash = rest.find('/'); slash != std::string_view::npos) {
    authority = rest.substr(0, slash);
    path = std::string(rest.substr(slash));
  }
  auto colon = authority.rfind(':');
  if (colon == std::string_view::npos) throw_usage("endpoint needs host:port, got '" + std::string(endpoint) + "'");
  host = std::string(authority.substr(0, colon));
  const std::string port_text(authority.substr(colon + 1));
  try {
    std::size_t used = 0;
    port = std::stoi(port_text, &used);
    if (used != port_text.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw_usage("bad port in endpoint '" + std::string(endpoint) + "'");
  }
}

std::string BackendDescriptor::endpoint() const {
  return "http://" + host + ":" + std::to_string(port) + path;
}

void BackendDescriptor::validate() const {
  const std::string who(role_name(role));
  if (host.empty()) throw_usage(who + " backend host is empty");
  if (port < 1 || port > 65535) throw_usage(who + " backend port " + std::to_string(port) + " is invalid");
  if (batch_size < 1) throw_usage(who + " batch_size must be >= 1");
  if (!(timeout > 0.0)) throw_usage(who + " timeout must be > 0");
}

void GatewayConfig::validate() const {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw_usage("threshold must lie in [0,1]");
  if (!(max_wait > 0.0)) throw_usage("max_wait must be > 0");
  if (server_threads < 1 || tier2_workers < 1) throw_usage("thread counts must be >= 1");
  if (listen_port < 0 || listen_port > 65535) throw_usage("listen port is invalid");
  tier1.validate();
  tier2.validate();
}

namespace {

void backend_from_json(const json& obj, BackendDescriptor& b) {
  if (!obj.is_object()) throw_usage(std::string(role_name(b.role)) + " config must be an object");
  if (obj.contains("endpoint")) b.set_endpoint(obj["endpoint"].get<std::string>());
  if (obj.contains("batch_size")) b.batch_size = obj["batch_size"].get<std::size_t>();
  if (obj.contains("timeout_s")) b.timeout = obj["timeout_s"].get<double>();
}

json backend_to_json(const BackendDescriptor& b) {
  return {{"endpoint", b.endpoint()}, {"batch_size", b.batch_size}, {"timeout_s", b.timeout}};
}

}  // namespace

GatewayConfig GatewayConfig::from_json_text(std::string_view text) {
  GatewayConfig c;
  try {
    const json doc = json::parse(text);
    if (!doc.is_object()) throw_usage("gateway config must be an object");
    c.threshold = doc.value("threshold", c.threshold);
    c.max_wait = doc.value("max_wait_s", c.max_wait);
    if (doc.contains("flush")) {
      const auto f = doc["flush"].get<std::string>();
      if (f == "max_wait") c.flush = GatewayFlush::kMaxWait;
      else if (f == "end_of_stream") c.flush = GatewayFlush::kEndOfStream;
      else throw_usage("flush must be 'max_wait' or 'end_of_stream'");
    }
    if (doc.contains("tier2_fallback")) {
      const auto f = doc["tier2_fallback"].get<std::string>();
      if (f == "fail") c.tier2_fallback = Tier2Fallback::kFail;
      else if (f == "degrade") c.tier2_fallback = Tier2Fallback::kDegrade;
      else throw_usage("tier2_fallback must be 'fail' or 'degrade'");
    }
    c.counters_enabled = doc.value("counters_enabled", c.counters_enabled);
    c.listen_host = doc.value("listen_host", c.listen_host);
    c.listen_port = doc.value("listen_port", c.listen_port);
    c.server_threads = doc.value("server_threads", c.server_threads);
    c.tier2_workers = doc.value("tier2_workers", c.tier2_workers);
    if (doc.contains("tier1")) backend_from_json(doc["tier1"], c.tier1);
    if (doc.contains("tier2")) backend_from_json(doc["tier2"], c.tier2);
  } catch (const json::exception& e) {
    throw_usage(std::string("invalid gateway config: ") + e.what());
  }
  return c;
}

std::string GatewayConfig::to_json_text() const {
  json doc = {
      {"threshold", threshold},
      {"max_wait_s", max_wait},
      {"flush", flush == GatewayFlush::kMaxWait ? "max_wait" : "end_of_stream"},
      {"tier2_fallback", tier2_fallback == Tier2Fallback::kFail ? "fail" : "degrade"},
      {"counters_enabled", counters_enabled},
      {"listen_host", listen_host},
      {"listen_port", listen_port},
      {"server_threads", server_threads},
      {"tier2_workers", tier2_workers},
      {"tier1", backend_to_json(tier1)},
      {"tier2", backend_to_json(tier2)},
  };
  return doc.dump(2);
}

std::string GatewayCounters::to_json_text() const {
  auto summary = [](const LatencySummary& s) {
    return json{{"count", s.count}, {"mean_s", s.mean}, {"max_s", s.max}};
  };
  json doc = {
      {"total", total},
      {"escalated", escalated},
      {"answered", answered},
      {"failed", failed},
      {"degraded", degraded},
      {"tier1_batches", tier1_batches},
      {"tier2_batches", tier2_batches},
      {"mean_batch_fill", mean_batch_fill},
      {"per_tier_latency", {{"tier1", summary(tier1_latency)}, {"tier2", summary(tier2_latency)}}},
  };
  return doc.dump();
}

namespace {

struct UpstreamAnswer {
  std::string label;
  double confidence = 0.0;
};

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

template <typename Duration>
Duration to_duration(double seconds) {
  return std::chrono::duration_cast<Duration>(std::chrono::duration<double>(seconds));
}

std::vector<UpstreamAnswer> call_backend(const BackendDescriptor& backend, const json& inputs) {
  httplib::Client client(backend.host, backend.port);
  const auto timeout = to_duration<std::chrono::microseconds>(backend.timeout);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  const std::string who(role_name(backend.role));
  const json body = {{"inputs", inputs}};
  auto res = client.Post(backend.path, body.dump(), "application/json");
  if (!res) throw_upstream(who + " backend " + backend.endpoint() + " unreachable: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw_upstream(who + " backend returned HTTP " + std::to_string(res->status) + ": " + res->body);
  }
  try {
    const json doc = json::parse(res->body);
    const auto& labels = doc.at("labels");
    const auto& confidences = doc.at("confidences");
    if (labels.size() != inputs.size() || confidences.size() != inputs.size()) {
      throw_upstream(who + " backend answered " + std::to_string(labels.size()) + " items for a batch of " +
                     std::to_string(inputs.size()));
    }
    std::vector<UpstreamAnswer> out;
    out.reserve(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      out.push_back({labels[i].get<std::string>(), confidences[i].get<double>()});
    }
    return out;
  } catch (const json::exception& e) {
    throw_upstream(who + " backend sent a malformed response: " + e.what());
  }
}

struct LatencyAccumulator {
  std::size_t count = 0;
  double sum = 0.0;
  double max = 0.0;

  void add(double s) {
    ++count;
    sum += s;
    max = std::max(max, s);
  }
  LatencySummary summary() const { return {count, count ? sum / static_cast<double>(count) : 0.0, max}; }
};

}  // namespace

struct Gateway::Impl {
  struct Pending {
    ClassifyRequest request;
    std::promise<ClassifyResponse> promise;
    Clock::time_point received;
    Clock::time_point enqueued;
    std::string tier1_label;
    double tier1_confidence = 0.0;
  };
  using PendingPtr = std::shared_ptr<Pending>;
  using Batch = std::vector<PendingPtr>;

  explicit Impl(GatewayConfig c) : config(std::move(c)) {
    config.validate();
    tier1_thread = std::thread([this] { tier1_loop(); });
    tier2_thread = std::thread([this] { tier2_loop(); });
    for (std::size_t i = 0; i < config.tier2_workers; ++i) workers.emplace_back([this] { worker_loop(); });
  }

  GatewayConfig config;

  mutable std::mutex mu;
  std::condition_variable tier1_cv;
  std::condition_variable tier2_cv;
  std::condition_variable work_cv;
  std::condition_variable idle_cv;

  std::deque<PendingPtr> tier1_pending;
  bool tier1_busy = false;
  bool tier1_done = false;
  std::deque<PendingPtr> tier2_queue;
  std::deque<Batch> ready;
  bool tier2_done = false;
  bool flush_requested = false;
  bool stopping = false;
  bool stopped = false;

  GatewayCounters counts;
  std::size_t tier2_items = 0;
  LatencyAccumulator tier1_lat;
  LatencyAccumulator tier2_lat;

  std::thread tier1_thread;
  std::thread tier2_thread;
  std::vector<std::thread> workers;

  std::unique_ptr<httplib::Server> server;
  std::thread server_thread;

  void answer(const PendingPtr& p, std::string label, double confidence, int tier, bool degraded) {
    ClassifyResponse r;
    r.id = p->request.id;
    r.label = std::move(label);
    r.confidence = confidence;
    r.tier_used = tier;
    r.degraded = degraded;
    r.latency = seconds_since(p->received);
    {
      std::lock_guard lk(mu);
      ++counts.answered;
      if (degraded) ++counts.degraded;
    }
    p->promise.set_value(std::move(r));
  }

  void fail(const PendingPtr& p, const std::string& message) {
    {
      std::lock_guard lk(mu);
      ++counts.failed;
    }
    p->promise.set_exception(std::make_exception_ptr(Error(ErrorKind::kUpstream, message)));
  }

  static json inputs_of(const Batch& batch) {
    json inputs = json::array();
    for (const auto& p : batch) inputs.push_back({{"id", p->request.id}, {"text", p->request.payload}});
    return inputs;
  }

  void process_tier1(const Batch& batch) {
    const auto started = Clock::now();
    std::vector<UpstreamAnswer> answers;
    try {
      answers = call_backend(config.tier1, inputs_of(batch));
    } catch (const Error& e) {
      {
        std::lock_guard lk(mu);
        tier1_lat.add(seconds_since(started));
      }
      for (const auto& p : batch) fail(p, e.what());
      return;
    }
    {
      std::lock_guard lk(mu);
      tier1_lat.add(seconds_since(started));
    }
    bool queued = false;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto& p = batch[i];
      if (answers[i].confidence >= config.threshold) {
        answer(p, std::move(answers[i].label), answers[i].confidence, 1, false);
        continue;
      }
      p->tier1_label = std::move(answers[i].label);
      p->tier1_confidence = answers[i].confidence;
      std::lock_guard lk(mu);
      p->enqueued = Clock::now();
      tier2_queue.push_back(p);
      ++counts.escalated;
      queued = true;
    }
    if (queued) tier2_cv.notify_all();
  }

  void tier1_loop() {
    for (;;) {
      Batch batch;
      {
        std::unique_lock lk(mu);
        tier1_cv.wait(lk, [&] { return stopping || !tier1_pending.empty(); });
        if (tier1_pending.empty()) break;
        while (!tier1_pending.empty() && batch.size() < config.tier1.batch_size) {
          batch.push_back(std::move(tier1_pending.front()));
          tier1_pending.pop_front();
        }
        tier1_busy = true;
        ++counts.tier1_batches;
      }
      process_tier1(batch);
      {
        std::lock_guard lk(mu);
        tier1_busy = false;
      }
      idle_cv.notify_all();
    }
    {
      std::lock_guard lk(mu);
      tier1_done = true;
    }
    tier2_cv.notify_all();
    idle_cv.notify_all();
  }

  // Caller holds mu.
  void dispatch_locked(std::size_t count) {
    Batch batch;
    for (std::size_t j = 0; j < count; ++j) {
      batch.push_back(std::move(tier2_queue.front()));
      tier2_queue.pop_front();
    }
    ++counts.tier2_batches;
    tier2_items += batch.size();
    ready.push_back(std::move(batch));
    work_cv.notify_one();
  }

  void tier2_loop() {
    const std::size_t b2 = config.tier2.batch_size;
    const auto max_wait = to_duration<Clock::duration>(config.max_wait);
    std::unique_lock lk(mu);
    for (;;) {
      if (tier2_queue.size() >= b2) {
        dispatch_locked(b2);
        continue;
      }
      if (!tier2_queue.empty()) {
        const bool expired = config.flush == GatewayFlush::kMaxWait &&
                             Clock::now() - tier2_queue.front()->enqueued >= max_wait;
        if (flush_requested || expired || tier1_done) {
          dispatch_locked(tier2_queue.size());
          continue;
        }
      } else {
        flush_requested = false;
        if (tier1_done) break;
      }
      if (config.flush == GatewayFlush::kMaxWait && !tier2_queue.empty()) {
        tier2_cv.wait_until(lk, tier2_queue.front()->enqueued + max_wait);
      } else {
        tier2_cv.wait(lk);
      }
    }
    tier2_done = true;
    work_cv.notify_all();
  }

  void process_tier2(const Batch& batch) {
    const auto started = Clock::now();
    try {
      auto answers = call_backend(config.tier2, inputs_of(batch));
      {
        std::lock_guard lk(mu);
        tier2_lat.add(seconds_since(started));
      }
      for (std::size_t i = 0; i < batch.size(); ++i) {
        answer(batch[i], std::move(answers[i].label), answers[i].confidence, 2, false);
      }
    } catch (const Error& e) {
      {
        std::lock_guard lk(mu);
        tier2_lat.add(seconds_since(started));
      }
      for (const auto& p : batch) {
        if (config.tier2_fallback == Tier2Fallback::kDegrade) {
          answer(p, p->tier1_label, p->tier1_confidence, 1, true);
        } else {
          fail(p, e.what());
        }
      }
    }
  }

  void worker_loop() {
    for (;;) {
      Batch batch;
      {
        std::unique_lock lk(mu);
        work_cv.wait(lk, [&] { return tier2_done || !ready.empty(); });
        if (ready.empty()) break;
        batch = std::move(ready.front());
        ready.pop_front();
      }
      process_tier2(batch);
    }
  }

  std::future<ClassifyResponse> submit(ClassifyRequest request) {
    auto p = std::make_shared<Pending>();
    p->request = std::move(request);
    p->received = Clock::now();
    auto future = p->promise.get_future();
    {
      std::lock_guard lk(mu);
      if (stopping) {
        p->promise.set_exception(std::make_exception_ptr(Error(ErrorKind::kUpstream, "gateway is shutting down")));
        return future;
      }
      tier1_pending.push_back(p);
      ++counts.total;
    }
    tier1_cv.notify_one();
    return future;
  }

  void flush() {
    {
      std::unique_lock lk(mu);
      idle_cv.wait(lk, [&] { return tier1_done || (tier1_pending.empty() && !tier1_busy); });
      flush_requested = true;
    }
    tier2_cv.notify_all();
  }

  GatewayCounters snapshot() const {
    std::lock_guard lk(mu);
    GatewayCounters c = counts;
    c.mean_batch_fill =
        counts.tier2_batches ? static_cast<double>(tier2_items) / static_cast<double>(counts.tier2_batches) : 0.0;
    c.tier1_latency = tier1_lat.summary();
    c.tier2_latency = tier2_lat.summary();
    return c;
  }

  void install_routes() {
    server->Post("/classify", [this](const httplib::Request& req, httplib::Response& res) {
      ClassifyRequest request;
      try {
        const json doc = json::parse(req.body);
        request.id = doc.at("id").get<std::string>();
        if (doc.contains("payload")) request.payload = doc["payload"].get<std::string>();
        else if (doc.contains("text")) request.payload = doc["text"].get<std::string>();
      } catch (const json::exception& e) {
        res.status = 400;
        res.set_content(json{{"error", std::string("bad request: ") + e.what()}}.dump(), "application/json");
        return;
      }
      try {
        const ClassifyResponse r = submit(std::move(request)).get();
        json out = {{"id", r.id},
                    {"label", r.label},
                    {"confidence", r.confidence},
                    {"tier_used", r.tier_used},
                    {"latency_s", r.latency}};
        if (r.degraded) out["degraded"] = true;
        res.set_content(out.dump(), "application/json");
      } catch (const Error& e) {
        res.status = 502;
        res.set_content(json{{"error", e.what()}}.dump(), "application/json");
      }
    });
    server->Post("/flush", [this](const httplib::Request&, httplib::Response& res) {
      flush();
      res.set_content(R"({"flushed":true})", "application/json");
    });
    if (config.counters_enabled) {
      server->Get("/counters", [this](const httplib::Request&, httplib::Response& res) {
        res.set_content(snapshot().to_json_text(), "application/json");
      });
    }
    server->Get("/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"status":"ok"})", "application/json");
    });
  }

  int start() {
    if (server) throw_usage("gateway is already serving");
    server = std::make_unique<httplib::Server>();
    const std::size_t threads = config.server_threads;
    server->new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
    install_routes();
    int port = config.listen_port;
    if (port == 0) {
      port = server->bind_to_any_port(config.listen_host);
    } else if (!server->bind_to_port(config.listen_host, port)) {
      port = -1;
    }
    if (port < 0) {
      server.reset();
      throw_io("cannot bind gateway to " + config.listen_host + ":" + std::to_string(config.listen_port));
    }
    server_thread = std::thread([this] { server->listen_after_bind(); });
    return port;
  }

  void stop() {
    {
      std::lock_guard lk(mu);
      if (stopped) return;
      stopped = true;
      stopping = true;
    }
    tier1_cv.notify_all();
    tier2_cv.notify_all();
    if (tier1_thread.joinable()) tier1_thread.join();
    if (tier2_thread.joinable()) tier2_thread.join();
    for (auto& w : workers) {
      if (w.joinable()) w.join();
    }
    if (server) {
      server->stop();
      if (server_thread.joinable()) server_thread.join();
    }
  }
};

Gateway::Gateway(GatewayConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Gateway::~Gateway() { impl_->stop(); }

std::future<ClassifyResponse> Gateway::submit(ClassifyRequest request) { return impl_->submit(std::move(request)); }

ClassifyResponse Gateway::classify(ClassifyRequest request) { return submit(std::move(request)).get(); }

void Gateway::flush() { impl_->flush(); }

GatewayCounters Gateway::counters() const { return impl_->snapshot(); }

const GatewayConfig& Gateway::config() const { return impl_->config; }

int Gateway::start() { return impl_->start(); }

void Gateway::stop() { impl_->stop(); }

struct ReplayBackend::Impl {
  Trace trace;
  BackendRole role;
  std::unordered_map<std::string, std::size_t> index;
  std::unique_ptr<httplib::Server> server;
  std::thread thread;
  int port = -1;
  std::atomic<std::size_t> calls{0};
  std::atomic<std::size_t> items{0};

  std::vector<Answer> lookup(std::span<const std::string> ids) const {
    std::vector<Answer> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
      auto it = index.find(id);
      if (it == index.end()) throw_validation("unknown id '" + id + "'");
      const auto& r = trace.records[it->second];
      if (role == BackendRole::kTier1) {
        out.push_back({r.tier1_pred, r.tier1_confidence});
      } else {
        out.push_back({r.tier2_pred, 1.0});
      }
    }
    return out;
  }

  void handle(const httplib::Request& req, httplib::Response& res) {
    calls.fetch_add(1);
    std::vector<std::string> ids;
    try {
      const json doc = json::parse(req.body);
      for (const auto& input : doc.at("inputs")) {
        ids.push_back(input.is_string() ? input.get<std::string>() : input.at("id").get<std::string>());
      }
    } catch (const json::exception& e) {
      res.status = 400;
      res.set_content(json{{"error", std::string("bad request: ") + e.what()}}.dump(), "application/json");
      return;
    }
    for (const auto& id : ids) {
      if (!index.contains(id)) {
        res.status = 404;
        res.set_content(json{{"error", "not found"}, {"id", id}}.dump(), "application/json");
        return;
      }
    }
    const auto answers = lookup(ids);
    json labels = json::array();
    json confidences = json::array();
    for (const auto& a : answers) {
      labels.push_back(a.label);
      confidences.push_back(a.confidence);
    }
    items.fetch_add(ids.size());
    res.set_content(json{{"labels", labels}, {"confidences", confidences}}.dump(), "application/json");
  }
};

ReplayBackend::ReplayBackend(Trace trace, BackendRole role) : impl_(std::make_unique<Impl>()) {
  validate_trace(trace);
  impl_->trace = std::move(trace);
  impl_->role = role;
  for (std::size_t i = 0; i < impl_->trace.size(); ++i) impl_->index.emplace(impl_->trace.records[i].id, i);
}

ReplayBackend::~ReplayBackend() { stop(); }

std::vector<ReplayBackend::Answer> ReplayBackend::lookup(std::span<const std::string> ids) const {
  return impl_->lookup(ids);
}

int ReplayBackend::start(const std::string& host, int port) {
  if (impl_->server) throw_usage("replay backend is already serving");
  impl_->server = std::make_unique<httplib::Server>();
  impl_->server->Post("/predict",
                      [this](const httplib::Request& req, httplib::Response& res) { impl_->handle(req, res); });
  int bound = port;
  if (port == 0) {
    bound = impl_->server->bind_to_any_port(host);
  } else if (!impl_->server->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) {
    impl_->server.reset();
    throw_io("cannot bind replay backend to " + host + ":" + std::to_string(port));
  }
  impl_->port = bound;
  impl_->thread = std::thread([this] { impl_->server->listen_after_bind(); });
  return bound;
}

void ReplayBackend::stop() {
  if (!impl_ || !impl_->server) return;
  impl_->server->stop();
  if (impl_->thread.joinable()) impl_->thread.join();
  impl_->server.reset();
}

int ReplayBackend::port() const { return impl_->port; }

std::size_t ReplayBackend::calls() const { return impl_->calls.load(); }

std::size_t ReplayBackend::items() const { return impl_->items.load(); }

}  // namespace cascade
