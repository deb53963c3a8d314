// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "protomon/monitor.hpp"

namespace protomon {

struct ServiceReply {
  int status = 200;
  nlohmann::json body;
};

struct LoggedEvent {
  Event event;
  Verdict verdict;
  bool relevant;
};

/// In-memory monitor sessions behind the REST routes. Transport-agnostic so
/// the HTTP layer stays thin. Thread-safe; events to one session apply in a
/// single total order.
class MonitorService {
 public:
  /// Body: raw spec text, a JSON string, or {"spec": "..."}.
  ServiceReply create_monitor(std::string_view body);
  ServiceReply submit_event(std::string_view id, std::string_view body);
  ServiceReply get_monitor(std::string_view id) const;
  ServiceReply delete_monitor(std::string_view id);

  /// Copy of a session's (event, verdict) log; empty if unknown.
  std::vector<LoggedEvent> event_log(std::string_view id) const;
  std::size_t session_count() const;

 private:
  struct Session {
    std::string id;
    std::chrono::system_clock::time_point created_at;
    mutable std::mutex mutex;
    Monitor monitor;
    std::vector<LoggedEvent> log;

    Session(std::string id, std::shared_ptr<const Spec> spec)
        : id(std::move(id)), created_at(std::chrono::system_clock::now()), monitor(std::move(spec)) {}
  };

  std::shared_ptr<Session> find(std::string_view id) const;

  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<Session>> sessions_;
  std::size_t next_id_ = 1;
};

/// Splits "host:port"; throws std::invalid_argument on malformed input.
std::pair<std::string, int> parse_listen_address(std::string_view address);

/// HTTP/1.1 front end for a MonitorService.
class HttpServer {
 public:
  using LogSink = std::function<void(const std::string&)>;

  /// `log` receives one JSON line per request; null disables logging.
  explicit HttpServer(MonitorService& service, LogSink log = {});
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds the socket; port 0 picks a free one. Returns the bound port.
  /// Throws std::runtime_error if the address cannot be bound.
  int bind(const std::string& host, int port);
  /// Serves on a background thread until stop().
  void start();
  /// Serves on the calling thread until stop() from another thread.
  void run();
  void stop();
  int port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace protomon
