// SPDX-License-Identifier: Apache-2.0

#include "protomon/service.hpp"

#include <httplib.h>

#include <charconv>
#include <stdexcept>

#include "protomon/parser.hpp"

namespace protomon {

namespace {

nlohmann::json diagnostic_json(const Diagnostic& d) {
  return {{"kind", std::string(to_string(d.kind))},
          {"message", d.message},
          {"line", d.loc.line},
          {"column", d.loc.column}};
}

ServiceReply error_reply(int status, std::string message) {
  return {status, {{"error", std::move(message)}}};
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Spec text from a create request body; nullopt if unreadable.
std::optional<std::string> spec_text_from_body(std::string_view body) {
  std::string_view t = trim(body);
  if (t.empty()) return std::nullopt;
  if (t.front() != '{' && t.front() != '"') return std::string(body);
  auto j = nlohmann::json::parse(t, nullptr, /*allow_exceptions=*/false);
  if (j.is_string()) return j.get<std::string>();
  if (j.is_object() && j.contains("spec") && j["spec"].is_string()) {
    return j["spec"].get<std::string>();
  }
  return std::nullopt;
}

nlohmann::json summary(const std::string& id, const Monitor& m) {
  const auto& s = m.state();
  return {{"id", id},
          {"event_index", s.events_consumed},
          {"violation", s.latched_violation},
          {"verdict", std::string(to_string(m.verdict()))}};
}

}  // namespace

ServiceReply MonitorService::create_monitor(std::string_view body) {
  auto text = spec_text_from_body(body);
  if (!text || trim(*text).empty()) return error_reply(400, "request body must contain a spec");

  std::shared_ptr<const Spec> spec;
  try {
    spec = std::make_shared<const Spec>(load_spec(*text));
  } catch (const ParseError& e) {
    return {422, {{"errors", nlohmann::json::array({diagnostic_json(e.diagnostic())})}}};
  } catch (const InvalidSpec& e) {
    auto errors = nlohmann::json::array();
    for (const auto& d : e.errors()) errors.push_back(diagnostic_json(d));
    return {422, {{"errors", std::move(errors)}}};
  }

  std::unique_lock lock(mutex_);
  std::string id = "m-" + std::to_string(next_id_++);
  sessions_.emplace(id, std::make_shared<Session>(id, std::move(spec)));
  return {201, {{"id", id}}};
}

std::shared_ptr<MonitorService::Session> MonitorService::find(std::string_view id) const {
  std::shared_lock lock(mutex_);
  auto it = sessions_.find(std::string(id));
  return it == sessions_.end() ? nullptr : it->second;
}

ServiceReply MonitorService::submit_event(std::string_view id, std::string_view body) {
  auto session = find(id);
  if (!session) return error_reply(404, "no monitor with id '" + std::string(id) + "'");

  Event event;
  try {
    event = event_from_json_text(body);
  } catch (const EventError& e) {
    return error_reply(400, e.what());
  }

  std::lock_guard lock(session->mutex);
  StepResult r = session->monitor.step(event);
  session->log.push_back({event, r.verdict, r.relevant});

  nlohmann::json reply = {{"verdict", std::string(to_string(r.verdict))},
                          {"event_index", r.state.events_consumed},
                          {"violation", r.verdict == Verdict::violation},
                          {"relevant", r.relevant}};
  if (auto first = session->monitor.first_violation()) {
    reply["offending_event"] = to_json(session->log[*first - 1].event);
    reply["offending_index"] = *first;
  }
  return {200, std::move(reply)};
}

ServiceReply MonitorService::get_monitor(std::string_view id) const {
  auto session = find(id);
  if (!session) return error_reply(404, "no monitor with id '" + std::string(id) + "'");
  std::lock_guard lock(session->mutex);
  return {200, summary(session->id, session->monitor)};
}

ServiceReply MonitorService::delete_monitor(std::string_view id) {
  std::unique_lock lock(mutex_);
  auto it = sessions_.find(std::string(id));
  if (it == sessions_.end()) return error_reply(404, "no monitor with id '" + std::string(id) + "'");
  sessions_.erase(it);
  return {200, {{"id", std::string(id)}, {"deleted", true}}};
}

std::vector<LoggedEvent> MonitorService::event_log(std::string_view id) const {
  auto session = find(id);
  if (!session) return {};
  std::lock_guard lock(session->mutex);
  return session->log;
}

std::size_t MonitorService::session_count() const {
  std::shared_lock lock(mutex_);
  return sessions_.size();
}

std::pair<std::string, int> parse_listen_address(std::string_view address) {
  auto colon = address.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw std::invalid_argument("listen address must be host:port, got '" + std::string(address) +
                                "'");
  }
  std::string_view port_text = address.substr(colon + 1);
  int port = -1;
  auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc() || ptr != port_text.data() + port_text.size() || port < 0 ||
      port > 65535) {
    throw std::invalid_argument("invalid port '" + std::string(port_text) + "'");
  }
  return {std::string(address.substr(0, colon)), port};
}

// ---------------------------------------------------------------------------

// Closes a socket that was bound but never listened on.
class OwnedServer : public httplib::Server {
 public:
  ~OwnedServer() override { release(); }
  void release() {
    if (is_running()) return;
    socket_t sock = svr_sock_.exchange(INVALID_SOCKET);
    if (sock != INVALID_SOCKET) ::close(sock);
  }
};

struct HttpServer::Impl {
  OwnedServer server;
};

HttpServer::HttpServer(MonitorService& service, LogSink log) : impl_(std::make_unique<Impl>()) {
  auto& srv = impl_->server;
  // Address reuse only: a second server on a busy port must fail to bind.
  srv.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  auto send = [](httplib::Response& res, const ServiceReply& reply) {
    res.status = reply.status;
    res.set_content(reply.body.dump(), "application/json");
  };

  srv.Post("/monitors", [&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service.create_monitor(req.body));
  });
  srv.Post(R"(/monitors/([^/]+)/events)",
           [&service, send](const httplib::Request& req, httplib::Response& res) {
             send(res, service.submit_event(req.matches[1].str(), req.body));
           });
  srv.Get(R"(/monitors/([^/]+))",
          [&service, send](const httplib::Request& req, httplib::Response& res) {
            send(res, service.get_monitor(req.matches[1].str()));
          });
  srv.Delete(R"(/monitors/([^/]+))",
             [&service, send](const httplib::Request& req, httplib::Response& res) {
               send(res, service.delete_monitor(req.matches[1].str()));
             });
  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      res.set_content(nlohmann::json{{"error", httplib::status_message(res.status)}}.dump(),
                      "application/json");
    }
  });

  if (log) {
    srv.set_logger([log](const httplib::Request& req, const httplib::Response& res) {
      auto now = std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::system_clock::now().time_since_epoch())
                     .count();
      log(nlohmann::json{{"ts_ms", now},
                         {"method", req.method},
                         {"path", req.path},
                         {"status", res.status},
                         {"remote", req.remote_addr}}
              .dump());
    });
  }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  auto& srv = impl_->server;
  if (port == 0) {
    port_ = srv.bind_to_any_port(host);
  } else {
    port_ = srv.bind_to_port(host, port) ? port : -1;
  }
  if (port_ < 0) {
    throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  }
  return port_;
}

void HttpServer::start() {
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
  if (thread_.joinable()) thread_.join();
  if (impl_) impl_->server.release();
}

}  // namespace protomon
