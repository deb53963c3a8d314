// SPDX-License-Identifier: Apache-2.0

#include "protomon/protomon.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "protomon/harness.hpp"
#include "protomon/monitor.hpp"
#include "protomon/parser.hpp"
#include "protomon/service.hpp"

struct pm_spec {
  std::shared_ptr<const protomon::Spec> spec;
};

struct pm_monitor {
  protomon::Monitor monitor;
};

struct pm_service {
  protomon::MonitorService service;
  std::unique_ptr<protomon::HttpServer> server;
};

namespace {

thread_local std::string g_last_error;

pm_status fail(pm_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

pm_status ok() {
  g_last_error.clear();
  return PM_OK;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

pm_status emit_string(const std::string& s, char** out) {
  *out = dup_string(s);
  return *out ? ok() : fail(PM_ERR_INTERNAL, "out of memory");
}

pm_verdict to_c(protomon::Verdict v) {
  switch (v) {
    case protomon::Verdict::accepting: return PM_ACCEPTING;
    case protomon::Verdict::continuing: return PM_CONTINUING;
    case protomon::Verdict::violation: return PM_VIOLATION;
  }
  return PM_VIOLATION;
}

std::string join_diagnostics(const std::vector<protomon::Diagnostic>& ds) {
  std::string out;
  for (const auto& d : ds) {
    if (!out.empty()) out += "\n";
    out += d.format();
  }
  return out;
}

// Runs `body`, translating library exceptions into status codes.
template <typename F>
pm_status guarded(F&& body) {
  try {
    return body();
  } catch (const protomon::ParseError& e) {
    return fail(PM_ERR_PARSE, e.diagnostic().format());
  } catch (const protomon::InvalidSpec& e) {
    return fail(PM_ERR_INVALID_SPEC, join_diagnostics(e.errors()));
  } catch (const protomon::EventError& e) {
    return fail(PM_ERR_EVENT, e.what());
  } catch (const protomon::TransportError& e) {
    return fail(PM_ERR_TRANSPORT, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(PM_ERR_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PM_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PM_ERR_INTERNAL, "unknown error");
  }
}

#define PM_REQUIRE(cond, what) \
  if (!(cond)) return fail(PM_ERR_ARGUMENT, what)

}  // namespace

extern "C" {

const char* pm_version(void) { return "1.0.0"; }

const char* pm_status_name(pm_status status) {
  switch (status) {
    case PM_OK: return "ok";
    case PM_ERR_ARGUMENT: return "argument";
    case PM_ERR_PARSE: return "parse";
    case PM_ERR_INVALID_SPEC: return "invalid_spec";
    case PM_ERR_EVENT: return "event";
    case PM_ERR_IO: return "io";
    case PM_ERR_TRANSPORT: return "transport";
    case PM_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* pm_verdict_name(pm_verdict verdict) {
  switch (verdict) {
    case PM_ACCEPTING: return "accepting";
    case PM_CONTINUING: return "continuing";
    case PM_VIOLATION: return "violation";
  }
  return "unknown";
}

const char* pm_last_error(void) { return g_last_error.c_str(); }

void pm_string_free(char* s) { std::free(s); }

pm_status pm_spec_load(const char* text, size_t len, pm_spec** out) {
  PM_REQUIRE(out, "out is null");
  *out = nullptr;
  PM_REQUIRE(text || len == 0, "text is null");
  return guarded([&] {
    auto spec = std::make_shared<const protomon::Spec>(
        protomon::load_spec(std::string_view(text ? text : "", len)));
    *out = new pm_spec{std::move(spec)};
    return ok();
  });
}

pm_status pm_spec_load_file(const char* path, pm_spec** out) {
  PM_REQUIRE(out, "out is null");
  *out = nullptr;
  PM_REQUIRE(path, "path is null");
  std::ifstream f(path, std::ios::binary);
  if (!f) return fail(PM_ERR_IO, std::string("cannot read '") + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  std::string text = ss.str();
  return pm_spec_load(text.data(), text.size(), out);
}

void pm_spec_free(pm_spec* spec) { delete spec; }

pm_status pm_spec_diagnostics(const char* text, size_t len, char** json_out) {
  PM_REQUIRE(json_out, "json_out is null");
  *json_out = nullptr;
  PM_REQUIRE(text || len == 0, "text is null");
  return guarded([&] {
    std::vector<protomon::Diagnostic> ds;
    try {
      ds = protomon::validate_spec(protomon::parse_spec(std::string_view(text ? text : "", len)));
    } catch (const protomon::ParseError& e) {
      ds.push_back(e.diagnostic());
    }
    auto arr = nlohmann::json::array();
    for (const auto& d : ds) {
      arr.push_back({{"kind", std::string(protomon::to_string(d.kind))},
                     {"message", d.message},
                     {"line", d.loc.line},
                     {"column", d.loc.column}});
    }
    return emit_string(arr.dump(), json_out);
  });
}

pm_status pm_spec_to_source(const pm_spec* spec, char** out) {
  PM_REQUIRE(out, "out is null");
  *out = nullptr;
  PM_REQUIRE(spec, "spec is null");
  return guarded([&] { return emit_string(protomon::to_source(*spec->spec), out); });
}

pm_status pm_monitor_new(const pm_spec* spec, pm_monitor** out) {
  PM_REQUIRE(out, "out is null");
  *out = nullptr;
  PM_REQUIRE(spec, "spec is null");
  return guarded([&] {
    *out = new pm_monitor{protomon::Monitor(spec->spec)};
    return ok();
  });
}

void pm_monitor_free(pm_monitor* monitor) { delete monitor; }

pm_status pm_monitor_step_json(pm_monitor* monitor, const char* event_json, size_t len,
                               pm_verdict* verdict, int* relevant) {
  PM_REQUIRE(monitor, "monitor is null");
  PM_REQUIRE(event_json || len == 0, "event_json is null");
  return guarded([&] {
    auto event = protomon::event_from_json_text(std::string_view(event_json ? event_json : "", len));
    auto r = monitor->monitor.step(event);
    if (verdict) *verdict = to_c(r.verdict);
    if (relevant) *relevant = r.relevant ? 1 : 0;
    return ok();
  });
}

pm_status pm_monitor_verdict(const pm_monitor* monitor, pm_verdict* verdict) {
  PM_REQUIRE(monitor && verdict, "null argument");
  *verdict = to_c(monitor->monitor.verdict());
  return ok();
}

size_t pm_monitor_events_consumed(const pm_monitor* monitor) {
  return monitor ? monitor->monitor.state().events_consumed : 0;
}

size_t pm_monitor_first_violation(const pm_monitor* monitor) {
  return monitor ? monitor->monitor.first_violation().value_or(0) : 0;
}

pm_status pm_monitor_explain(const pm_monitor* monitor, char** out) {
  PM_REQUIRE(out, "out is null");
  *out = nullptr;
  PM_REQUIRE(monitor, "monitor is null");
  return guarded([&] {
    std::string text;
    for (const auto& t : monitor->monitor.expected()) text += t + "\n";
    return emit_string(text, out);
  });
}

pm_status pm_service_new(pm_service** out) {
  PM_REQUIRE(out, "out is null");
  return guarded([&] {
    *out = new pm_service();
    return ok();
  });
}

void pm_service_free(pm_service* service) { delete service; }

pm_status pm_service_bind(pm_service* service, const char* host, int port, pm_log_fn log,
                          void* log_user, int* bound_port) {
  PM_REQUIRE(service && host, "null argument");
  PM_REQUIRE(!service->server, "service is already bound");
  PM_REQUIRE(port >= 0 && port <= 65535, "port out of range");
  return guarded([&] {
    protomon::HttpServer::LogSink sink;
    if (log) sink = [log, log_user](const std::string& line) { log(line.c_str(), log_user); };
    auto server = std::make_unique<protomon::HttpServer>(service->service, std::move(sink));
    try {
      int p = server->bind(host, port);
      if (bound_port) *bound_port = p;
    } catch (const std::runtime_error& e) {
      return fail(PM_ERR_IO, e.what());
    }
    service->server = std::move(server);
    return ok();
  });
}

pm_status pm_service_start(pm_service* service) {
  PM_REQUIRE(service && service->server, "service is not bound");
  return guarded([&] {
    service->server->start();
    return ok();
  });
}

pm_status pm_service_run(pm_service* service) {
  PM_REQUIRE(service && service->server, "service is not bound");
  return guarded([&] {
    service->server->run();
    return ok();
  });
}

void pm_service_stop(pm_service* service) {
  if (service && service->server) service->server->stop();
}

pm_status pm_sim_scenarios(char** out) {
  PM_REQUIRE(out, "out is null");
  std::string text;
  for (const auto& s : protomon::scenarios()) text += s.name + "\n";
  return emit_string(text, out);
}

pm_status pm_sim_run(const char* scenario, const char* spec_text, size_t spec_len,
                     const char* endpoint, const char* record_path, char** transcript_out,
                     size_t* warnings) {
  PM_REQUIRE(transcript_out, "transcript_out is null");
  *transcript_out = nullptr;
  PM_REQUIRE(scenario && endpoint && (spec_text || spec_len == 0), "null argument");
  return guarded([&] {
    if (!protomon::find_scenario(scenario)) {
      return fail(PM_ERR_ARGUMENT, std::string("unknown scenario '") + scenario + "'");
    }
    protomon::HttpMonitorLink link(endpoint);
    auto outcome =
        protomon::run_scenario(scenario, std::string(spec_text ? spec_text : "", spec_len), link);
    if (record_path) {
      try {
        protomon::record_trace(outcome, record_path);
      } catch (const std::runtime_error& e) {
        return fail(PM_ERR_IO, e.what());
      }
    }
    if (warnings) *warnings = outcome.warnings.size();
    return emit_string(protomon::render_transcript(outcome), transcript_out);
  });
}

}  // extern "C"
