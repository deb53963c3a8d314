// SPDX-License-Identifier: Apache-2.0

// protomon command-line front end. Uses only the C interface.

#include <CLI11.hpp>

#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>

#include "protomon/protomon.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitError = 2;

struct SpecDeleter {
  void operator()(pm_spec* s) const { pm_spec_free(s); }
};
struct MonitorDeleter {
  void operator()(pm_monitor* m) const { pm_monitor_free(m); }
};
struct ServiceDeleter {
  void operator()(pm_service* s) const { pm_service_free(s); }
};
struct StringDeleter {
  void operator()(char* s) const { pm_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

int report_error(const std::string& context) {
  std::cerr << "protomon: " << context << "\n";
  return kExitError;
}

// Prefixes every diagnostic line with the file name.
int report_spec_error(const std::string& path) {
  std::istringstream lines(pm_last_error());
  std::string line;
  while (std::getline(lines, line)) std::cerr << path << ":" << line << "\n";
  return kExitError;
}

bool read_file(const std::string& path, std::string& out) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return false;
  std::ostringstream ss;
  ss << f.rdbuf();
  out = ss.str();
  return !f.bad();
}

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

struct CheckOptions {
  std::string spec_path;
  std::string trace_path;
  bool quiet = false;
  bool explain = false;
};

int run_check(const CheckOptions& opt) {
  pm_spec* raw_spec = nullptr;
  pm_status st = pm_spec_load_file(opt.spec_path.c_str(), &raw_spec);
  if (st == PM_ERR_PARSE || st == PM_ERR_INVALID_SPEC) return report_spec_error(opt.spec_path);
  if (st != PM_OK) return report_error(pm_last_error());
  std::unique_ptr<pm_spec, SpecDeleter> spec(raw_spec);

  std::ifstream trace(opt.trace_path, std::ios::binary);
  if (!trace) return report_error("cannot read '" + opt.trace_path + "'");

  pm_monitor* raw_monitor = nullptr;
  if (pm_monitor_new(spec.get(), &raw_monitor) != PM_OK) return report_error(pm_last_error());
  std::unique_ptr<pm_monitor, MonitorDeleter> monitor(raw_monitor);

  std::string line;
  std::size_t line_no = 0;
  std::size_t index = 0;
  while (std::getline(trace, line)) {
    ++line_no;
    if (blank(line)) continue;
    pm_verdict verdict = PM_CONTINUING;
    int relevant = 0;
    if (pm_monitor_step_json(monitor.get(), line.data(), line.size(), &verdict, &relevant) !=
        PM_OK) {
      return report_error(opt.trace_path + ":" + std::to_string(line_no) + ": " + pm_last_error());
    }
    ++index;
    if (!opt.quiet) {
      std::cout << "#" << index << "\t" << (relevant ? "relevant" : "skipped") << "\t"
                << pm_verdict_name(verdict) << "\n";
    }
  }
  if (trace.bad()) return report_error("failed reading '" + opt.trace_path + "'");

  pm_verdict final_verdict = PM_CONTINUING;
  pm_monitor_verdict(monitor.get(), &final_verdict);
  std::cout << "RESULT " << pm_verdict_name(final_verdict) << " after " << index << " events\n";

  if (final_verdict != PM_VIOLATION) return kExitOk;
  std::cout << "VIOLATION at event " << pm_monitor_first_violation(monitor.get()) << "\n";
  if (opt.explain) {
    char* raw = nullptr;
    if (pm_monitor_explain(monitor.get(), &raw) == PM_OK) {
      OwnedString expected(raw);
      std::istringstream types(expected.get());
      std::string t;
      bool any = false;
      while (std::getline(types, t)) {
        std::cout << "EXPECTED " << t << "\n";
        any = true;
      }
      if (!any) std::cout << "EXPECTED nothing\n";
    }
  }
  return kExitViolation;
}

struct SimOptions {
  std::string scenario;
  std::string spec_path;
  std::string endpoint;
  std::string record_path;
};

int run_sim(const SimOptions& opt) {
  std::string spec_text;
  if (!read_file(opt.spec_path, spec_text)) return report_error("cannot read '" + opt.spec_path + "'");
  pm_spec* raw_spec = nullptr;
  pm_status st = pm_spec_load(spec_text.data(), spec_text.size(), &raw_spec);
  if (st != PM_OK) return report_spec_error(opt.spec_path);
  pm_spec_free(raw_spec);

  char* raw = nullptr;
  std::size_t warnings = 0;
  st = pm_sim_run(opt.scenario.c_str(), spec_text.data(), spec_text.size(), opt.endpoint.c_str(),
                  opt.record_path.empty() ? nullptr : opt.record_path.c_str(), &raw, &warnings);
  if (st != PM_OK) return report_error(pm_last_error());
  OwnedString transcript(raw);
  std::cout << transcript.get();
  return warnings == 0 ? kExitOk : kExitViolation;
}

volatile std::sig_atomic_t g_stop = 0;
void on_signal(int) { g_stop = 1; }

std::mutex g_log_mutex;
void log_line(const char* line, void*) {
  std::lock_guard lock(g_log_mutex);
  std::cout << line << std::endl;
}

int run_serve(const std::string& listen) {
  auto colon = listen.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    return report_error("--listen must be host:port, got '" + listen + "'");
  }
  int port = -1;
  try {
    std::size_t used = 0;
    port = std::stoi(listen.substr(colon + 1), &used);
    if (used != listen.size() - colon - 1) port = -1;
  } catch (const std::exception&) {
    port = -1;
  }
  if (port < 0 || port > 65535) return report_error("invalid port in '" + listen + "'");
  std::string host = listen.substr(0, colon);

  pm_service* raw = nullptr;
  if (pm_service_new(&raw) != PM_OK) return report_error(pm_last_error());
  std::unique_ptr<pm_service, ServiceDeleter> service(raw);
  int bound = 0;
  if (pm_service_bind(service.get(), host.c_str(), port, log_line, nullptr, &bound) != PM_OK) {
    return report_error(pm_last_error());
  }
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  if (pm_service_start(service.get()) != PM_OK) return report_error(pm_last_error());
  std::cerr << "protomon: listening on " << host << ":" << bound << std::endl;
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  pm_service_stop(service.get());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"protomon: runtime verification of agent interaction protocols"};
  app.set_version_flag("--version", std::string(pm_version()));
  app.require_subcommand(1);

  CheckOptions check;
  auto* check_cmd = app.add_subcommand("check", "Replay a JSON-lines trace against a spec");
  check_cmd->add_option("--spec", check.spec_path, "Spec file (.rml)")->required();
  check_cmd->add_option("--trace", check.trace_path, "Trace file, one JSON event per line")
      ->required();
  check_cmd->add_flag("--quiet", check.quiet, "Print only the summary");
  check_cmd->add_flag("--explain", check.explain,
                      "On violation, list the event types that would have been accepted");

  SimOptions sim;
  auto* sim_cmd = app.add_subcommand("sim", "Run a scripted agent scenario against a monitor service");
  sim_cmd->add_option("--scenario", sim.scenario, "Scenario name")->required();
  sim_cmd->add_option("--spec", sim.spec_path, "Spec file (.rml)")->required();
  sim_cmd->add_option("--endpoint", sim.endpoint, "Monitor service URL, e.g. http://127.0.0.1:8087")
      ->required();
  sim_cmd->add_option("--record", sim.record_path, "Write forwarded events as JSON lines");

  std::string listen = "127.0.0.1:8087";
  auto* serve_cmd = app.add_subcommand("serve", "Run the monitor REST service");
  serve_cmd->add_option("--listen", listen, "host:port")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  if (*check_cmd) return run_check(check);
  if (*sim_cmd) return run_sim(sim);
  if (*serve_cmd) return run_serve(listen);
  return kExitError;
}
