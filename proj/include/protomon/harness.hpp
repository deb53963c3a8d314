// SPDX-License-Identifier: Apache-2.0

// Simulated message bus for the bed-allocation agents. Scripted agents talk
// over a tick-ordered bus; a sniffer forwards every message to a monitor and
// a monitor agent warns both parties of any message the monitor rejects.

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "protomon/monitor.hpp"
#include "protomon/service.hpp"

namespace protomon {

/// Message content: a functor applied to arguments, or an atom leaf.
struct ContentTerm {
  std::string functor;
  std::vector<ContentTerm> args;
  std::optional<Atom> leaf;

  static ContentTerm atom(Atom a) { return {{}, {}, std::move(a)}; }
  static ContentTerm fn(std::string name, std::vector<ContentTerm> args = {}) {
    return {std::move(name), std::move(args), std::nullopt};
  }
  bool is_leaf() const { return leaf.has_value(); }
  bool operator==(const ContentTerm&) const = default;
};

std::string to_string(const ContentTerm& t);

struct BusMessage {
  std::string performative;  // question | assert | warn
  std::string sender;
  std::string receiver;
  std::optional<ContentTerm> content;

  bool operator==(const BusMessage&) const = default;
};

class EncodingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flattens a message into a monitor event. A functor chain f(g(x, y))
/// becomes name:['f','g'], arg1:x, arg2:y; chains deeper than two throw.
Event encode_event(const BusMessage& msg);

struct ReactiveRule {
  std::string performative;
  std::string from;
  std::string content;  // exact to_string() of the incoming content
  std::vector<BusMessage> emit;
};

struct ProactiveStep {
  int tick;
  BusMessage message;
};

/// Table-driven agent. Each reactive rule fires at most once.
struct AgentScript {
  std::string agent;
  std::vector<ReactiveRule> rules;
  std::vector<ProactiveStep> steps;
};

struct Scenario {
  std::string name;
  std::string intended_spec;  // shipped spec file the scenario targets
  std::vector<AgentScript> agents;
};

const std::vector<Scenario>& scenarios();
const Scenario* find_scenario(std::string_view name);

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SubmitReply {
  Verdict verdict;
  bool relevant;
  std::size_t event_index;
};

/// Where the sniffer sends events.
class MonitorLink {
 public:
  virtual ~MonitorLink() = default;
  /// Creates a monitor session for `spec_text`.
  virtual void open(const std::string& spec_text) = 0;
  virtual SubmitReply submit(const Event& event) = 0;
};

/// Talks to a monitor service over HTTP, e.g. "http://127.0.0.1:8087".
class HttpMonitorLink : public MonitorLink {
 public:
  explicit HttpMonitorLink(std::string endpoint);
  ~HttpMonitorLink() override;
  void open(const std::string& spec_text) override;
  SubmitReply submit(const Event& event) override;
  const std::string& session_id() const { return session_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string endpoint_;
  std::string session_;
};

/// Calls a MonitorService directly, without a socket.
class LocalMonitorLink : public MonitorLink {
 public:
  explicit LocalMonitorLink(MonitorService& service) : service_(service) {}
  void open(const std::string& spec_text) override;
  SubmitReply submit(const Event& event) override;

 private:
  MonitorService& service_;
  std::string session_;
};

struct TranscriptEntry {
  int tick;
  BusMessage message;
  std::string status;  // verdict name, "skipped" or "warn"
};

struct Warning {
  std::size_t event_index;  // 1-based index among forwarded events
  std::vector<std::string> agents;
};

struct ScenarioOutcome {
  std::vector<TranscriptEntry> transcript;
  std::vector<Event> forwarded;
  std::vector<Verdict> verdicts;
  std::vector<Warning> warnings;
};

/// Drives the bus until it is quiet. Throws std::invalid_argument for an
/// unknown scenario and TransportError if the monitor cannot be reached.
ScenarioOutcome run_scenario(std::string_view name, const std::string& spec_text,
                             MonitorLink& monitor);

/// "tick, performative, sender→receiver, content, status" per line.
std::string render_transcript(const ScenarioOutcome& outcome);

/// Forwarded events as JSON lines. Throws std::runtime_error on I/O failure.
void record_trace(const ScenarioOutcome& outcome, const std::filesystem::path& path);

}  // namespace protomon
