// SPDX-License-Identifier: Apache-2.0

#include "protomon/harness.hpp"

#include <httplib.h>

#include <fstream>
#include <map>
#include <set>

namespace protomon {

std::string to_string(const ContentTerm& t) {
  if (t.leaf) return to_display(*t.leaf);
  std::string out = t.functor;
  if (!t.args.empty()) {
    out += "(";
    for (std::size_t i = 0; i < t.args.size(); ++i) {
      if (i) out += ",";
      out += to_string(t.args[i]);
    }
    out += ")";
  }
  return out;
}

namespace {

Record encode_functor(const ContentTerm& term, int depth) {
  if (term.is_leaf()) throw EncodingError("message content must be a functor, not an atom");
  ValueList names{term.functor};
  const ContentTerm* cur = &term;
  while (cur->args.size() == 1 && !cur->args[0].is_leaf()) {
    cur = &cur->args[0];
    names.push_back(cur->functor);
  }
  if (depth + static_cast<int>(names.size()) > 2) {
    throw EncodingError("content '" + to_string(term) + "' is nested more than one level");
  }
  Record rec;
  rec.emplace("name", names.size() == 1 ? Value(names[0]) : Value(std::move(names)));
  for (std::size_t i = 0; i < cur->args.size(); ++i) {
    const ContentTerm& arg = cur->args[i];
    std::string key = "arg" + std::to_string(i + 1);
    if (arg.is_leaf()) {
      rec.emplace(std::move(key), Value(*arg.leaf));
    } else {
      rec.emplace(std::move(key), Value(encode_functor(arg, depth + 1)));
    }
  }
  return rec;
}

BusMessage msg(std::string performative, std::string sender, std::string receiver,
               std::optional<ContentTerm> content) {
  return {std::move(performative), std::move(sender), std::move(receiver), std::move(content)};
}

ContentTerm fn(std::string name, std::vector<ContentTerm> args = {}) {
  return ContentTerm::fn(std::move(name), std::move(args));
}
ContentTerm at(std::string s) { return ContentTerm::atom(std::move(s)); }

// Shared opening of the topic-change scenarios: the operator asks for a
// validation result and the assistant consults validator and optimiser.
std::vector<AgentScript> validation_round(const BusMessage& final_answer) {
  AgentScript op{"operator", {}, {{0, msg("question", "operator", "assistant", fn("getValidationResult"))}}};
  AgentScript assistant{"assistant", {}, {}};
  assistant.rules.push_back({"question", "operator", "getValidationResult",
                             {msg("question", "assistant", "validator",
                                  fn("validate", {at("plan1")}))}});
  assistant.rules.push_back({"assert", "validator", "validation(plan1,valid)",
                             {msg("question", "assistant", "optimiser",
                                  fn("optimise", {at("plan1")}))}});
  assistant.rules.push_back({"assert", "optimiser", "optimised(plan1)", {final_answer}});
  AgentScript validator{"validator", {}, {}};
  validator.rules.push_back({"question", "assistant", "validate(plan1)",
                             {msg("assert", "validator", "assistant",
                                  fn("validation", {at("plan1"), at("valid")}))}});
  AgentScript optimiser{"optimiser", {}, {}};
  optimiser.rules.push_back({"question", "assistant", "optimise(plan1)",
                             {msg("assert", "optimiser", "assistant",
                                  fn("optimised", {at("plan1")}))}});
  return {op, assistant, validator, optimiser};
}

AgentScript& agent(std::vector<AgentScript>& agents, std::string_view name) {
  for (auto& a : agents) {
    if (a.agent == name) return a;
  }
  return agents.emplace_back(AgentScript{std::string(name), {}, {}});
}

std::vector<Scenario> build_scenarios() {
  std::vector<Scenario> out;
  const BusMessage constrained_answer =
      msg("assert", "assistant", "operator",
          fn("answer", {fn("result", {at("p12"), at("bed3")})}));

  {
    Scenario s{"bed_allocation_happy", "topic_change.rml", validation_round(constrained_answer)};
    agent(s.agents, "operator")
        .rules.push_back({"assert", "assistant", "answer(result(p12,bed3))",
                          {msg("question", "operator", "assistant", fn("allocValPatients"))}});
    agent(s.agents, "assistant")
        .rules.push_back({"question", "operator", "allocValPatients",
                          {msg("question", "assistant", "database",
                               fn("allocate", {at("p12"), at("bed3")}))}});
    agent(s.agents, "assistant")
        .rules.push_back({"assert", "database", "allocated(p12,bed3)",
                          {msg("assert", "assistant", "operator", fn("allocation", {at("done")}))}});
    agent(s.agents, "database")
        .rules.push_back({"question", "assistant", "allocate(p12,bed3)",
                          {msg("assert", "database", "assistant",
                               fn("allocated", {at("p12"), at("bed3")}))}});
    out.push_back(std::move(s));
  }
  {
    Scenario s{"topic_change_violation", "topic_change.rml", validation_round(constrained_answer)};
    agent(s.agents, "operator")
        .rules.push_back({"assert", "assistant", "answer(result(p12,bed3))",
                          {msg("question", "operator", "assistant",
                               fn("getPatientInfo", {at("p12")}))}});
    agent(s.agents, "assistant")
        .rules.push_back({"question", "operator", "getPatientInfo(p12)",
                          {msg("assert", "assistant", "operator",
                               fn("patientInfo", {at("p12"), at("stable")}))}});
    out.push_back(std::move(s));
  }
  {
    Scenario s{"unanswered_question", "question_answer.rml", {}};
    agent(s.agents, "operator")
        .steps.push_back({0, msg("question", "operator", "assistant", fn("getValidationResult"))});
    agent(s.agents, "assistant")
        .rules.push_back({"question", "operator", "getValidationResult",
                          {msg("question", "assistant", "database", fn("getBeds", {at("ward3")}))}});
    agent(s.agents, "database")
        .rules.push_back({"question", "assistant", "getBeds(ward3)",
                          {msg("assert", "database", "assistant", fn("beds", {at("ward3"), at("4")}))}});
    agent(s.agents, "assistant")
        .rules.push_back({"assert", "database", "beds(ward3,4)",
                          {msg("assert", "assistant", "operator",
                               fn("answer", {fn("result", {at("p12"), at("bed3")})}))}});
    out.push_back(std::move(s));
  }
  {
    Scenario s{"empty_result_branch", "topic_change.rml", {}};
    auto& op = agent(s.agents, "operator");
    op.steps.push_back({0, msg("question", "operator", "assistant", fn("getValidationResult"))});
    op.rules.push_back({"assert", "assistant", "answer(result)",
                        {msg("question", "operator", "assistant",
                             fn("getValidationResult", {at("plan2")}))}});
    auto& assistant = agent(s.agents, "assistant");
    assistant.rules.push_back({"question", "operator", "getValidationResult",
                               {msg("question", "assistant", "validator",
                                    fn("validate", {at("plan1")}))}});
    assistant.rules.push_back({"assert", "validator", "validation(plan1,invalid)",
                               {msg("assert", "assistant", "operator",
                                    fn("answer", {fn("result")}))}});
    assistant.rules.push_back({"question", "operator", "getValidationResult(plan2)",
                               {msg("question", "assistant", "validator",
                                    fn("validate", {at("plan2")}))}});
    assistant.rules.push_back({"assert", "validator", "validation(plan2,invalid)",
                               {msg("assert", "assistant", "operator",
                                    fn("answer", {fn("result")}))}});
    auto& validator = agent(s.agents, "validator");
    for (const char* plan : {"plan1", "plan2"}) {
      validator.rules.push_back({"question", "assistant", std::string("validate(") + plan + ")",
                                 {msg("assert", "validator", "assistant",
                                      fn("validation", {at(plan), at("invalid")}))}});
    }
    out.push_back(std::move(s));
  }
  return out;
}

constexpr int kMaxTicks = 1000;
constexpr std::string_view kMonitorAgent = "monitor";

}  // namespace

Event encode_event(const BusMessage& m) {
  Record rec;
  rec.emplace("performative", m.performative);
  rec.emplace("sender", m.sender);
  rec.emplace("receiver", m.receiver);
  if (m.content) rec.emplace("content", encode_functor(*m.content, 0));
  return Event(std::move(rec));
}

const std::vector<Scenario>& scenarios() {
  static const std::vector<Scenario> all = build_scenarios();
  return all;
}

const Scenario* find_scenario(std::string_view name) {
  for (const auto& s : scenarios()) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------

struct HttpMonitorLink::Impl {
  explicit Impl(const std::string& endpoint) : client(endpoint) {
    client.set_connection_timeout(5);
    client.set_read_timeout(30);
  }
  httplib::Client client;
};

HttpMonitorLink::HttpMonitorLink(std::string endpoint)
    : impl_(std::make_unique<Impl>(endpoint)), endpoint_(std::move(endpoint)) {
  if (!impl_->client.is_valid()) throw TransportError("invalid endpoint '" + endpoint_ + "'");
}

HttpMonitorLink::~HttpMonitorLink() = default;

namespace {

nlohmann::json checked_json(const httplib::Result& res, const std::string& what, int expected) {
  if (!res) {
    throw TransportError(what + ": " + httplib::to_string(res.error()));
  }
  if (res->status != expected) {
    throw TransportError(what + ": HTTP " + std::to_string(res->status) + " " + res->body);
  }
  auto j = nlohmann::json::parse(res->body, nullptr, false);
  if (j.is_discarded()) throw TransportError(what + ": response is not JSON");
  return j;
}

SubmitReply reply_from_json(const nlohmann::json& j) {
  auto v = verdict_from_string(j.value("verdict", ""));
  if (!v) throw TransportError("monitor replied without a verdict");
  return {*v, j.value("relevant", true), j.value("event_index", std::size_t{0})};
}

}  // namespace

void HttpMonitorLink::open(const std::string& spec_text) {
  auto res = impl_->client.Post("/monitors", nlohmann::json{{"spec", spec_text}}.dump(),
                                "application/json");
  session_ = checked_json(res, "creating monitor at " + endpoint_, 201).at("id").get<std::string>();
}

SubmitReply HttpMonitorLink::submit(const Event& event) {
  auto res = impl_->client.Post("/monitors/" + session_ + "/events", to_json(event).dump(),
                                "application/json");
  return reply_from_json(checked_json(res, "submitting event", 200));
}

void LocalMonitorLink::open(const std::string& spec_text) {
  auto r = service_.create_monitor(nlohmann::json{{"spec", spec_text}}.dump());
  if (r.status != 201) throw TransportError("monitor rejected spec: " + r.body.dump());
  session_ = r.body.at("id").get<std::string>();
}

SubmitReply LocalMonitorLink::submit(const Event& event) {
  auto r = service_.submit_event(session_, to_json(event).dump());
  if (r.status != 200) throw TransportError("monitor rejected event: " + r.body.dump());
  return reply_from_json(r.body);
}

// ---------------------------------------------------------------------------

ScenarioOutcome run_scenario(std::string_view name, const std::string& spec_text,
                             MonitorLink& monitor) {
  const Scenario* scenario = find_scenario(name);
  if (!scenario) throw std::invalid_argument("unknown scenario '" + std::string(name) + "'");

  monitor.open(spec_text);

  std::map<std::string, const AgentScript*> agents;
  for (const auto& a : scenario->agents) agents[a.agent] = &a;
  std::set<std::pair<std::string, std::size_t>> fired;  // (agent, rule index)
  std::set<std::string> warned;
  std::map<int, std::vector<BusMessage>> schedule;
  for (const auto& a : scenario->agents) {
    for (const auto& s : a.steps) schedule[s.tick].push_back(s.message);
  }

  ScenarioOutcome out;
  while (!schedule.empty()) {
    auto node = schedule.extract(schedule.begin());
    int tick = node.key();
    if (tick > kMaxTicks) break;
    for (const auto& m : node.mapped()) {
      // Warned agents stop emitting.
      if (warned.count(m.sender)) continue;

      Event event = encode_event(m);
      SubmitReply reply = monitor.submit(event);
      out.forwarded.push_back(event);
      out.verdicts.push_back(reply.verdict);
      out.transcript.push_back(
          {tick, m, reply.relevant ? std::string(to_string(reply.verdict)) : "skipped"});

      bool fresh_violation = reply.verdict == Verdict::violation &&
                             (out.verdicts.size() < 2 ||
                              out.verdicts[out.verdicts.size() - 2] != Verdict::violation);
      if (fresh_violation) {
        Warning w{out.forwarded.size(), {m.sender, m.receiver}};
        for (const auto& target : w.agents) {
          BusMessage warn{"warn", std::string(kMonitorAgent), target,
                          ContentTerm::fn("violation", {ContentTerm::atom(
                                                           static_cast<double>(w.event_index))})};
          out.transcript.push_back({tick, warn, "warn"});
          warned.insert(target);
        }
        out.warnings.push_back(std::move(w));
      }

      auto it = agents.find(m.receiver);
      if (it == agents.end() || warned.count(m.receiver) || !m.content) continue;
      const std::string content = to_string(*m.content);
      const auto& rules = it->second->rules;
      for (std::size_t i = 0; i < rules.size(); ++i) {
        const auto& r = rules[i];
        if (r.performative != m.performative || r.from != m.sender || r.content != content) continue;
        if (!fired.insert({m.receiver, i}).second) continue;
        auto& next = schedule[tick + 1];
        next.insert(next.end(), r.emit.begin(), r.emit.end());
      }
    }
  }
  return out;
}

std::string render_transcript(const ScenarioOutcome& outcome) {
  std::string out;
  for (const auto& e : outcome.transcript) {
    out += std::to_string(e.tick) + ", " + e.message.performative + ", " + e.message.sender +
           "→" + e.message.receiver + ", " +
           (e.message.content ? to_string(*e.message.content) : "-") + ", " + e.status + "\n";
  }
  return out;
}

void record_trace(const ScenarioOutcome& outcome, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  for (const auto& e : outcome.forwarded) f << to_json(e).dump() << "\n";
  f.flush();
  if (!f) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace protomon
