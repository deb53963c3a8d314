// SPDX-License-Identifier: Apache-2.0

// Shared fixtures: event builders, shipped spec loading, the oracle corpus
// and an exhaustive trace walker.

#pragma once

#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "protomon/harness.hpp"
#include "protomon/monitor.hpp"
#include "protomon/oracle.hpp"
#include "protomon/parser.hpp"

namespace protomon::testing {

inline std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline std::string spec_path(const std::string& name) {
  return std::string(PROTOMON_SPEC_DIR) + "/" + name;
}

inline std::string topic_change_text() { return read_text(spec_path("topic_change.rml")); }
inline std::string question_answer_text() { return read_text(spec_path("question_answer.rml")); }

inline std::shared_ptr<const Spec> load(std::string_view text) {
  return std::make_shared<const Spec>(load_spec(text));
}

/// Message event with an optional content record.
inline Event msg(std::string performative, std::string sender, std::string receiver,
                 std::optional<Record> content = std::nullopt) {
  Record r;
  r.emplace("performative", std::move(performative));
  r.emplace("sender", std::move(sender));
  r.emplace("receiver", std::move(receiver));
  if (content) r.emplace("content", std::move(*content));
  return Event(std::move(r));
}

inline Record named(std::string name) {
  Record r;
  r.emplace("name", std::move(name));
  return r;
}

// Topic-change vocabulary.
inline Event tc_question() {
  return msg("question", "operator", "assistant", named("getValidationResult"));
}
inline Event tc_answer_with_result() {
  Record c;
  c.emplace("name", ValueList{std::string("answer"), std::string("result")});
  c.emplace("arg1", "p12");
  c.emplace("arg2", "bed3");
  return msg("assert", "assistant", "operator", c);
}
inline Event tc_empty_answer() {
  Record c;
  c.emplace("name", ValueList{std::string("answer"), std::string("result")});
  return msg("assert", "assistant", "operator", c);
}
inline Event tc_constrained(std::string topic = "allocValPatients") {
  return msg("question", "operator", "assistant", named(std::move(topic)));
}
inline Event tc_off_topic() {
  return msg("question", "operator", "assistant", named("getPatientInfo"));
}
inline Event tc_internal() {
  return msg("question", "assistant", "optimiser", named("optimise"));
}

inline std::vector<Verdict> verdicts_of(const std::shared_ptr<const Spec>& spec,
                                        const std::vector<Event>& trace) {
  Monitor m(spec);
  std::vector<Verdict> out;
  for (const auto& e : trace) out.push_back(m.step(e).verdict);
  return out;
}

/// A spec with a ground alphabet for exhaustive comparison.
struct CorpusEntry {
  std::string name;
  std::string text;
  std::vector<Event> alphabet;
  /// Extra length allowed when deciding whether a prefix still extends to a
  /// member; at least the longest shortest-completion of a prefix of length 4.
  std::size_t slack = 3;
};

inline Event simple(std::string performative, std::string sender = "a",
                    std::string receiver = "b") {
  return msg(std::move(performative), std::move(sender), std::move(receiver));
}

inline const std::string& unit_decls() {
  static const std::string text =
      "p matches {performative:'p'};\n"
      "q matches {performative:'q'};\n"
      "r matches {performative:'r'};\n"
      "s matches {performative:'s'};\n";
  return text;
}

inline std::vector<Event> unit_alphabet() {
  return {simple("p"), simple("q"), simple("r"), simple("s")};
}

inline std::vector<CorpusEntry> oracle_corpus() {
  const std::string parametric =
      "req(x) matches {performative:'req', sender:x};\n"
      "ok(x) matches {performative:'ok', receiver:x};\n"
      "fail(x) matches {performative:'fail', receiver:x};\n"
      "resp(x) matches {performative:'resp', receiver:x};\n";
  std::vector<CorpusEntry> c;
  c.push_back({"topic change spec", topic_change_text(),
               {tc_question(), tc_answer_with_result(), tc_constrained(), tc_empty_answer()}});
  c.push_back({"topic change spec with internal traffic", topic_change_text(),
               {tc_question(), tc_answer_with_result(), tc_empty_answer(), tc_internal()}});
  c.push_back({"question answer spec", question_answer_text(),
               {msg("question", "a", "b"), msg("assert", "b", "a"), msg("question", "b", "a"),
                msg("assert", "a", "b")}});
  c.push_back({"shuffle", unit_decls() + "Main = p | q;", unit_alphabet()});
  c.push_back({"shuffle of stars", unit_decls() + "Main = (p q)* | r*;", unit_alphabet()});
  c.push_back({"intersection", unit_decls() + "Main = (p q*) /\\ (p* q);", unit_alphabet()});
  c.push_back({"union under star", unit_decls() + "Main = (p \\/ q r)* s;", unit_alphabet()});
  c.push_back({"nested star", unit_decls() + "Main = (p q*)* r;", unit_alphabet()});
  c.push_back({"guarded mutual recursion", unit_decls() + "Main = A; A = p B \\/ q; B = r A;",
               unit_alphabet()});
  c.push_back({"recursion under shuffle", unit_decls() + "Main = A | s; A = p A q \\/ r;",
               unit_alphabet(), 6});
  c.push_back({"let under star", parametric + "Main = {let x; req(x) (ok(x) \\/ fail(x))}*;",
               {simple("req", "a"), simple("req", "b"), simple("ok", "z", "a"),
                simple("fail", "z", "b")}});
  c.push_back({"let with shuffle", parametric + "Main = {let x; req(x) | resp(x)}*;",
               {simple("req", "a"), simple("req", "b"), simple("resp", "z", "a"),
                simple("resp", "z", "b")}});
  c.push_back({"let around star",
               "ping(a) matches {performative:'ping', sender:a};\n"
               "pong matches {performative:'pong'};\n"
               "Main = {let a; ping(a)*} | pong*;",
               {simple("ping", "a"), simple("ping", "b"), simple("pong"), simple("other")}});
  c.push_back({"intersection with variables",
               parametric + "Main = {let x; req(x) ok(x)} /\\ {let y; req(y) (fail(y) \\/ ok(y))};",
               {simple("req", "a"), simple("req", "b"), simple("ok", "z", "a"),
                simple("ok", "z", "b")}});
  c.push_back({"free variable in declaration",
               "hello(x) matches {performative:'hello', sender:x};\n"
               "tell matches {performative:'tell', receiver:who};\n"
               "Main = {let who; hello(who) tell*};",
               {simple("hello", "a"), simple("hello", "b"), simple("tell", "z", "a"),
                simple("tell", "z", "b")}});
  c.push_back({"shadowed let",
               "p(x) matches {performative:'p', sender:x};\n"
               "q(x) matches {performative:'q', sender:x};\n"
               "Main = {let x; p(x) {let x; p(x) q(x)} q(x)};",
               {simple("p", "a"), simple("p", "b"), simple("q", "a"), simple("q", "b")}});
  return c;
}

inline TraceSet set_union(const TraceSet& a, const TraceSet& b) {
  TraceSet out = a;
  out.insert(b.begin(), b.end());
  return out;
}

inline TraceSet set_intersection(const TraceSet& a, const TraceSet& b) {
  TraceSet out;
  for (const auto& t : a) {
    if (b.count(t)) out.insert(t);
  }
  return out;
}

// Three operand families A, B, C used for the law checks.
struct LawSpec {
  std::string decls;
  std::string equations;
  std::vector<Event> alphabet;
};

inline std::vector<LawSpec> law_specs() {
  const std::string parametric =
      "req(x) matches {performative:'req', sender:x};\n"
      "ok(x) matches {performative:'ok', receiver:x};\n";
  return {
      {unit_decls(), "A = p q*; B = r \\/ s; C = p | s;", unit_alphabet()},
      {unit_decls(), "A = (p \\/ q)*; B = q r; C = s*;", unit_alphabet()},
      {unit_decls(), "A = p B \\/ q; B = r A \\/ s; C = (p r)*;", unit_alphabet()},
      {parametric, "A = {let x; req(x) ok(x)}*; B = {let y; req(y)}; C = {let z; ok(z)}*;",
       {simple("req", "a"), simple("req", "b"), simple("ok", "z", "a"), simple("ok", "z", "b")}},
  };
}

/// Calls `visit` for every trace of length <= max_len over `n` symbols.
inline void for_each_trace(std::size_t n, std::size_t max_len,
                           const std::function<void(const Trace&)>& visit) {
  Trace t;
  std::function<void()> rec = [&] {
    visit(t);
    if (t.size() == max_len) return;
    for (std::size_t i = 0; i < n; ++i) {
      t.push_back(i);
      rec();
      t.pop_back();
    }
  };
  rec();
}

inline bool has_extension(const TraceSet& language, const Trace& prefix) {
  auto it = language.lower_bound(prefix);
  return it != language.end() && it->size() >= prefix.size() &&
         std::equal(prefix.begin(), prefix.end(), it->begin());
}

/// Result of comparing the online monitor with the oracle on one entry.
struct OracleComparison {
  std::size_t traces_checked = 0;
  std::vector<std::string> mismatches;
};

/// Walks every trace of length <= max_len and checks the final verdict:
/// accepting iff the relevant subsequence is a member, violation iff it
/// extends to no member within max_len + slack.
inline OracleComparison compare_with_oracle(const CorpusEntry& entry, std::size_t max_len = 4) {
  const std::size_t slack = entry.slack;
  auto spec = load(entry.text);
  TraceSet language = enumerate_traces(*spec, entry.alphabet, max_len + slack);
  std::vector<bool> relevant;
  for (const auto& e : entry.alphabet) relevant.push_back(is_relevant(spec->decls, e));

  OracleComparison out;
  for_each_trace(entry.alphabet.size(), max_len, [&](const Trace& t) {
    MonitorState state = new_monitor(*spec);
    Verdict v = verdict_of(state, *spec);
    Trace filtered;
    for (auto i : t) {
      auto r = step(state, entry.alphabet[i], *spec);
      state = std::move(r.state);
      v = r.verdict;
      if (relevant[i]) filtered.push_back(i);
    }
    bool member = language.count(filtered) > 0;
    bool extensible = has_extension(language, filtered);
    Verdict expected = member ? Verdict::accepting
                              : (extensible ? Verdict::continuing : Verdict::violation);
    ++out.traces_checked;
    if (v != expected) {
      std::string s = entry.name + ": trace [";
      for (std::size_t k = 0; k < t.size(); ++k) s += (k ? "," : "") + std::to_string(t[k]);
      s += "] monitor=" + std::string(to_string(v)) + " oracle=" + std::string(to_string(expected));
      out.mismatches.push_back(std::move(s));
    }
  });
  return out;
}

}  // namespace protomon::testing
