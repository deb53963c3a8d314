// SPDX-License-Identifier: Apache-2.0

// Runs the protomon binary as a subprocess.

#include <doctest.h>
#include <httplib.h>

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "protomon/service.hpp"
#include "support.hpp"

using namespace protomon;
using namespace protomon::testing;

namespace {

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

std::filesystem::path scratch() {
  static std::filesystem::path dir = [] {
    auto d = std::filesystem::temp_directory_path() /
             ("protomon_cli_" + std::to_string(::getpid()));
    std::filesystem::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write_file(const std::string& name, const std::string& content) {
  auto p = scratch() / name;
  std::ofstream(p, std::ios::binary) << content;
  return p.string();
}

std::string write_trace(const std::string& name, const std::vector<Event>& events) {
  std::string text;
  for (const auto& e : events) text += to_json(e).dump() + "\n";
  return write_file(name, text);
}

RunResult run(const std::string& args) {
  auto err_path = scratch() / "stderr.txt";
  std::string cmd = std::string(PROTOMON_CLI) + " " + args + " 2>" + err_path.string();
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe);
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  int status = ::pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out, read_text(err_path.string())};
}

std::string spec_arg(const std::string& name) { return "--spec " + spec_path(name); }

// Verdict column of the per-event lines.
std::vector<std::string> verdict_column(const std::string& out) {
  std::vector<std::string> v;
  std::istringstream lines(out);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] != '#') continue;
    v.push_back(line.substr(line.rfind('\t') + 1));
  }
  return v;
}

}  // namespace

TEST_CASE("check: documented examples") {
  SUBCASE("question then answer") {
    auto trace = write_trace("qa.jsonl", {msg("question", "operator", "assistant"),
                                          msg("assert", "assistant", "operator")});
    auto r = run("check " + spec_arg("question_answer.rml") + " --trace " + trace);
    CHECK(r.exit_code == 0);
    CHECK(r.out ==
          "#1\trelevant\tcontinuing\n"
          "#2\trelevant\taccepting\n"
          "RESULT accepting after 2 events\n");
  }
  SUBCASE("topic change violation") {
    auto trace =
        write_trace("tc.jsonl", {tc_question(), tc_answer_with_result(), tc_off_topic()});
    auto r = run("check " + spec_arg("topic_change.rml") + " --trace " + trace);
    CHECK(r.exit_code == 1);
    CHECK(r.out ==
          "#1\trelevant\tcontinuing\n"
          "#2\trelevant\taccepting\n"
          "#3\trelevant\tviolation\n"
          "RESULT violation after 3 events\n"
          "VIOLATION at event 3\n");
  }
  SUBCASE("empty trace") {
    auto trace = write_file("empty.jsonl", "");
    auto r = run("check " + spec_arg("topic_change.rml") + " --trace " + trace);
    CHECK(r.exit_code == 0);
    CHECK(r.out == "RESULT accepting after 0 events\n");
  }
}

TEST_CASE("check: options") {
  auto trace = write_trace("qa_bad.jsonl", {msg("question", "operator", "assistant"),
                                            msg("question", "operator", "validator"),
                                            tc_internal()});
  auto quiet = run("check " + spec_arg("question_answer.rml") + " --trace " + trace + " --quiet");
  CHECK(quiet.exit_code == 1);
  CHECK(quiet.out == "RESULT violation after 3 events\nVIOLATION at event 2\n");

  auto explain =
      run("check " + spec_arg("question_answer.rml") + " --trace " + trace + " --explain");
  CHECK(explain.exit_code == 1);
  CHECK(explain.out.find("EXPECTED answer('assistant', 'operator')\n") != std::string::npos);

  auto skipped = write_trace("skip.jsonl", {tc_question(), tc_internal()});
  auto r = run("check " + spec_arg("topic_change.rml") + " --trace " + skipped);
  CHECK(r.out.find("#2\tskipped\tcontinuing\n") != std::string::npos);
  CHECK(r.exit_code == 0);
}

TEST_CASE("check: errors exit with 2") {
  auto good = write_trace("one.jsonl", {tc_question()});
  CHECK(run("check " + spec_arg("topic_change.rml")).exit_code == 2);
  CHECK(run("").exit_code == 2);
  CHECK(run("frobnicate").exit_code == 2);
  CHECK(run("check --spec /nonexistent.rml --trace " + good).exit_code == 2);
  CHECK(run("check " + spec_arg("topic_change.rml") + " --trace /nonexistent.jsonl").exit_code ==
        2);

  auto bad_spec = write_file("bad.rml", "p matches {};\nMain = X;\n");
  auto r = run("check --spec " + bad_spec + " --trace " + good);
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("bad.rml:2:8: unknown-equation") != std::string::npos);

  auto bad_trace = write_file("bad.jsonl", to_json(tc_question()).dump() + "\n\n{\"x\":1}\n");
  auto t = run("check " + spec_arg("topic_change.rml") + " --trace " + bad_trace);
  CHECK(t.exit_code == 2);
  CHECK(t.err.find("bad.jsonl:3:") != std::string::npos);
  CHECK(run("--help").exit_code == 0);
}

TEST_CASE("check: exit code is 1 exactly when a violation is printed") {
  std::mt19937 rng(11);
  std::vector<Event> pool = {tc_question(),    tc_answer_with_result(), tc_empty_answer(),
                             tc_constrained(), tc_off_topic(),          tc_internal()};
  for (int i = 0; i < 30; ++i) {
    std::vector<Event> trace;
    std::size_t len = rng() % 6;
    for (std::size_t k = 0; k < len; ++k) trace.push_back(pool[rng() % pool.size()]);
    auto path = write_trace("rand.jsonl", trace);
    auto r = run("check " + spec_arg("topic_change.rml") + " --trace " + path);
    auto column = verdict_column(r.out);
    bool printed_violation =
        std::find(column.begin(), column.end(), "violation") != column.end();
    CHECK((r.exit_code == 1) == printed_violation);
    // The CLI and the service agree on every verdict.
    MonitorService svc;
    auto id = svc.create_monitor(topic_change_text()).body["id"].get<std::string>();
    REQUIRE(column.size() == trace.size());
    for (std::size_t k = 0; k < trace.size(); ++k) {
      CHECK(svc.submit_event(id, to_json(trace[k]).dump()).body["verdict"] == column[k]);
    }
  }
}

TEST_CASE("sim: runs a scenario against a live service and records the trace") {
  MonitorService svc;
  HttpServer server(svc);
  int port = server.bind("127.0.0.1", 0);
  server.start();
  std::string endpoint = "--endpoint http://127.0.0.1:" + std::to_string(port);
  auto record = (scratch() / "happy.jsonl").string();

  auto r = run("sim --scenario bed_allocation_happy " + spec_arg("topic_change.rml") + " " +
               endpoint + " --record " + record);
  CHECK(r.exit_code == 0);
  CHECK(r.out.rfind("0, question, operator→assistant, getValidationResult, continuing\n", 0) == 0);
  auto replay = run("check " + spec_arg("topic_change.rml") + " --trace " + record + " --quiet");
  CHECK(replay.exit_code == 0);
  CHECK(replay.out == "RESULT accepting after 10 events\n");

  auto v = run("sim --scenario topic_change_violation " + spec_arg("topic_change.rml") + " " +
               endpoint);
  CHECK(v.exit_code == 1);
  CHECK(v.out.find("warn, monitor→operator") != std::string::npos);

  CHECK(run("sim --scenario nope " + spec_arg("topic_change.rml") + " " + endpoint).exit_code == 2);
  server.stop();
  CHECK(run("sim --scenario bed_allocation_happy " + spec_arg("topic_change.rml") + " " + endpoint)
            .exit_code == 2);
}

TEST_CASE("serve: listens, logs one JSON line per request and stops on SIGTERM") {
  int port = 0;
  {
    MonitorService probe;
    HttpServer s(probe);
    port = s.bind("127.0.0.1", 0);
  }
  auto out_path = scratch() / "serve.out";
  pid_t pid = ::fork();
  REQUIRE(pid >= 0);
  if (pid == 0) {
    std::string listen = "127.0.0.1:" + std::to_string(port);
    std::FILE* f = std::freopen(out_path.c_str(), "w", stdout);
    (void)f;
    ::execl(PROTOMON_CLI, PROTOMON_CLI, "serve", "--listen", listen.c_str(),
            static_cast<char*>(nullptr));
    ::_exit(127);
  }
  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(5, 0);
  httplib::Result created;
  for (int i = 0; i < 100 && !created; ++i) {
    created = client.Post("/monitors", question_answer_text(), "text/plain");
    if (!created) ::usleep(50000);
  }
  REQUIRE(created);
  CHECK(created->status == 201);
  CHECK(client.Get("/monitors/ghost")->status == 404);
  ::kill(pid, SIGTERM);
  int status = 0;
  ::waitpid(pid, &status, 0);
  CHECK(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 0);

  std::istringstream lines(read_text(out_path.string()));
  std::string line;
  std::vector<nlohmann::json> log;
  while (std::getline(lines, line)) log.push_back(nlohmann::json::parse(line));
  // Each request is its own connection, so log lines may interleave.
  REQUIRE(log.size() == 2);
  std::set<std::pair<std::string, int>> seen;
  for (const auto& j : log) seen.emplace(j["path"].get<std::string>(), j["status"].get<int>());
  CHECK(seen == std::set<std::pair<std::string, int>>{{"/monitors", 201}, {"/monitors/ghost", 404}});

  CHECK(run("serve --listen nonsense").exit_code == 2);
}
