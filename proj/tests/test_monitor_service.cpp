// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>
#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <thread>

#include "protomon/service.hpp"
#include "support.hpp"

using namespace protomon;
using namespace protomon::testing;
using nlohmann::json;

namespace {

const char* kQuestion =
    R"({"performative":"question","sender":"operator","receiver":"assistant","content":{"name":"getValidationResult"}})";
const char* kSecondQuestion =
    R"({"performative":"question","sender":"operator","receiver":"validator"})";
const char* kAnswer = R"({"performative":"assert","sender":"assistant","receiver":"operator"})";

std::string create(MonitorService& svc, const std::string& spec_text) {
  auto r = svc.create_monitor(json{{"spec", spec_text}}.dump());
  REQUIRE(r.status == 201);
  return r.body.at("id").get<std::string>();
}

}  // namespace

TEST_CASE("create_monitor: documented examples") {
  MonitorService svc;
  auto ok = svc.create_monitor(question_answer_text());
  CHECK(ok.status == 201);
  CHECK(ok.body.at("id").is_string());

  auto bad = svc.create_monitor("Main = X;");
  CHECK(bad.status == 422);
  REQUIRE(bad.body.at("errors").size() == 1);
  CHECK(bad.body["errors"][0]["kind"] == "unknown-equation");
  CHECK(bad.body["errors"][0]["line"] == 1);

  auto syntax = svc.create_monitor("Main = p");
  CHECK(syntax.status == 422);
  CHECK(syntax.body["errors"][0]["kind"] == "syntax");

  CHECK(svc.create_monitor("").status == 400);
  CHECK(svc.create_monitor("   \n").status == 400);
  CHECK(svc.create_monitor(R"({"text":"Main = p;"})").status == 400);
  CHECK(svc.create_monitor(json(question_answer_text()).dump()).status == 201);
  CHECK(svc.session_count() == 2);
}

TEST_CASE("submit_event: documented examples") {
  MonitorService svc;
  std::string id = create(svc, question_answer_text());

  auto r1 = svc.submit_event(id, kQuestion);
  CHECK(r1.status == 200);
  CHECK(r1.body["verdict"] == "continuing");
  CHECK(r1.body["event_index"] == 1);
  CHECK(r1.body["violation"] == false);

  auto r2 = svc.submit_event(id, kSecondQuestion);
  CHECK(r2.status == 200);
  CHECK(r2.body["verdict"] == "violation");
  CHECK(r2.body["event_index"] == 2);
  CHECK(r2.body["violation"] == true);
  CHECK(r2.body["offending_index"] == 2);
  CHECK(r2.body["offending_event"] == json::parse(kSecondQuestion));

  auto r3 = svc.submit_event(id, kAnswer);
  CHECK(r3.status == 200);
  CHECK(r3.body["verdict"] == "violation");
  CHECK(r3.body["event_index"] == 3);

  CHECK(svc.submit_event("ghost", kQuestion).status == 404);
  CHECK(svc.submit_event(id, R"({"performative":"q","sender":"a"})").status == 400);
  CHECK(svc.submit_event(id, "not json").status == 400);
  CHECK(svc.event_log(id).size() == 3);
}

TEST_CASE("get_monitor and delete_monitor") {
  MonitorService svc;
  std::string id = create(svc, topic_change_text());
  auto fresh = svc.get_monitor(id);
  CHECK(fresh.status == 200);
  CHECK(fresh.body["event_index"] == 0);
  CHECK(fresh.body["violation"] == false);
  CHECK(fresh.body["verdict"] == "accepting");

  svc.submit_event(id, R"({"performative":"assert","sender":"assistant","receiver":"operator"})");
  auto after = svc.get_monitor(id);
  CHECK(after.body["violation"] == true);
  CHECK(after.body["event_index"] == 1);

  CHECK(svc.get_monitor("ghost").status == 404);
  auto del = svc.delete_monitor(id);
  CHECK(del.status == 200);
  CHECK(del.body["deleted"] == true);
  CHECK(svc.get_monitor(id).status == 404);
  CHECK(svc.delete_monitor(id).status == 404);
  std::string next = create(svc, topic_change_text());
  CHECK(next != id);
}

TEST_CASE("sessions are isolated") {
  MonitorService svc;
  std::string a = create(svc, question_answer_text());
  std::string b = create(svc, question_answer_text());
  svc.submit_event(a, kQuestion);
  svc.submit_event(a, kSecondQuestion);
  CHECK(svc.get_monitor(a).body["violation"] == true);
  auto rb = svc.submit_event(b, kQuestion);
  CHECK(rb.body["verdict"] == "continuing");
  CHECK(rb.body["event_index"] == 1);
}

TEST_CASE("replaying a logged sequence reproduces the verdicts") {
  MonitorService svc;
  std::string a = create(svc, topic_change_text());
  for (const auto& e : {tc_question(), tc_internal(), tc_answer_with_result(), tc_constrained(),
                        tc_empty_answer(), tc_off_topic(), tc_question()}) {
    svc.submit_event(a, to_json(e).dump());
  }
  auto log = svc.event_log(a);
  std::string b = create(svc, topic_change_text());
  for (const auto& entry : log) {
    auto r = svc.submit_event(b, to_json(entry.event).dump());
    CHECK(r.body["verdict"] == std::string(to_string(entry.verdict)));
    CHECK(r.body["relevant"] == entry.relevant);
  }
}

TEST_CASE("concurrent submissions to one session get gap-free indices") {
  MonitorService svc;
  std::string id = create(svc, "e matches {}; Main = e*;");
  constexpr int kClients = 8;
  constexpr int kPerClient = 250;
  std::vector<std::vector<int>> seen(kClients);
  std::vector<std::thread> threads;
  for (int c = 0; c < kClients; ++c) {
    threads.emplace_back([&, c] {
      for (int i = 0; i < kPerClient; ++i) {
        auto r = svc.submit_event(id, kAnswer);
        seen[c].push_back(r.body["event_index"].get<int>());
      }
    });
  }
  for (auto& t : threads) t.join();
  std::vector<int> all;
  for (const auto& s : seen) {
    CHECK(std::is_sorted(s.begin(), s.end()));
    all.insert(all.end(), s.begin(), s.end());
  }
  std::sort(all.begin(), all.end());
  for (int i = 0; i < kClients * kPerClient; ++i) REQUIRE(all[i] == i + 1);
  CHECK(svc.event_log(id).size() == static_cast<std::size_t>(kClients * kPerClient));
}

TEST_CASE("parse_listen_address") {
  CHECK(parse_listen_address("127.0.0.1:8087") == std::pair<std::string, int>{"127.0.0.1", 8087});
  CHECK(parse_listen_address("localhost:0").second == 0);
  CHECK_THROWS_AS(parse_listen_address("8087"), std::invalid_argument);
  CHECK_THROWS_AS(parse_listen_address(":80"), std::invalid_argument);
  CHECK_THROWS_AS(parse_listen_address("h:99999"), std::invalid_argument);
  CHECK_THROWS_AS(parse_listen_address("h:8o"), std::invalid_argument);
}

TEST_CASE("HTTP routes") {
  MonitorService svc;
  std::vector<std::string> log;
  std::mutex log_mutex;
  HttpServer server(svc, [&](const std::string& line) {
    std::lock_guard lock(log_mutex);
    log.push_back(line);
  });
  int port = server.bind("127.0.0.1", 0);
  server.start();
  httplib::Client client("127.0.0.1", port);

  auto created = client.Post("/monitors", question_answer_text(), "text/plain");
  REQUIRE(created);
  CHECK(created->status == 201);
  CHECK(created->get_header_value("Content-Type") == "application/json");
  std::string id = json::parse(created->body)["id"];

  auto r1 = client.Post("/monitors/" + id + "/events", kQuestion, "application/json");
  REQUIRE(r1);
  CHECK(r1->status == 200);
  CHECK(json::parse(r1->body)["verdict"] == "continuing");
  auto r2 = client.Post("/monitors/" + id + "/events", kSecondQuestion, "application/json");
  CHECK(r2->status == 200);
  CHECK(json::parse(r2->body)["violation"] == true);

  CHECK(client.Post("/monitors", "Main = X;", "text/plain")->status == 422);
  CHECK(client.Post("/monitors", "", "text/plain")->status == 400);
  CHECK(client.Post("/monitors/" + id + "/events", "{}", "application/json")->status == 400);
  CHECK(client.Post("/monitors/ghost/events", kQuestion, "application/json")->status == 404);
  auto got = client.Get("/monitors/" + id);
  CHECK(got->status == 200);
  CHECK(json::parse(got->body)["event_index"] == 2);
  CHECK(client.Delete("/monitors/" + id)->status == 200);
  CHECK(client.Get("/monitors/" + id)->status == 404);
  auto unknown = client.Get("/elsewhere");
  CHECK(unknown->status == 404);
  CHECK(json::parse(unknown->body).contains("error"));

  server.stop();
  std::lock_guard lock(log_mutex);
  CHECK(log.size() == 11);
  for (const auto& line : log) {
    auto j = json::parse(line);
    CHECK(j.contains("method"));
    CHECK(j.contains("status"));
  }
}

TEST_CASE("HTTP: 8 concurrent clients on one session") {
  MonitorService svc;
  HttpServer server(svc);
  int port = server.bind("127.0.0.1", 0);
  server.start();
  std::string id;
  {
    httplib::Client c("127.0.0.1", port);
    id = json::parse(c.Post("/monitors", question_answer_text(), "text/plain")->body)["id"];
  }
  constexpr int kClients = 8;
  constexpr int kPerClient = 40;
  std::vector<int> indices;
  std::mutex m;
  std::atomic<int> failures{0};
  std::vector<std::thread> threads;
  for (int c = 0; c < kClients; ++c) {
    threads.emplace_back([&] {
      httplib::Client client("127.0.0.1", port);
      for (int i = 0; i < kPerClient; ++i) {
        auto r = client.Post("/monitors/" + id + "/events", kQuestion, "application/json");
        if (!r || r->status != 200) {
          ++failures;
          continue;
        }
        std::lock_guard lock(m);
        indices.push_back(json::parse(r->body)["event_index"].get<int>());
      }
    });
  }
  for (auto& t : threads) t.join();
  server.stop();
  CHECK(failures == 0);
  std::sort(indices.begin(), indices.end());
  REQUIRE(indices.size() == kClients * kPerClient);
  for (int i = 0; i < kClients * kPerClient; ++i) CHECK(indices[i] == i + 1);
}

TEST_CASE("HTTP: binding a busy port fails") {
  MonitorService svc;
  HttpServer first(svc);
  int port = first.bind("127.0.0.1", 0);
  HttpServer second(svc);
  CHECK_THROWS_AS(second.bind("127.0.0.1", port), std::runtime_error);
}
