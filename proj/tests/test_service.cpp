// tests/test_service.cpp - HTTP contract through handle() and one real socket
#include <gtest/gtest.h>

#include <httplib.h>

#include <array>
#include <atomic>
#include <thread>

#include "evb/corpus.hpp"
#include "evb/service.hpp"

using namespace evb;

namespace
{

Service make_service(std::chrono::minutes idle = std::chrono::minutes(30))
{
  return Service(load_corpus().project, load_corpus().manifest.config, idle);
}

std::string new_session(Service & svc, const std::string & machine)
{
  const auto r = svc.handle("POST", "/sessions", Json{{"machine", machine}}.dump());
  EXPECT_EQ(r.status, 201) << r.body.dump();
  return r.body.value("id", "");
}

const Json * event_entry(const Json & snapshot, const std::string & name)
{
  for (const auto & e : snapshot["events"]) {
    if (e["name"] == name) return &e;
  }
  return nullptr;
}

TEST(Service, Machines)
{
  auto svc = make_service();
  const auto r = svc.handle("GET", "/machines", "");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["machines"].size(), 11u);
  EXPECT_EQ(r.body["refinements"].size(), 8u);
  EXPECT_EQ(r.body["refinements"][0], (Json{{"abstract", "MCP0"}, {"concrete", "MCP1"}}));

  const auto d = svc.handle("GET", "/machines/MTM0", "");
  ASSERT_EQ(d.status, 200);
  EXPECT_EQ(d.body["name"], "MTM0");
  EXPECT_EQ(d.body["variables"].size(), 5u);
  EXPECT_EQ(d.body["variables"][0]["name"], "dialyserState");
  EXPECT_EQ(d.body["invariants"].size(), 7u);
  bool monitor = false;
  for (const auto & e : d.body["events"]) {
    if (e["name"] == "disconnectDialyserPreparation") {
      monitor = true;
      EXPECT_EQ(e["kind"], "model");
      EXPECT_EQ(e["guards"].size(), 4u);
    }
    if (e["name"] == "connectDialyser") EXPECT_EQ(e["kind"], "environment");
  }
  EXPECT_TRUE(monitor);

  EXPECT_EQ(svc.handle("GET", "/machines/Nope", "").status, 404);
  EXPECT_EQ(svc.handle("POST", "/machines", "").status, 405);
  EXPECT_EQ(svc.handle("GET", "/nothing", "").status, 404);
}

// The temperature walkthrough: connect, prime, heat past the limit, fire
// the monitor.
TEST(Service, OverTemperatureWalkthrough)
{
  auto svc = make_service();
  const std::string id = new_session(svc, "MTM0");
  ASSERT_EQ(id, "s1");
  auto snap = svc.handle("GET", "/sessions/" + id, "").body;
  EXPECT_EQ(snap["state"]["alarm"], "Null");
  EXPECT_EQ(snap["history_length"], 0);
  for (const auto & e : snap["events"]) {
    if (e["kind"] == "model") EXPECT_FALSE(e["enabled"].get<bool>()) << e["name"];
  }

  auto fire = [&](const std::string & ev) { return svc.handle("POST", "/sessions/" + id + "/fire", Json{{"event", ev}}.dump()); };
  ASSERT_EQ(fire("connectDialyser").status, 200);
  ASSERT_EQ(fire("setOperationPriming").status, 200);
  auto r = svc.handle("POST", "/sessions/" + id + "/perturb", Json{{"variable", "dialysateTemperature"}, {"value", 43}}.dump());
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_EQ(r.body["hazards"], Json::array({"inv6"}));
  const Json * monitor = event_entry(r.body, "disconnectDialyserPreparation");
  ASSERT_NE(monitor, nullptr);
  EXPECT_TRUE((*monitor)["enabled"].get<bool>());
  EXPECT_TRUE(event_entry(r.body, "disconnectDialyserTherapy")->at("failing_guards").size() > 0);

  r = fire("disconnectDialyserPreparation");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["state"]["alarm"], "ALM377");
  EXPECT_TRUE(r.body["hazards"].empty());
  EXPECT_EQ(r.body["history_length"], 4);

  const auto t = svc.handle("GET", "/sessions/" + id + "/trace", "");
  ASSERT_EQ(t.status, 200);
  ASSERT_EQ(t.body["trace"].size(), 5u);
  EXPECT_EQ(t.body["trace"][3]["kind"], "perturb");
  EXPECT_EQ(t.body["trace"][4]["event"], "disconnectDialyserPreparation");

  r = svc.handle("POST", "/sessions/" + id + "/undo", "");
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_EQ(r.body["state"]["alarm"], "Null");
}

TEST(Service, ErrorStatuses)
{
  auto svc = make_service();
  const std::string id = new_session(svc, "MCP2");
  const std::string base = "/sessions/" + id;
  auto post = [&](const std::string & op, const Json & body) { return svc.handle("POST", base + op, body.dump()); };

  EXPECT_EQ(post("/fire", {{"event", "nothing"}}).status, 404);
  EXPECT_EQ(post("/fire", {{"event", "stopBloodPumping"}}).status, 409);
  EXPECT_EQ(post("/fire", {{"event", "stopBloodPumping"}}).body["error"], "GuardNotEnabled");
  EXPECT_EQ(post("/undo", Json::object()).status, 409);
  EXPECT_EQ(post("/perturb", {{"variable", "nothing"}, {"value", 1}}).status, 404);
  EXPECT_EQ(post("/perturb", {{"variable", "alarm"}, {"value", true}}).status, 422);
  EXPECT_EQ(post("/perturb", {{"variable", "bloodPumpingTime"}, {"value", 9999}}).status, 422);
  EXPECT_EQ(post("/perturb", {{"variable", "bloodPumpingTime"}}).status, 400);
  EXPECT_EQ(post("/fire", Json::object()).status, 400);
  EXPECT_EQ(svc.handle("POST", base + "/fire", "not json").status, 400);
  EXPECT_EQ(svc.handle("GET", base + "/fire", "").status, 405);
  EXPECT_EQ(svc.handle("GET", "/sessions/s99", "").status, 404);
  EXPECT_EQ(svc.handle("POST", "/sessions", "{}").status, 400);
  EXPECT_EQ(svc.handle("POST", "/sessions", Json{{"machine", "Nope"}}.dump()).status, 404);
  EXPECT_EQ(svc.handle("POST", "/sessions", Json{{"machine", "MCP2"}, {"bounds", {{"bloodPumpingTime", {5, 1}}}}}.dump()).status,
            422);

  // Errors leave the session untouched.
  EXPECT_EQ(svc.handle("GET", base, "").body["history_length"], 0);
  EXPECT_EQ(svc.handle("DELETE", base, "").status, 200);
  EXPECT_EQ(svc.handle("GET", base, "").status, 404);
}

TEST(Service, SessionOverrides)
{
  auto svc = make_service();
  const auto r = svc.handle("POST", "/sessions",
                            Json{{"machine", "MBP1"}, {"constants", {{"SetBloodFlow", 50}}}}.dump());
  ASSERT_EQ(r.status, 201) << r.body.dump();
  EXPECT_EQ(r.body["state"]["actualBloodFlow"], 50);
  const auto s = svc.handle("POST", "/sessions",
                            Json{{"machine", "MCP2"}, {"bounds", {{"bloodPumpingTime", {0, 10}}}}}.dump());
  ASSERT_EQ(s.status, 201);
  const std::string id = s.body["id"];
  EXPECT_EQ(svc.handle("POST", "/sessions/" + id + "/perturb",
                       Json{{"variable", "bloodPumpingTime"}, {"value", 11}}.dump()).status,
            422);
}

TEST(Service, Scenarios)
{
  auto svc = make_service();
  const auto & c = load_corpus();
  for (const auto & spec : c.manifest.scenarios) {
    const auto r = svc.handle("POST", "/scenarios/run", c.text(spec.file));
    ASSERT_EQ(r.status, 200) << spec.file;
    EXPECT_EQ(r.body["record"], "scenario");
    EXPECT_EQ(r.body["passed"].get<bool>(), spec.pass) << spec.file;
  }
  EXPECT_EQ(svc.handle("POST", "/scenarios/run", "machine MCP0\nbogus\n").status, 422);
  EXPECT_EQ(svc.handle("POST", "/scenarios/run", "machine MCP0\nfire nothing\n").status, 422);
  EXPECT_EQ(svc.handle("POST", "/scenarios/run", "machine Nope\n").status, 404);
  EXPECT_EQ(svc.handle("GET", "/scenarios/run", "").status, 405);
}

TEST(Service, IdleEviction)
{
  auto svc = make_service(std::chrono::minutes(30));
  new_session(svc, "MCP0");
  new_session(svc, "MCP0");
  EXPECT_EQ(svc.session_count(), 2u);
  EXPECT_EQ(svc.evict_idle(Service::Clock::now() + std::chrono::minutes(29)), 0u);
  EXPECT_EQ(svc.evict_idle(Service::Clock::now() + std::chrono::minutes(31)), 2u);
  EXPECT_EQ(svc.session_count(), 0u);
  // Ids are not reused.
  EXPECT_EQ(new_session(svc, "MCP0"), "s3");
}

TEST(Service, ConcurrentSessions)
{
  auto svc = make_service();
  std::vector<std::string> ids;
  for (int i = 0; i < 4; ++i) ids.push_back(new_session(svc, "MBP0"));
  std::array<std::atomic<int>, 4> accepted{};
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      const auto k = static_cast<size_t>(t % 4);
      const std::string base = "/sessions/" + ids[k];
      for (int i = 0; i < 50; ++i) {
        for (const char * ev : {"startBloodPumping", "stopBloodPumping"}) {
          const int status = svc.handle("POST", base + "/fire", Json{{"event", ev}}.dump()).status;
          EXPECT_TRUE(status == 200 || status == 409) << status;
          accepted[k] += status == 200;
        }
        svc.handle("GET", base, "");
      }
    });
  }
  for (auto & th : threads) th.join();
  for (size_t k = 0; k < ids.size(); ++k) {
    // Every fire either applied fully or was refused: history alternates.
    const auto t = svc.handle("GET", "/sessions/" + ids[k] + "/trace", "").body["trace"];
    for (size_t i = 1; i < t.size(); ++i) {
      EXPECT_EQ(t[i]["event"], i % 2 == 1 ? "startBloodPumping" : "stopBloodPumping");
    }
    EXPECT_EQ(t.size(), static_cast<size_t>(accepted[k]) + 1);
  }
}

TEST(Service, OverHttp)
{
  auto svc = make_service();
  const int port = svc.bind("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  std::thread server([&] { svc.listen(); });

  // A second server on the same port is refused.
  auto other = make_service();
  EXPECT_EQ(other.bind("127.0.0.1", port), -1);

  httplib::Client client("127.0.0.1", port);
  auto machines = client.Get("/machines");
  ASSERT_TRUE(machines);
  EXPECT_EQ(machines->status, 200);
  EXPECT_EQ(Json::parse(machines->body)["machines"].size(), 11u);

  auto created = client.Post("/sessions", Json{{"machine", "MCP0"}}.dump(), "application/json");
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 201);
  const std::string id = Json::parse(created->body)["id"];
  auto fired = client.Post("/sessions/" + id + "/fire", Json{{"event", "stopBloodPumping"}}.dump(), "application/json");
  ASSERT_TRUE(fired);
  EXPECT_EQ(fired->status, 409);
  EXPECT_EQ(Json::parse(fired->body)["error"], "GuardNotEnabled");

  svc.stop();
  server.join();
}

}  // namespace
