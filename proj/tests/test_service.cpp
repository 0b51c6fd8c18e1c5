#include <chrono>
#include <cstdio>
#include <string>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "egame/engine.hpp"
#include "egame/graph.hpp"
#include "egame/http.hpp"
#include "egame/io.hpp"
#include "egame/service.hpp"

using namespace egame;

namespace {

Json all_ones_body(Json start = "omega1") {
  return Json{{"graph", to_json(make_cyclic3(3, 3, 3))}, {"start", std::move(start)}};
}

int status_of(const std::function<void()>& op) {
  try {
    op();
  } catch (const ServiceError& err) {
    return err.status();
  }
  return 200;
}

}  // namespace

TEST(SessionStore, CreateAndFire) {
  SessionStore store(1);
  const Json created = store.create(all_ones_body());
  const std::string id = created["id"];
  EXPECT_EQ(created["values"], Json::array({1.0, 0.0, 0.0}));
  EXPECT_EQ(created["legal"], Json::array({"g1"}));
  EXPECT_EQ(created["move_count"], 0);
  EXPECT_TRUE(created["condition_star"]["holds"].get<bool>());

  const Json after = store.fire_node(id, Json{{"node", "g1"}});
  EXPECT_EQ(after["values"], Json::array({-1.0, 1.0, 1.0}));
  EXPECT_EQ(after["legal"], Json::array({"g2", "g3"}));
  EXPECT_EQ(after["move_count"], 1);
  EXPECT_EQ(store.size(), 1u);
}

TEST(SessionStore, IllegalMoveIs409WithValue) {
  SessionStore store(2);
  const std::string id = store.create(all_ones_body())["id"];
  try {
    store.fire_node(id, Json{{"node", "g2"}});
    FAIL() << "expected ServiceError";
  } catch (const ServiceError& err) {
    EXPECT_EQ(err.status(), 409);
    EXPECT_EQ(err.code(), "illegal_move");
    EXPECT_EQ(err.detail()["node"], "g2");
    EXPECT_EQ(err.detail()["value"], 0.0);
  }
  EXPECT_EQ(store.get(id)["move_count"], 0);
}

TEST(SessionStore, MissingReverseAmplitudeIs422WithFieldPath) {
  SessionStore store(3);
  const Json body{{"graph", Json::parse(R"({"nodes": ["a", "b"], "edges": [{"from": "a", "to": "b", "amp": 1}]})")}};
  try {
    store.create(body);
    FAIL() << "expected ServiceError";
  } catch (const ServiceError& err) {
    EXPECT_EQ(err.status(), 422);
    EXPECT_EQ(err.body()["detail"]["field"], "graph.edges[0].amp_back");
  }
}

TEST(SessionStore, RequestErrors) {
  SessionStore store(4);
  EXPECT_EQ(status_of([&] { store.create(Json::object()); }), 422);
  EXPECT_EQ(status_of([&] { store.create(all_ones_body("omega9")); }), 422);
  EXPECT_EQ(status_of([&] { store.create(all_ones_body(Json::array({1, 2}))); }), 422);
  const Json bad_amp{{"graph", Json::parse(R"({"nodes": ["a", "b"], "edges": [{"from": "a", "to": "b", "amp": -1, "amp_back": 1}]})")}};
  EXPECT_EQ(status_of([&] { store.create(bad_amp); }), 422);
  EXPECT_EQ(status_of([&] { store.get("nope"); }), 404);
  const std::string id = store.create(all_ones_body())["id"];
  EXPECT_EQ(status_of([&] { store.fire_node(id, Json::object()); }), 422);
  EXPECT_EQ(status_of([&] { store.fire_node(id, Json{{"node", "zz"}}); }), 422);
}

TEST(SessionStore, FireThenUndoIsIdentity) {
  SessionStore store(5);
  const Json created = store.create(all_ones_body(Json::array({2, 1, -2})));
  const std::string id = created["id"];
  store.fire_node(id, Json{{"node", "g1"}});
  const Json undone = store.undo(id);
  EXPECT_EQ(undone["values"], created["values"]);
  EXPECT_EQ(undone["legal"], created["legal"]);
  EXPECT_EQ(undone["move_count"], 0);
  EXPECT_EQ(store.undo(id)["move_count"], 0);  // no-op at the start
}

TEST(SessionStore, FiringAfterUndoDropsRedoTail) {
  SessionStore store(6);
  const std::string id = store.create(all_ones_body())["id"];
  store.fire_node(id, Json{{"node", "g1"}});
  store.fire_node(id, Json{{"node", "g2"}});
  store.undo(id);
  const Json s = store.fire_node(id, Json{{"node", "g3"}});
  EXPECT_EQ(s["move_count"], 2);
  EXPECT_EQ(s["values"], Json::array({0.0, 2.0, -1.0}));
}

TEST(SessionStore, LegalSetMatchesEngine) {
  SessionStore store(7);
  const Graph g = make_cyclic3(5, 3, 7, {1.5, 0.8, 2.0});
  const std::string id = store.create(Json{{"graph", to_json(g)}, {"start", "omega2"}})["id"];
  Position pos = Position::fundamental(3, 1);
  Strategy strategy = random_seeded(11);
  for (int step = 0; step < 40; ++step) {
    const Json snap = store.get(id);
    Json expected = Json::array();
    for (NodeId n : legal_moves(g, pos)) expected.push_back(g.id(n));
    ASSERT_EQ(snap["legal"], expected);
    const auto moves = legal_moves(g, pos);
    if (moves.empty()) break;
    const NodeId n = *strategy(pos, moves);
    pos = fire(g, pos, n);
    store.fire_node(id, Json{{"node", g.id(n)}});
  }
}

TEST(SessionStore, AnalysisSuggestsClaimSequence) {
  SessionStore store(8);
  const std::string id = store.create(all_ones_body(Json::array({2, 1, -2})))["id"];
  const Json a = store.analysis(id);
  EXPECT_TRUE(a["eligible"].get<bool>());
  EXPECT_EQ(a["suggestion"], Json::array({"g1", "g2", "g1"}));
  EXPECT_EQ(a["case"], "I");
  EXPECT_EQ(a["kappas"]["kappa1"], 2.0);
  EXPECT_TRUE(a["inequalities"]["hold"].get<bool>());

  const std::string id3 = store.create(all_ones_body("omega3"))["id"];
  const Json b = store.analysis(id3);
  EXPECT_TRUE(b["suggestion"].is_null());
  EXPECT_EQ(b["hint"], "fire g3 first");
}

TEST(SessionStore, AnalysisForIneligibleGraph) {
  SessionStore store(9);
  const Json body{{"graph", Json::parse(R"({"nodes": ["x", "y"], "edges": [{"from": "x", "to": "y", "amp": 1, "amp_back": 1}]})")}};
  const std::string id = store.create(body)["id"];
  const Json a = store.analysis(id);
  EXPECT_FALSE(a["eligible"].get<bool>());
  EXPECT_TRUE(a["condition_star"].is_null());
  EXPECT_EQ(a["legal"], Json::array({"x"}));
}

TEST(SessionStore, SaveAndLoad) {
  SessionStore store(10);
  const std::string id = store.create(all_ones_body())["id"];
  store.fire_node(id, Json{{"node", "g1"}});
  store.fire_node(id, Json{{"node", "g2"}});
  store.undo(id);
  const std::string path = ::testing::TempDir() + "egame_sessions.json";
  store.save(path);

  SessionStore restored(11);
  restored.load(path);
  const Json a = store.get(id);
  const Json b = restored.get(id);
  EXPECT_EQ(a["values"], b["values"]);
  EXPECT_EQ(a["move_count"], b["move_count"]);
  EXPECT_EQ(restored.undo(id)["move_count"], 0);
  std::remove(path.c_str());
}

TEST(Http, EndToEnd) {
  SessionStore store(12);
  httplib::Server server;
  bind_routes(server, store);
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto created = client.Post("/sessions", all_ones_body().dump(), "application/json");
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 200);
  EXPECT_EQ(created->get_header_value("Access-Control-Allow-Origin"), "*");
  const std::string id = Json::parse(created->body)["id"];

  auto fired = client.Post("/sessions/" + id + "/fire", R"({"node": "g1"})", "application/json");
  ASSERT_TRUE(fired);
  EXPECT_EQ(fired->status, 200);
  EXPECT_EQ(Json::parse(fired->body)["values"], Json::array({-1.0, 1.0, 1.0}));

  auto illegal = client.Post("/sessions/" + id + "/fire", R"({"node": "g1"})", "application/json");
  ASSERT_TRUE(illegal);
  EXPECT_EQ(illegal->status, 409);
  EXPECT_EQ(Json::parse(illegal->body)["code"], "illegal_move");

  auto analysis = client.Get("/sessions/" + id + "/analysis");
  ASSERT_TRUE(analysis);
  EXPECT_EQ(analysis->status, 200);
  EXPECT_EQ(Json::parse(analysis->body)["legal"], Json::array({"g2", "g3"}));

  auto undone = client.Post("/sessions/" + id + "/undo", "", "application/json");
  ASSERT_TRUE(undone);
  EXPECT_EQ(Json::parse(undone->body)["move_count"], 0);

  auto got = client.Get("/sessions/" + id);
  ASSERT_TRUE(got);
  EXPECT_TRUE(Json::parse(got->body).contains("graph"));

  auto missing = client.Get("/sessions/unknown");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);

  auto malformed = client.Post("/sessions", "{not json", "application/json");
  ASSERT_TRUE(malformed);
  EXPECT_EQ(malformed->status, 400);

  auto preflight = client.Options("/sessions");
  ASSERT_TRUE(preflight);
  EXPECT_EQ(preflight->status, 204);

  server.stop();
  worker.join();
}
