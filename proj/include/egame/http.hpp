#pragma once

// HTTP routes for SessionStore:
//   POST /sessions                 create
//   GET  /sessions/{id}            snapshot
//   POST /sessions/{id}/fire       {"node": id}
//   POST /sessions/{id}/undo
//   GET  /sessions/{id}/analysis
// Errors are {code, message, detail}.

#include <functional>
#include <string>

#include <httplib.h>

#include "egame/service.hpp"

namespace egame {

namespace detail {

inline void reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline void guarded(httplib::Response& res, const std::function<Json()>& op) {
  try {
    reply(res, 200, op());
  } catch (const ServiceError& err) {
    reply(res, err.status(), err.body());
  } catch (const nlohmann::json::exception& err) {
    reply(res, 400, Json{{"code", "bad_request"}, {"message", err.what()}, {"detail", nullptr}});
  } catch (const std::exception& err) {
    reply(res, 500, Json{{"code", "internal"}, {"message", err.what()}, {"detail", nullptr}});
  }
}

inline Json body_of(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  return Json::parse(req.body);
}

}  // namespace detail

inline void bind_routes(httplib::Server& server, SessionStore& store) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Post("/sessions", [&store](const httplib::Request& req, httplib::Response& res) {
    detail::guarded(res, [&] { return store.create(detail::body_of(req)); });
  });
  server.Get(R"(/sessions/([^/]+))", [&store](const httplib::Request& req, httplib::Response& res) {
    detail::guarded(res, [&] { return store.get(req.matches[1]); });
  });
  server.Post(R"(/sessions/([^/]+)/fire)", [&store](const httplib::Request& req, httplib::Response& res) {
    detail::guarded(res, [&] { return store.fire_node(req.matches[1], detail::body_of(req)); });
  });
  server.Post(R"(/sessions/([^/]+)/undo)", [&store](const httplib::Request& req, httplib::Response& res) {
    detail::guarded(res, [&] { return store.undo(req.matches[1]); });
  });
  server.Get(R"(/sessions/([^/]+)/analysis)", [&store](const httplib::Request& req, httplib::Response& res) {
    detail::guarded(res, [&] { return store.analysis(req.matches[1]); });
  });
}

}  // namespace egame
