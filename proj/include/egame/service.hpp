#pragma once

// In-memory game sessions behind a JSON interface. Transport-agnostic: every
// operation takes and returns JSON, and failures are ServiceError carrying an
// HTTP-style status. http.hpp binds these to routes.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "egame/engine.hpp"
#include "egame/error.hpp"
#include "egame/graph.hpp"
#include "egame/io.hpp"
#include "egame/prop1.hpp"

namespace egame {

class ServiceError : public Error {
public:
  ServiceError(int status, std::string code, const std::string& message, Json detail = nullptr)
      : Error(message), status_(status), code_(std::move(code)), detail_(std::move(detail)) {}

  int status() const noexcept { return status_; }
  const std::string& code() const noexcept { return code_; }
  const Json& detail() const noexcept { return detail_; }

  Json body() const { return Json{{"code", code_}, {"message", what()}, {"detail", detail_}}; }

private:
  int status_;
  std::string code_;
  Json detail_;
};

struct Session {
  using Clock = std::chrono::system_clock;

  std::string id;
  Graph graph;
  std::optional<Cyclic3Labels> labels;  // present when the graph is certificate-eligible
  Position initial;
  std::vector<FiringEvent> log;  // events past `cursor` are undone
  std::size_t cursor = 0;
  Clock::time_point created;
  Clock::time_point updated;
  mutable std::mutex mutex;

  const Position& current() const { return cursor == 0 ? initial : log[cursor - 1].after; }
};

class SessionStore {
public:
  explicit SessionStore(std::uint64_t id_seed = std::random_device{}()) : id_rng_(id_seed) {}

  /// Body: {"graph": <graph spec>, "start": "omega<i>" | [numbers] | "a,b,c"}.
  Json create(const Json& body) {
    if (!body.is_object() || !body.contains("graph")) {
      throw ServiceError(422, "invalid_request", "body must contain 'graph'", Json{{"field", "graph"}});
    }
    auto session = std::make_shared<Session>();
    try {
      session->graph = graph_from_json(body.at("graph"));
    } catch (const ParseError& err) {
      const std::string msg = err.what();
      throw ServiceError(422, "invalid_graph", msg, Json{{"field", "graph." + msg.substr(0, msg.find(':'))}});
    }
    const ValidationReport report = validate(session->graph);
    if (!report.engine_playable) {
      throw ServiceError(422, "invalid_graph", "graph amplitudes must be positive",
                         Json{{"validation", to_json(report, session->graph)}});
    }
    if (report.prop1_eligible) session->labels = canonicalize_prop1(session->graph);
    session->initial = start_from(session->graph, body.contains("start") ? body.at("start") : Json("omega1"));
    session->created = session->updated = Session::Clock::now();

    Json out;
    {
      std::unique_lock lock(map_mutex_);
      do {
        session->id = fmt::format("{:016x}{:016x}", id_rng_(), id_rng_());
      } while (sessions_.count(session->id));
      sessions_.emplace(session->id, session);
    }
    std::lock_guard guard(session->mutex);
    out = snapshot(*session);
    out["graph"] = to_json(session->graph);
    return out;
  }

  Json get(const std::string& id) const {
    auto session = find(id);
    std::lock_guard guard(session->mutex);
    Json out = snapshot(*session);
    out["graph"] = to_json(session->graph);
    out["created"] = stamp(session->created);
    out["updated"] = stamp(session->updated);
    return out;
  }

  /// Body: {"node": <node id>}.
  Json fire_node(const std::string& id, const Json& body) {
    auto session = find(id);
    std::lock_guard guard(session->mutex);
    if (!body.is_object() || !body.contains("node")) {
      throw ServiceError(422, "invalid_request", "body must contain 'node'", Json{{"field", "node"}});
    }
    const NodeId node = resolve_node(session->graph, body.at("node"));
    const Position& current = session->current();
    if (!is_legal(current, node)) {
      throw ServiceError(409, "illegal_move",
                         fmt::format("node '{}' has value {} and cannot be fired", session->graph.id(node),
                                     format_real(current[node])),
                         Json{{"node", session->graph.id(node)}, {"value", current[node]}});
    }
    Position next = fire(session->graph, current, node);
    session->log.resize(session->cursor);
    session->log.push_back({node, current, next, current[node]});
    ++session->cursor;
    session->updated = Session::Clock::now();
    return snapshot(*session);
  }

  /// Steps back one event; a no-op at move 0.
  Json undo(const std::string& id) {
    auto session = find(id);
    std::lock_guard guard(session->mutex);
    if (session->cursor > 0) {
      --session->cursor;
      session->updated = Session::Clock::now();
    }
    return snapshot(*session);
  }

  Json analysis(const std::string& id) const {
    auto session = find(id);
    std::lock_guard guard(session->mutex);
    const Position& pos = session->current();
    Json out;
    out["legal"] = node_list(session->graph, legal_moves(session->graph, pos));
    out["eligible"] = session->labels.has_value();
    out["condition_star"] = nullptr;
    out["kappas"] = nullptr;
    out["inequalities"] = nullptr;
    out["suggestion"] = nullptr;
    out["hint"] = nullptr;
    if (const auto& l = session->labels) {
      const Triple t = to_triple(*l, pos);
      const auto status = condition_star(*l, t);
      const Kappas k = kappas(*l);
      out["condition_star"] = to_json(status);
      out["kappas"] = Json{{"kappa1", k.kappa1}, {"kappa2", k.kappa2}};
      out["inequalities"] = to_json(inequalities(*l));
      out["labels"] = labels_json(*l, session->graph);
      if (status.holds) {
        Json seq = node_list(session->graph, claim_sequence(*l, t));
        out["suggestion"] = std::move(seq);
        out["case"] = to_string(claim_case(*l, t));
      } else if (is_legal(pos, l->gamma3) &&
                 condition_star(*l, to_triple(*l, fire(session->graph, pos, l->gamma3))).holds) {
        out["hint"] = "fire " + session->graph.id(l->gamma3) + " first";
      }
    }
    return out;
  }

  std::size_t size() const {
    std::shared_lock lock(map_mutex_);
    return sessions_.size();
  }

  /// All sessions as replayable JSON (graph, start, fired nodes, cursor).
  Json dump() const {
    std::shared_lock lock(map_mutex_);
    Json out = Json::array();
    for (const auto& [id, session] : sessions_) {
      std::lock_guard guard(session->mutex);
      Json nodes = Json::array();
      for (const auto& e : session->log) nodes.push_back(session->graph.id(e.node));
      out.push_back(Json{{"id", id},
                         {"graph", to_json(session->graph)},
                         {"start", to_json(session->initial)},
                         {"fired", std::move(nodes)},
                         {"cursor", session->cursor}});
    }
    return out;
  }

  void restore(const Json& saved) {
    for (const Json& item : saved) {
      auto session = std::make_shared<Session>();
      session->id = item.at("id").get<std::string>();
      session->graph = graph_from_json(item.at("graph"));
      if (validate(session->graph).prop1_eligible) session->labels = canonicalize_prop1(session->graph);
      session->initial = Position(item.at("start").get<std::vector<double>>());
      Position pos = session->initial;
      for (const Json& n : item.at("fired")) {
        const NodeId node = resolve_node(session->graph, n);
        Position next = fire(session->graph, pos, node);
        session->log.push_back({node, pos, next, pos[node]});
        pos = std::move(next);
      }
      session->cursor = std::min(item.at("cursor").get<std::size_t>(), session->log.size());
      session->created = session->updated = Session::Clock::now();
      std::unique_lock lock(map_mutex_);
      sessions_[session->id] = session;
    }
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    out << dump().dump(2) << "\n";
  }

  void load(const std::string& path) { restore(Json::parse(read_file(path))); }

private:
  std::shared_ptr<Session> find(const std::string& id) const {
    std::shared_lock lock(map_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) {
      throw ServiceError(404, "not_found", "no session '" + id + "'", Json{{"id", id}});
    }
    return it->second;
  }

  static Json node_list(const Graph& graph, const std::vector<NodeId>& nodes) {
    Json out = Json::array();
    for (NodeId n : nodes) out.push_back(graph.id(n));
    return out;
  }

  static NodeId resolve_node(const Graph& graph, const Json& value) {
    std::string key;
    try {
      key = detail::node_key(value, "node");
    } catch (const ParseError& err) {
      throw ServiceError(422, "invalid_request", err.what(), Json{{"field", "node"}});
    }
    const auto node = graph.index_of(key);
    if (!node) throw ServiceError(422, "unknown_node", "no node '" + key + "'", Json{{"node", key}});
    return *node;
  }

  static Position start_from(const Graph& graph, const Json& start) {
    try {
      if (start.is_string()) return parse_position(graph, start.get<std::string>());
      if (start.is_array()) {
        auto values = start.get<std::vector<double>>();
        if (values.size() != graph.node_count()) throw ParseError("start: wrong number of values");
        return Position(std::move(values));
      }
    } catch (const Error& err) {
      throw ServiceError(422, "invalid_start", err.what(), Json{{"field", "start"}});
    } catch (const nlohmann::json::exception& err) {
      throw ServiceError(422, "invalid_start", err.what(), Json{{"field", "start"}});
    }
    throw ServiceError(422, "invalid_start", "start must be a string or an array", Json{{"field", "start"}});
  }

  static std::int64_t stamp(Session::Clock::time_point t) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count();
  }

  static Json snapshot(const Session& s) {
    const Position& pos = s.current();
    Json out;
    out["id"] = s.id;
    out["nodes"] = s.graph.ids();
    out["values"] = to_json(pos);
    out["legal"] = node_list(s.graph, legal_moves(s.graph, pos));
    out["move_count"] = s.cursor;
    if (s.labels) {
      const auto status = condition_star(*s.labels, to_triple(*s.labels, pos));
      out["condition_star"] = to_json(status);
      out["linear_form"] = status.linear_form;
    } else {
      out["condition_star"] = nullptr;
      out["linear_form"] = nullptr;
    }
    return out;
  }

  mutable std::shared_mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::mt19937_64 id_rng_;
};

}  // namespace egame
