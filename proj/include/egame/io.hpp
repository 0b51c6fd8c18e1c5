#pragma once

// JSON and CSV documents: graph specs, traces, validation reports,
// certificates and matrix dumps.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "egame/engine.hpp"
#include "egame/error.hpp"
#include "egame/graph.hpp"
#include "egame/matrix.hpp"
#include "egame/prop1.hpp"

namespace egame {

using Json = nlohmann::ordered_json;

inline constexpr const char* kTraceSchema = "egame.trace/1";
inline constexpr const char* kCertificateSchema = "egame.certificate/1";

namespace detail {

inline std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

inline std::string node_key(const Json& v, const std::string& path) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  throw ParseError(path + ": node id must be a string or integer");
}

inline double number_at(const Json& obj, const char* key, const std::string& path) {
  if (!obj.contains(key)) throw ParseError(path + "." + key + ": missing");
  const Json& v = obj.at(key);
  if (!v.is_number()) throw ParseError(path + "." + key + ": expected a number");
  return v.get<double>();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Graph spec: {"nodes": [ids], "edges": [{"from", "to", "amp", "amp_back", "m"?}]}

inline Graph graph_from_json(const Json& doc) {
  if (!doc.is_object()) throw ParseError("graph spec must be a JSON object");
  if (!doc.contains("nodes") || !doc.at("nodes").is_array()) throw ParseError("nodes: missing or not an array");
  if (!doc.contains("edges") || !doc.at("edges").is_array()) throw ParseError("edges: missing or not an array");
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < doc.at("nodes").size(); ++i) {
    ids.push_back(detail::node_key(doc.at("nodes")[i], "nodes[" + std::to_string(i) + "]"));
  }
  std::unordered_map<std::string, NodeId> index;
  for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);

  std::vector<Edge> edges;
  const Json& list = doc.at("edges");
  for (std::size_t e = 0; e < list.size(); ++e) {
    const std::string path = "edges[" + std::to_string(e) + "]";
    const Json& item = list[e];
    if (!item.is_object()) throw ParseError(path + ": expected an object");
    for (const char* key : {"from", "to"}) {
      if (!item.contains(key)) throw ParseError(path + "." + key + ": missing");
    }
    const std::string from = detail::node_key(item.at("from"), path + ".from");
    const std::string to = detail::node_key(item.at("to"), path + ".to");
    if (!index.count(from)) throw ParseError(path + ".from: unknown node '" + from + "'");
    if (!index.count(to)) throw ParseError(path + ".to: unknown node '" + to + "'");
    Edge edge;
    edge.from = index.at(from);
    edge.to = index.at(to);
    edge.amp = detail::number_at(item, "amp", path);
    edge.amp_back = detail::number_at(item, "amp_back", path);
    if (item.contains("m") && !item.at("m").is_null()) {
      if (!item.at("m").is_number_integer()) throw ParseError(path + ".m: expected an integer");
      edge.m = item.at("m").get<int>();
    }
    edges.push_back(edge);
  }
  try {
    return Graph(std::move(ids), std::move(edges));
  } catch (const StructureError& err) {
    throw ParseError(err.what());
  }
}

inline Graph parse_graph(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& err) {
    const auto [line, column] = detail::line_column(text, err.byte == 0 ? 0 : err.byte - 1);
    throw ParseError(fmt::format("JSON syntax error at line {}, column {}: {}", line, column, err.what()),
                     line, column);
  }
  return graph_from_json(doc);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Graph load_graph(const std::string& path) { return parse_graph(read_file(path)); }

inline Json to_json(const Graph& graph) {
  Json doc;
  doc["nodes"] = graph.ids();
  Json edges = Json::array();
  for (const Edge& e : graph.edges()) {
    Json item;
    item["from"] = graph.id(e.from);
    item["to"] = graph.id(e.to);
    item["amp"] = e.amp;
    item["amp_back"] = e.amp_back;
    if (e.m) item["m"] = *e.m;
    edges.push_back(std::move(item));
  }
  doc["edges"] = std::move(edges);
  return doc;
}

inline std::string save_graph(const Graph& graph) { return to_json(graph).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Positions

inline Json to_json(const Position& p) { return Json(std::vector<double>(p.values().begin(), p.values().end())); }

inline Json to_json(const Triple& t) { return Json::array({t[0], t[1], t[2]}); }

/// "omega<i>" (1-based, graph node order) or comma-separated decimals.
inline Position parse_position(const Graph& graph, std::string_view text) {
  const std::size_t n = graph.node_count();
  if (text.rfind("omega", 0) == 0) {
    const std::string index(text.substr(5));
    std::size_t used = 0;
    int i = 0;
    try {
      i = std::stoi(index, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != index.size() || i < 1 || static_cast<std::size_t>(i) > n) {
      throw ParseError("start: '" + std::string(text) + "' is not omega1..omega" + std::to_string(n));
    }
    return Position::fundamental(n, static_cast<NodeId>(i - 1));
  }
  std::vector<double> values;
  std::stringstream ss{std::string(text)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
      if (used != item.size()) throw ParseError("trailing characters");
    } catch (const std::exception&) {
      throw ParseError("start: cannot parse '" + item + "' as a number");
    }
  }
  if (values.size() != n) {
    throw ParseError(fmt::format("start: expected {} values, got {}", n, values.size()));
  }
  return Position(std::move(values));
}

// ---------------------------------------------------------------------------
// Traces

inline Json to_json(const GameTrace& trace, const std::string& strategy = {}) {
  Json doc;
  doc["schema"] = kTraceSchema;
  doc["graph"] = to_json(trace.graph);
  if (!strategy.empty()) doc["strategy"] = strategy;
  doc["initial"] = to_json(trace.initial);
  Json events = Json::array();
  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    const FiringEvent& e = trace.events[i];
    Json item;
    item["index"] = i;
    item["node"] = trace.graph.id(e.node);
    item["fired_value"] = e.fired_value;
    item["before"] = to_json(e.before);
    item["after"] = to_json(e.after);
    events.push_back(std::move(item));
  }
  doc["events"] = std::move(events);
  doc["outcome"] = to_string(trace.outcome);
  doc["moves"] = trace.events.size();
  doc["final"] = to_json(trace.final_position());
  if (!trace.diagnostic.empty()) doc["diagnostic"] = trace.diagnostic;
  return doc;
}

inline std::string format_real(double v) { return fmt::format("{:.17g}", v); }

/// One row per event: index, node, fired_value, then the after-values.
inline std::string trace_csv(const GameTrace& trace) {
  std::string out = "index,node,fired_value";
  for (const auto& id : trace.graph.ids()) out += "," + id;
  out += "\n";
  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    const FiringEvent& e = trace.events[i];
    out += fmt::format("{},{},{}", i, trace.graph.id(e.node), format_real(e.fired_value));
    for (double v : e.after.values()) out += "," + format_real(v);
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports and certificates

inline Json to_json(const ValidationReport& report, const Graph& graph) {
  Json doc;
  Json edges = Json::array();
  for (const EdgeReport& r : report.edges) {
    Json item;
    item["from"] = graph.id(r.from);
    item["to"] = graph.id(r.to);
    item["amp"] = r.amp;
    item["amp_back"] = r.amp_back;
    item["positive"] = r.positive;
    item["product"] = r.product;
    item["declared_m"] = r.declared_m ? Json(*r.declared_m) : Json(nullptr);
    item["matches_declared_m"] = r.matches_declared_m ? Json(*r.matches_declared_m) : Json(nullptr);
    item["m"] = r.effective_m ? Json(*r.effective_m) : Json(nullptr);
    item["odd"] = r.odd;
    item["odd_neighborly"] = r.odd_neighborly;
    edges.push_back(std::move(item));
  }
  doc["edges"] = std::move(edges);
  doc["is_triangle"] = report.is_triangle;
  doc["engine_playable"] = report.engine_playable;
  doc["prop1_eligible"] = report.prop1_eligible;
  doc["problems"] = report.problems;
  return doc;
}

inline Json to_json(const ConditionStarStatus& s) {
  return Json{{"sign_ok", s.sign_ok}, {"linear_form", s.linear_form}, {"holds", s.holds}};
}

inline Json labels_json(const Cyclic3Labels& l, const Graph& graph) {
  return Json{{"gamma1", graph.id(l.gamma1)}, {"gamma2", graph.id(l.gamma2)}, {"gamma3", graph.id(l.gamma3)},
              {"p", l.p}, {"q", l.q}, {"p1", l.p1}, {"q1", l.q1}, {"p2", l.p2}, {"q2", l.q2}};
}

inline Json to_json(const Inequalities& ineq) {
  return Json{{"i", ineq.i}, {"ii", ineq.ii}, {"iii", ineq.iii}, {"hold", ineq.holds()}};
}

inline Json certificate_json(const Prop1Certificate& cert, const Graph& graph,
                             std::optional<std::uint64_t> seed = std::nullopt) {
  const auto ids = [&](const std::vector<NodeId>& seq) {
    Json out = Json::array();
    for (NodeId n : seq) out.push_back(graph.id(n));
    return out;
  };
  Json doc;
  doc["schema"] = kCertificateSchema;
  doc["graph"] = to_json(graph);
  doc["labels"] = labels_json(cert.labels, graph);
  doc["position_order"] = Json::array({graph.id(cert.labels.gamma1), graph.id(cert.labels.gamma2),
                                       graph.id(cert.labels.gamma3)});
  doc["m12"] = cert.m12;
  doc["kappa1"] = cert.kappa1;
  doc["kappa2"] = cert.kappa2;
  doc["cstar1"] = cert.cstar1;
  doc["cstar2"] = cert.cstar2;
  doc["inequalities"] = to_json(cert.ineq);
  doc["n_cycles"] = cert.n_cycles;
  if (seed) doc["seed"] = *seed;
  Json fundamentals = Json::array();
  for (const FundamentalEvidence& ev : cert.fundamentals) {
    Json item;
    item["name"] = ev.name;
    item["start"] = to_json(ev.start);
    item["preprocessed_by_firing_gamma3"] = ev.preprocessed;
    item["certified_start"] = to_json(ev.certified_start);
    item["condition_star"] = to_json(ev.status);
    Json chain = Json::array();
    for (const MacroCycleWitness& w : ev.chain) {
      chain.push_back(Json{{"position", to_json(w.position)},
                           {"sequence", ids(w.sequence)},
                           {"lambda_prime", to_json(w.lambda_prime)},
                           {"next", to_json(w.next)},
                           {"linear_form", w.linear_form},
                           {"next_linear_form", w.next_linear_form}});
    }
    item["chain"] = std::move(chain);
    item["linear_form_strictly_increasing"] = ev.linear_form_strictly_increasing;
    item["linear_form_nondecreasing"] = ev.linear_form_nondecreasing;
    fundamentals.push_back(std::move(item));
  }
  doc["fundamentals"] = std::move(fundamentals);
  doc["conclusion"] =
      "a divergent game sequence exists from every fundamental position; non-admissibility follows "
      "by the cited reduction (not re-verified here)";
  doc["verdict"] = cert.verdict;
  return doc;
}

// ---------------------------------------------------------------------------
// Matrix dumps

inline Json to_json(const RepMatrix& m) {
  Json rows = Json::array();
  for (const auto& row : m.entries) rows.push_back(Json::array({row[0], row[1], row[2]}));
  Json doc{{"variant", to_string(m.variant)}, {"entries", rows}};
  if (m.k) doc["k"] = *m.k;
  if (m.theta) doc["theta"] = *m.theta;
  return doc;
}

inline std::string to_text(const RepMatrix& m) {
  std::string out = to_string(m.variant);
  if (m.k) out += fmt::format(" k={}", *m.k);
  if (m.theta) out += fmt::format(" theta={:.12g}", *m.theta);
  out += "\n";
  for (const auto& row : m.entries) out += fmt::format("  [{:>20.12g} {:>20.12g} {:>20.12g}]\n", row[0], row[1], row[2]);
  return out;
}

}  // namespace egame
