#pragma once

// The numbers game on an arbitrary E-GCM graph: legality, firing, strategies,
// and traced play.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "egame/error.hpp"
#include "egame/graph.hpp"

namespace egame {

/// A value is "positive" (fireable) iff it exceeds this.
inline constexpr double kLegalEpsilon = 1e-9;

class Position {
public:
  Position() = default;
  explicit Position(std::vector<double> values) : values_(std::move(values)) { check_finite(); }
  Position(std::initializer_list<double> values) : values_(values) { check_finite(); }

  /// Indicator vector of node i (a fundamental position).
  static Position fundamental(std::size_t n, NodeId i) {
    if (i >= n) throw DomainError("fundamental position index out of range");
    std::vector<double> v(n, 0.0);
    v[i] = 1.0;
    return Position(std::move(v));
  }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_.at(i); }
  std::span<const double> values() const noexcept { return values_; }

  bool operator==(const Position&) const = default;

private:
  void check_finite() const {
    for (double v : values_) {
      if (!std::isfinite(v)) throw DomainError("position values must be finite");
    }
  }

  std::vector<double> values_;
};

inline double max_abs_diff(const Position& a, const Position& b) {
  if (a.size() != b.size()) throw StructureError("position dimension mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

inline double max_abs(const Position& a) {
  double worst = 0.0;
  for (double v : a.values()) worst = std::max(worst, std::abs(v));
  return worst;
}

namespace detail {
inline void check_dimension(const Graph& graph, const Position& position) {
  if (position.size() != graph.node_count()) {
    throw StructureError("position has " + std::to_string(position.size()) + " values, graph has " +
                         std::to_string(graph.node_count()) + " nodes");
  }
}
}  // namespace detail

inline bool is_legal(const Position& position, NodeId node) {
  return node < position.size() && position[node] > kLegalEpsilon;
}

/// Nodes whose value exceeds kLegalEpsilon, in index order.
inline std::vector<NodeId> legal_moves(const Graph& graph, const Position& position) {
  detail::check_dimension(graph, position);
  std::vector<NodeId> out;
  for (NodeId i = 0; i < position.size(); ++i) {
    if (is_legal(position, i)) out.push_back(i);
  }
  return out;
}

/// Fires `node`: its value v changes sign and each neighbor j gains amplitude(node, j) * v.
inline Position fire(const Graph& graph, const Position& position, NodeId node) {
  detail::check_dimension(graph, position);
  if (node >= graph.node_count()) throw StructureError("no node with index " + std::to_string(node));
  const double v = position[node];
  if (!(v > kLegalEpsilon)) {
    throw IllegalMove(node, v,
                      "illegal firing of node '" + graph.id(node) + "' with value " + std::to_string(v));
  }
  std::vector<double> next(position.values().begin(), position.values().end());
  for (NodeId j = 0; j < next.size(); ++j) {
    if (j != node) next[j] += graph.amplitude(node, j) * v;
  }
  next[node] = -v;
  return Position(std::move(next));
}

struct FiringEvent {
  NodeId node = 0;
  Position before;
  Position after;
  double fired_value = 0.0;
};

enum class Outcome {
  terminated,          // no node is positive
  move_limit_reached,  // max_moves firings made, legal moves remain
  aborted,             // strategy picked an illegal node
  stopped,             // strategy declined to move although legal moves remain
};

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::terminated: return "terminated";
    case Outcome::move_limit_reached: return "move_limit_reached";
    case Outcome::aborted: return "aborted";
    case Outcome::stopped: return "stopped";
  }
  return "unknown";
}

struct GameTrace {
  Graph graph;
  Position initial;
  std::vector<FiringEvent> events;
  Outcome outcome = Outcome::terminated;
  std::string diagnostic;

  const Position& final_position() const { return events.empty() ? initial : events.back().after; }
  std::size_t move_count() const noexcept { return events.size(); }
};

/// Chooses the next node to fire given the current position and its legal
/// moves. Returning nullopt stops play. A strategy may keep state (an RNG, a
/// cursor) so an instance must not be shared across concurrent plays.
class Strategy {
public:
  using Pick = std::function<std::optional<NodeId>(const Position&, std::span<const NodeId>)>;

  Strategy(std::string name, Pick pick) : name_(std::move(name)), pick_(std::move(pick)) {}

  const std::string& name() const noexcept { return name_; }
  std::optional<NodeId> operator()(const Position& position, std::span<const NodeId> legal) {
    return pick_(position, legal);
  }

private:
  std::string name_;
  Pick pick_;
};

/// Fires the listed nodes verbatim, then stops. Illegal entries abort play.
inline Strategy fixed_sequence(std::vector<NodeId> nodes) {
  auto cursor = std::make_shared<std::size_t>(0);
  return Strategy("fixed_sequence",
                  [nodes = std::move(nodes), cursor](const Position&, std::span<const NodeId>)
                      -> std::optional<NodeId> {
                    if (*cursor >= nodes.size()) return std::nullopt;
                    return nodes[(*cursor)++];
                  });
}

/// Uniform choice among legal moves; reproducible for a given seed.
inline Strategy random_seeded(std::uint64_t seed) {
  auto rng = std::make_shared<std::mt19937_64>(seed);
  return Strategy("random_seeded", [rng](const Position&, std::span<const NodeId> legal)
                                       -> std::optional<NodeId> {
    if (legal.empty()) return std::nullopt;
    std::uniform_int_distribution<std::size_t> pick(0, legal.size() - 1);
    return legal[pick(*rng)];
  });
}

/// Legal node of largest value; ties go to the lowest index.
inline Strategy greedy_max() {
  return Strategy("greedy_max", [](const Position& position, std::span<const NodeId> legal)
                                    -> std::optional<NodeId> {
    if (legal.empty()) return std::nullopt;
    NodeId best = legal.front();
    for (NodeId n : legal) {
      if (position[n] > position[best]) best = n;
    }
    return best;
  });
}

inline GameTrace play(const Graph& graph, const Position& start, Strategy& strategy,
                      std::size_t max_moves) {
  detail::check_dimension(graph, start);
  GameTrace trace{graph, start, {}, Outcome::terminated, {}};
  Position current = start;
  while (true) {
    const auto legal = legal_moves(graph, current);
    if (legal.empty()) {
      trace.outcome = Outcome::terminated;
      break;
    }
    if (trace.events.size() >= max_moves) {
      trace.outcome = Outcome::move_limit_reached;
      break;
    }
    const auto choice = strategy(current, legal);
    if (!choice) {
      trace.outcome = Outcome::stopped;
      trace.diagnostic = strategy.name() + " stopped with legal moves remaining";
      break;
    }
    if (!is_legal(current, *choice) || *choice >= graph.node_count()) {
      trace.outcome = Outcome::aborted;
      trace.diagnostic = strategy.name() + " chose illegal node " +
                         (*choice < graph.node_count() ? "'" + graph.id(*choice) + "'"
                                                       : std::to_string(*choice)) +
                         (*choice < current.size() ? " with value " + std::to_string(current[*choice])
                                                   : std::string{});
      break;
    }
    Position next = fire(graph, current, *choice);
    trace.events.push_back({*choice, current, next, current[*choice]});
    current = std::move(next);
  }
  return trace;
}

inline GameTrace play(const Graph& graph, const Position& start, Strategy&& strategy,
                      std::size_t max_moves) {
  return play(graph, start, strategy, max_moves);
}

}  // namespace egame
