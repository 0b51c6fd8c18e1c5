#pragma once

// E-GCM graphs: nodes with directed positive amplitude pairs on edges, plus the
// structural checks needed before a three-node cyclic graph can be certified.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "egame/error.hpp"

namespace egame {

using NodeId = std::size_t;

/// Tolerance on |a(i->j) a(j->i) - 4cos^2(pi/m)|.
inline constexpr double kProductTolerance = 1e-12;

/// Residual allowed when recovering m from an amplitude product.
inline constexpr double kRecoveryTolerance = 1e-6;

/// 4cos^2(pi/m), the amplitude product of an edge labelled m. Exact for m = 2, 3, 4, 6.
inline double amplitude_product_for_m(int m) {
  if (m < 2) {
    throw DomainError("amplitude_product_for_m: m must be >= 2, got " + std::to_string(m));
  }
  switch (m) {
    case 2: return 0.0;
    case 3: return 1.0;
    case 4: return 2.0;
    case 6: return 3.0;
    default: break;
  }
  const double c = std::cos(std::numbers::pi / static_cast<double>(m));
  return 4.0 * c * c;
}

/// Inverse of amplitude_product_for_m on [0, 4). Returns nullopt when the
/// product is not 4cos^2(pi/m) for an integer m >= 2 within kRecoveryTolerance.
inline std::optional<int> recover_m(double product) {
  if (!std::isfinite(product) || product < 0.0 || product >= 4.0) return std::nullopt;
  const double half_root = std::sqrt(product) / 2.0;
  const double angle = std::acos(std::clamp(half_root, -1.0, 1.0));
  if (angle <= 0.0) return std::nullopt;
  const double exact = std::numbers::pi / angle;
  const double rounded = std::round(exact);
  if (std::abs(exact - rounded) > kRecoveryTolerance || rounded < 2.0) return std::nullopt;
  return static_cast<int>(rounded);
}

struct Edge {
  NodeId from = 0;
  NodeId to = 0;
  double amp = 0.0;       // carried from -> to
  double amp_back = 0.0;  // carried to -> from
  std::optional<int> m;
};

/// The game board. Amplitudes are stored as positive magnitudes; the
/// corresponding generalized Cartan entries are their negatives.
///
/// Construction only enforces what makes the board well formed (unique ids,
/// known endpoints, no loops, at most one edge per pair). Numeric hypotheses
/// such as positivity and odd-neighborliness are reported by validate().
class Graph {
public:
  Graph() = default;

  Graph(std::vector<std::string> ids, std::vector<Edge> edges)
      : ids_(std::move(ids)), edges_(std::move(edges)) {
    const std::size_t n = ids_.size();
    if (n == 0) throw StructureError("graph must have at least one node");
    for (std::size_t i = 0; i < n; ++i) {
      if (!index_.emplace(ids_[i], i).second) {
        throw StructureError("duplicate node id '" + ids_[i] + "'");
      }
    }
    amp_.assign(n * n, 0.0);
    edge_of_.assign(n * n, kNoEdge);
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const Edge& edge = edges_[e];
      if (edge.from >= n || edge.to >= n) throw StructureError("edge endpoint out of range");
      if (edge.from == edge.to) throw StructureError("self-loop on node '" + ids_[edge.from] + "'");
      if (edge_of_[edge.from * n + edge.to] != kNoEdge) {
        throw StructureError("duplicate edge {" + ids_[edge.from] + "," + ids_[edge.to] + "}");
      }
      amp_[edge.from * n + edge.to] = edge.amp;
      amp_[edge.to * n + edge.from] = edge.amp_back;
      edge_of_[edge.from * n + edge.to] = e;
      edge_of_[edge.to * n + edge.from] = e;
    }
  }

  std::size_t node_count() const noexcept { return ids_.size(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::string& id(NodeId i) const { return ids_.at(i); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  std::optional<NodeId> index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool adjacent(NodeId i, NodeId j) const {
    check(i);
    check(j);
    return edge_of_[i * node_count() + j] != kNoEdge;
  }

  /// Magnitude added to j per unit fired at i; 0 when not adjacent.
  double amplitude(NodeId i, NodeId j) const {
    check(i);
    check(j);
    return amp_[i * node_count() + j];
  }

  std::optional<int> edge_m(NodeId i, NodeId j) const {
    check(i);
    check(j);
    const std::size_t e = edge_of_[i * node_count() + j];
    if (e == kNoEdge) return std::nullopt;
    return edges_[e].m;
  }

  std::vector<NodeId> neighbors(NodeId i) const {
    std::vector<NodeId> out;
    for (NodeId j = 0; j < node_count(); ++j) {
      if (j != i && adjacent(i, j)) out.push_back(j);
    }
    return out;
  }

private:
  static constexpr std::size_t kNoEdge = static_cast<std::size_t>(-1);

  void check(NodeId i) const {
    if (i >= node_count()) throw StructureError("node index " + std::to_string(i) + " out of range");
  }

  std::vector<std::string> ids_;
  std::vector<Edge> edges_;
  std::unordered_map<std::string, NodeId> index_;
  std::vector<double> amp_;
  std::vector<std::size_t> edge_of_;
};

/// Amplitude labels of a three-node cyclic graph in canonical position.
/// p: g1->g2, q: g2->g1, p1: g1->g3, q1: g3->g1, p2: g2->g3, q2: g3->g2.
struct Cyclic3Labels {
  NodeId gamma1 = 0;
  NodeId gamma2 = 1;
  NodeId gamma3 = 2;
  double p = 1.0;
  double q = 1.0;
  double p1 = 1.0;
  double q1 = 1.0;
  double p2 = 1.0;
  double q2 = 1.0;

  double pq() const noexcept { return p * q; }
  double root_pq() const noexcept { return std::sqrt(p * q); }

  /// pq <= p1 q1 and pq <= p2 q2.
  bool ordering_holds() const noexcept {
    return pq() <= p1 * q1 + kProductTolerance && pq() <= p2 * q2 + kProductTolerance;
  }

  /// 1 <= pq < 4, i.e. the {g1,g2} edge can carry an odd m >= 3.
  bool range_holds() const noexcept { return pq() >= 1.0 - kProductTolerance && pq() < 4.0; }

  std::array<NodeId, 3> gammas() const noexcept { return {gamma1, gamma2, gamma3}; }
};

/// m12 recovered from pq; must be odd and >= 3.
inline int recover_m12(const Cyclic3Labels& labels) {
  const auto m = recover_m(labels.pq());
  if (!m || *m < 3 || *m % 2 == 0) {
    throw DomainError("pq = " + std::to_string(labels.pq()) +
                      " is not 4cos^2(pi/m) for an odd m >= 3");
  }
  return *m;
}

/// Triangle on ids g1, g2, g3. For each edge e the two amplitudes are
/// s_e sqrt(P_e) (forward) and sqrt(P_e)/s_e (back) with P_e = 4cos^2(pi/m_e).
/// Edge order: {g1,g2} (m12), {g1,g3} (m13), {g2,g3} (m23).
inline Graph make_cyclic3(int m12, int m13, int m23, std::array<double, 3> splits = {1.0, 1.0, 1.0}) {
  const std::array<int, 3> ms{m12, m13, m23};
  for (int m : ms) {
    if (m < 3 || m % 2 == 0) {
      throw ValidationError("odd-neighborly required: m = " + std::to_string(m) +
                            " is not an odd integer >= 3");
    }
  }
  for (double s : splits) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw DomainError("split must be positive and finite, got " + std::to_string(s));
    }
  }
  constexpr std::array<std::pair<NodeId, NodeId>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
  std::vector<Edge> edges;
  for (std::size_t e = 0; e < 3; ++e) {
    const double root = std::sqrt(amplitude_product_for_m(ms[e]));
    edges.push_back({pairs[e].first, pairs[e].second, splits[e] * root, root / splits[e], ms[e]});
  }
  return Graph({"g1", "g2", "g3"}, std::move(edges));
}

// ---------------------------------------------------------------------------
// Validation

struct EdgeReport {
  NodeId from = 0;
  NodeId to = 0;
  double amp = 0.0;
  double amp_back = 0.0;
  bool positive = false;
  double product = 0.0;
  std::optional<int> declared_m;
  std::optional<bool> matches_declared_m;  // empty when no m declared
  std::optional<int> effective_m;          // declared if it matches, else recovered
  bool odd = false;
  bool odd_neighborly = false;
};

struct ValidationReport {
  std::vector<EdgeReport> edges;
  bool is_triangle = false;
  bool engine_playable = false;
  bool prop1_eligible = false;
  std::vector<std::string> problems;
};

inline ValidationReport validate(const Graph& graph) {
  ValidationReport report;
  bool all_positive = true;
  bool all_odd_neighborly = true;
  for (const Edge& edge : graph.edges()) {
    EdgeReport r;
    r.from = edge.from;
    r.to = edge.to;
    r.amp = edge.amp;
    r.amp_back = edge.amp_back;
    const std::string name = "{" + graph.id(edge.from) + "," + graph.id(edge.to) + "}";
    r.positive = std::isfinite(edge.amp) && std::isfinite(edge.amp_back) && edge.amp > 0.0 &&
                 edge.amp_back > 0.0;
    if (!r.positive) report.problems.push_back("edge " + name + ": amplitudes must be positive");
    r.product = edge.amp * edge.amp_back;
    r.declared_m = edge.m;
    if (edge.m) {
      if (*edge.m < 2) {
        r.matches_declared_m = false;
        report.problems.push_back("edge " + name + ": declared m < 2");
      } else {
        r.matches_declared_m =
            std::abs(r.product - amplitude_product_for_m(*edge.m)) <= kProductTolerance;
        if (*r.matches_declared_m) {
          r.effective_m = edge.m;
        } else {
          report.problems.push_back("edge " + name + ": product " + std::to_string(r.product) +
                                    " != 4cos^2(pi/" + std::to_string(*edge.m) + ")");
        }
      }
    } else if (r.positive) {
      r.effective_m = recover_m(r.product);
    }
    r.odd = r.effective_m && *r.effective_m >= 3 && *r.effective_m % 2 == 1;
    r.odd_neighborly = r.positive && r.odd;
    if (!r.odd_neighborly && r.positive) {
      report.problems.push_back("edge " + name + ": not odd-neighborly");
    }
    all_positive = all_positive && r.positive;
    all_odd_neighborly = all_odd_neighborly && r.odd_neighborly;
    report.edges.push_back(r);
  }
  report.is_triangle = graph.node_count() == 3 && graph.edges().size() == 3;
  report.engine_playable = all_positive;
  report.prop1_eligible = report.is_triangle && all_odd_neighborly;
  if (!report.is_triangle) report.problems.push_back("not a three-node triangle");
  return report;
}

/// Relabels an eligible triangle so the edge of least amplitude product is
/// {g1,g2}. Ties go to the lexicographically smallest (sorted) id pair, and g1
/// is the smaller id of that pair.
inline Cyclic3Labels canonicalize_prop1(const Graph& graph) {
  if (graph.node_count() != 3) throw StructureError("canonicalize_prop1: graph is not a triangle");
  for (NodeId i = 0; i < 3; ++i) {
    for (NodeId j = i + 1; j < 3; ++j) {
      if (!graph.adjacent(i, j)) {
        throw StructureError("canonicalize_prop1: missing edge {" + graph.id(i) + "," +
                             graph.id(j) + "}");
      }
    }
  }
  const ValidationReport report = validate(graph);
  if (!report.prop1_eligible) {
    std::string why = "canonicalize_prop1: not every pair is odd-neighborly";
    for (const auto& p : report.problems) why += "; " + p;
    throw StructureError(why);
  }

  using Key = std::tuple<double, std::string, std::string, NodeId, NodeId>;
  std::optional<Key> best;
  for (NodeId i = 0; i < 3; ++i) {
    for (NodeId j = i + 1; j < 3; ++j) {
      NodeId lo = i, hi = j;
      if (graph.id(hi) < graph.id(lo)) std::swap(lo, hi);
      Key key{graph.amplitude(lo, hi) * graph.amplitude(hi, lo), graph.id(lo), graph.id(hi), lo, hi};
      if (!best) {
        best = key;
        continue;
      }
      const double diff = std::get<0>(key) - std::get<0>(*best);
      const bool tie = std::abs(diff) <= kProductTolerance;
      if ((!tie && diff < 0.0) ||
          (tie && std::tie(std::get<1>(key), std::get<2>(key)) <
                      std::tie(std::get<1>(*best), std::get<2>(*best)))) {
        best = key;
      }
    }
  }
  Cyclic3Labels labels;
  labels.gamma1 = std::get<3>(*best);
  labels.gamma2 = std::get<4>(*best);
  labels.gamma3 = 3 - labels.gamma1 - labels.gamma2;
  const auto a = [&](NodeId from, NodeId to) { return graph.amplitude(from, to); };
  labels.p = a(labels.gamma1, labels.gamma2);
  labels.q = a(labels.gamma2, labels.gamma1);
  labels.p1 = a(labels.gamma1, labels.gamma3);
  labels.q1 = a(labels.gamma3, labels.gamma1);
  labels.p2 = a(labels.gamma2, labels.gamma3);
  labels.q2 = a(labels.gamma3, labels.gamma2);
  return labels;
}

/// Labels with gammas (0, 1, 2), for working directly from amplitude values.
inline Cyclic3Labels labels_from_amplitudes(double p, double q, double p1, double q1, double p2,
                                            double q2) {
  Cyclic3Labels labels;
  labels.p = p;
  labels.q = q;
  labels.p1 = p1;
  labels.q1 = q1;
  labels.p2 = p2;
  labels.q2 = q2;
  return labels;
}

/// Triangle whose canonical labels are exactly `labels`, nodes g1, g2, g3.
inline Graph graph_from_labels(const Cyclic3Labels& labels) {
  std::vector<Edge> edges{
      {0, 1, labels.p, labels.q, recover_m(labels.p * labels.q)},
      {0, 2, labels.p1, labels.q1, recover_m(labels.p1 * labels.q1)},
      {1, 2, labels.p2, labels.q2, recover_m(labels.p2 * labels.q2)},
  };
  for (Edge& e : edges) {
    if (e.m && std::abs(e.amp * e.amp_back - amplitude_product_for_m(*e.m)) > kProductTolerance) {
      e.m.reset();
    }
  }
  return Graph({"g1", "g2", "g3"}, std::move(edges));
}

}  // namespace egame
