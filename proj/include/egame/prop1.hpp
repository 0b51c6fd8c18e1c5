#pragma once

// Divergence machinery for three-node cyclic graphs whose node pairs are all
// odd-neighborly. Positions are handled as triples (a, b, c) in canonical
// (g1, g2, g3) order; to_position/to_triple convert to and from graph order.
//
// Condition (*): a >= 0, b >= 0, c <= 0 and L(a, b, c) > 0, where
//   L = (kappa1 - p/(q2 sqrt(pq))) a + (kappa2 - q/(q1 sqrt(pq))) b + c.
// From any such position the alternating g1/g2 firings followed by one g3
// firing (a macro-cycle) are legal and land on another condition-(*) position.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <fmt/format.h>

#include "egame/engine.hpp"
#include "egame/error.hpp"
#include "egame/graph.hpp"
#include "egame/kappa.hpp"
#include "egame/matrix.hpp"

namespace egame {

using Triple = std::array<double, 3>;

inline constexpr int kDefaultCycles = 25;
inline constexpr double kWitnessTolerance = 1e-9;

inline Triple to_triple(const Cyclic3Labels& l, const Position& position) {
  if (position.size() != 3) throw StructureError("expected a three-node position");
  return {position[l.gamma1], position[l.gamma2], position[l.gamma3]};
}

inline Position to_position(const Cyclic3Labels& l, const Triple& t) {
  std::vector<double> v(3);
  v[l.gamma1] = t[0];
  v[l.gamma2] = t[1];
  v[l.gamma3] = t[2];
  return Position(std::move(v));
}

inline double max_abs_diff(const Triple& a, const Triple& b) {
  return std::max({std::abs(a[0] - b[0]), std::abs(a[1] - b[1]), std::abs(a[2] - b[2])});
}

inline double max_abs(const Triple& t) {
  return std::max({std::abs(t[0]), std::abs(t[1]), std::abs(t[2])});
}

struct ConditionStarStatus {
  bool sign_ok = false;
  double linear_form = 0.0;
  bool holds = false;
};

inline double linear_form(const Cyclic3Labels& l, const Triple& t) {
  const auto [c1, c2] = cstar_coefficients(l);
  return c1 * t[0] + c2 * t[1] + t[2];
}

inline ConditionStarStatus condition_star(const Cyclic3Labels& l, const Triple& t) {
  ConditionStarStatus s;
  s.sign_ok = t[0] >= 0.0 && t[1] >= 0.0 && t[2] <= 0.0;
  s.linear_form = linear_form(l, t);
  s.holds = s.sign_ok && s.linear_form > kLegalEpsilon;
  return s;
}

namespace detail {
inline void require_condition_star(const Cyclic3Labels& l, const Triple& t, const char* op) {
  const auto s = condition_star(l, t);
  if (!s.holds) {
    throw PreconditionError(std::string(op) + ": condition (*) fails (sign_ok=" +
                            (s.sign_ok ? "true" : "false") +
                            ", linear form=" + std::to_string(s.linear_form) + ")");
  }
}
}  // namespace detail

enum class ClaimCase { both_positive, only_a, only_b };

inline const char* to_string(ClaimCase c) {
  switch (c) {
    case ClaimCase::both_positive: return "I";
    case ClaimCase::only_a: return "II";
    case ClaimCase::only_b: return "III";
  }
  return "?";
}

inline ClaimCase claim_case(const Cyclic3Labels& l, const Triple& t) {
  detail::require_condition_star(l, t, "claim_case");
  const bool a = t[0] > kLegalEpsilon;
  const bool b = t[1] > kLegalEpsilon;
  if (a && b) return ClaimCase::both_positive;
  if (a) return ClaimCase::only_a;
  if (b) return ClaimCase::only_b;
  throw PreconditionError("claim_case: a and b are both non-positive");
}

/// Alternating g1/g2 firings that carry a condition-(*) position to
/// lambda_prime. Length m12 when a, b > 0, else m12 - 1 starting from the
/// positive node. Entries are graph node indices.
inline std::vector<NodeId> claim_sequence(const Cyclic3Labels& l, const Triple& t) {
  const ClaimCase which = claim_case(l, t);
  const int m12 = recover_m12(l);
  const int length = which == ClaimCase::both_positive ? m12 : m12 - 1;
  const NodeId first = which == ClaimCase::only_b ? l.gamma2 : l.gamma1;
  const NodeId second = which == ClaimCase::only_b ? l.gamma1 : l.gamma2;
  std::vector<NodeId> seq;
  seq.reserve(static_cast<std::size_t>(length));
  for (int i = 0; i < length; ++i) seq.push_back(i % 2 == 0 ? first : second);
  return seq;
}

/// (-q b/sqrt(pq), -p a/sqrt(pq), kappa1 a + kappa2 b + c).
inline Triple lambda_prime(const Cyclic3Labels& l, const Triple& t) {
  detail::require_condition_star(l, t, "lambda_prime");
  const Kappas k = kappas(l);
  const double r = l.root_pq();
  return {-l.q * t[1] / r, -l.p * t[0] / r, k.kappa1 * t[0] + k.kappa2 * t[1] + t[2]};
}

/// Closed form of one macro-cycle without the condition-(*) precondition; an
/// algebraic map defined for every real triple.
inline Triple macro_cycle_map(const Cyclic3Labels& l, const Triple& t) {
  const Kappas k = kappas(l);
  const auto [c1, c2] = cstar_coefficients(l);
  const double s = k.kappa1 * t[0] + k.kappa2 * t[1] + t[2];
  return {l.q1 * (k.kappa1 * t[0] + c2 * t[1] + t[2]), l.q2 * (c1 * t[0] + k.kappa2 * t[1] + t[2]), -s};
}

inline Triple macro_cycle(const Cyclic3Labels& l, const Triple& t) {
  detail::require_condition_star(l, t, "macro_cycle");
  return macro_cycle_map(l, t);
}

struct Inequalities {
  double i = 0.0;    // q1 (kappa1 - p/(q2 sqrt(pq))), at least 1
  double ii = 0.0;   // q2 (kappa2 - q/(q1 sqrt(pq))), at least 1
  double iii = 0.0;  // i + ii - 1, positive

  bool holds() const noexcept {
    constexpr double slack = 1e-12;
    return i >= 1.0 - slack && ii >= 1.0 - slack && iii > 0.0;
  }
};

inline Inequalities inequalities(const Cyclic3Labels& l) {
  const auto [c1, c2] = cstar_coefficients(l);
  Inequalities out;
  out.i = l.q1 * c1;
  out.ii = l.q2 * c2;
  out.iii = out.i + out.ii - 1.0;
  return out;
}

/// |L(macro_cycle(t)) - rhs(t)| for the expansion
///   L(t1) = c1 (iii) a + c2 (iii) b + (iii) c
///           + p/(q2 sqrt(pq)) ((i) - 1) a + q/(q1 sqrt(pq)) ((ii) - 1) b
/// with t = (a, b, c) arbitrary and t1 = macro_cycle_map(t).
inline double verify_identity(const Cyclic3Labels& l, const Triple& t) {
  const auto [c1, c2] = cstar_coefficients(l);
  const Inequalities ineq = inequalities(l);
  const double r = l.root_pq();
  const Triple next = macro_cycle_map(l, t);
  const double lhs = c1 * next[0] + c2 * next[1] + next[2];
  const double rhs = c1 * ineq.iii * t[0] + c2 * ineq.iii * t[1] + ineq.iii * t[2] +
                     l.p / (l.q2 * r) * (ineq.i - 1.0) * t[0] +
                     l.q / (l.q1 * r) * (ineq.ii - 1.0) * t[1];
  return std::abs(lhs - rhs);
}

// ---------------------------------------------------------------------------
// Legality audit: the value at each node just before it fires along the
// claim sequence, by simulation and by the closed-form pairing matrices.

struct AuditEntry {
  NodeId node = 0;
  double simulated = 0.0;
  double closed_form = 0.0;
};

struct LegalityAudit {
  ClaimCase which = ClaimCase::both_positive;
  std::vector<AuditEntry> entries;
  double max_disagreement = 0.0;
  bool all_positive = false;
  Triple result{};  // position after the sequence (simulated)
};

inline LegalityAudit legality_audit(const Cyclic3Labels& l, const Triple& t) {
  LegalityAudit audit;
  audit.which = claim_case(l, t);
  const auto seq = claim_sequence(l, t);

  Cyclic3Labels local = l;
  local.gamma1 = 0;
  local.gamma2 = 1;
  local.gamma3 = 2;
  const Graph board = graph_from_labels(local);
  Position pos({t[0], t[1], t[2]});

  const Vec3 lambda{t[0], t[1], t[2]};
  audit.all_positive = true;
  for (std::size_t step = 0; step < seq.size(); ++step) {
    const bool fires_g1 = seq[step] == l.gamma1;
    const NodeId local_node = fires_g1 ? 0 : 1;
    const int k = static_cast<int>(step / 2);
    double closed = 0.0;
    if (audit.which == ClaimCase::only_b) {
      // g2, g1, g2, ...: <lambda, (s2 s1)^k a2> then <lambda, s2 (s1 s2)^k a1>
      closed = step % 2 == 0 ? dot(lambda, column(closed_form_power(l, k, Variant::X21).entries, 1))
                             : dot(lambda, column(prefix_matrix(l, k, Variant::X2_X12_pow_k).entries, 0));
    } else {
      // g1, g2, g1, ...: <lambda, (s1 s2)^k a1> then <lambda, s1 (s2 s1)^k a2>
      closed = step % 2 == 0 ? dot(lambda, column(closed_form_power(l, k, Variant::X12).entries, 0))
                             : dot(lambda, column(prefix_matrix(l, k, Variant::X1_X21_pow_k).entries, 1));
    }
    const double simulated = pos[local_node];
    audit.entries.push_back({seq[step], simulated, closed});
    audit.max_disagreement = std::max(audit.max_disagreement, std::abs(simulated - closed));
    if (!(simulated > kLegalEpsilon) || !(closed > kLegalEpsilon)) {
      audit.all_positive = false;
      break;
    }
    pos = fire(board, pos, local_node);
  }
  audit.result = {pos[0], pos[1], pos[2]};
  return audit;
}

// ---------------------------------------------------------------------------
// Certificates

struct MacroCycleWitness {
  Triple position{};
  std::vector<NodeId> sequence;  // claim sequence then g3
  Triple lambda_prime{};
  Triple next{};
  double linear_form = 0.0;       // at `position`
  double next_linear_form = 0.0;  // at `next`
};

struct FundamentalEvidence {
  std::string name;  // omega1, omega2, omega3
  Triple start{};
  bool preprocessed = false;  // omega3: g3 fired first
  Triple certified_start{};   // start of the macro-cycle chain
  ConditionStarStatus status;
  std::vector<MacroCycleWitness> chain;
  bool linear_form_strictly_increasing = false;
  bool linear_form_nondecreasing = false;
};

struct Prop1Certificate {
  Cyclic3Labels labels;
  int m12 = 0;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double cstar1 = 0.0;
  double cstar2 = 0.0;
  Inequalities ineq;
  int n_cycles = kDefaultCycles;
  std::array<FundamentalEvidence, 3> fundamentals;
  std::string verdict;
};

inline constexpr const char* kVerdictNotAdmissible = "NOT ADMISSIBLE (Proposition 1)";
inline constexpr const char* kVerdictIneligible = "INELIGIBLE";

namespace detail {

inline double scaled_tolerance(const Triple& t) { return kWitnessTolerance * std::max(1.0, max_abs(t)); }

/// The linear form is too small relative to the position for double-precision
/// firings to resolve the next macro-cycle.
inline bool precision_exhausted(const Cyclic3Labels& l, const Triple& t) {
  return std::abs(linear_form(l, t)) <= kWitnessTolerance * max_abs(t);
}

/// One macro-cycle on the real board, checked against the closed forms.
inline MacroCycleWitness witness_cycle(const Graph& graph, const Cyclic3Labels& l, const Triple& t) {
  MacroCycleWitness w;
  w.position = t;
  w.linear_form = linear_form(l, t);
  w.sequence = claim_sequence(l, t);
  Position pos = to_position(l, t);
  for (NodeId node : w.sequence) {
    if (!is_legal(pos, node)) {
      throw VerificationError("claim sequence firing of '" + graph.id(node) + "' is illegal (value " +
                              std::to_string(pos[node]) + ")");
    }
    pos = fire(graph, pos, node);
  }
  w.lambda_prime = lambda_prime(l, t);
  const Triple simulated = to_triple(l, pos);
  if (max_abs_diff(simulated, w.lambda_prime) > scaled_tolerance(w.lambda_prime)) {
    throw VerificationError("simulated claim result disagrees with lambda_prime");
  }
  if (!(w.lambda_prime[0] <= 0.0 && w.lambda_prime[1] <= 0.0 && w.lambda_prime[2] > 0.0)) {
    throw VerificationError("lambda_prime has the wrong sign pattern");
  }
  pos = fire(graph, pos, l.gamma3);
  w.sequence.push_back(l.gamma3);
  w.next = macro_cycle(l, t);
  if (max_abs_diff(to_triple(l, pos), w.next) > scaled_tolerance(w.next)) {
    throw VerificationError("simulated macro-cycle disagrees with the closed form");
  }
  const auto status = condition_star(l, w.next);
  if (!status.holds || w.next[0] == 0.0 || w.next[1] == 0.0 || w.next[2] == 0.0) {
    throw VerificationError("macro-cycle output fails condition (*)");
  }
  w.next_linear_form = status.linear_form;
  return w;
}

}  // namespace detail

/// Builds the non-admissibility certificate: canonical labels, kappas,
/// inequality values, and for each fundamental position a chain of n_cycles
/// checked macro-cycles. Throws ValidationError for ineligible graphs and
/// VerificationError when any witness check fails.
inline Prop1Certificate divergence_certificate(const Graph& graph, int n_cycles = kDefaultCycles) {
  if (n_cycles < 1) throw DomainError("n_cycles must be >= 1");
  const ValidationReport report = validate(graph);
  if (!report.prop1_eligible) {
    std::string why = "ineligible graph";
    for (const auto& p : report.problems) why += "; " + p;
    throw ValidationError(why);
  }
  Prop1Certificate cert;
  cert.labels = canonicalize_prop1(graph);
  const Cyclic3Labels& l = cert.labels;
  cert.m12 = recover_m12(l);
  const Kappas k = kappas(l);
  cert.kappa1 = k.kappa1;
  cert.kappa2 = k.kappa2;
  std::tie(cert.cstar1, cert.cstar2) = cstar_coefficients(l);
  cert.ineq = inequalities(l);
  cert.n_cycles = n_cycles;
  if (!cert.ineq.holds()) throw VerificationError("inequalities (i)-(iii) fail on canonical labels");

  const std::array<Triple, 3> omegas{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  for (std::size_t f = 0; f < 3; ++f) {
    FundamentalEvidence& ev = cert.fundamentals[f];
    ev.name = "omega" + std::to_string(f + 1);
    ev.start = omegas[f];
    Triple t = omegas[f];
    if (f == 2) {
      // (0, 0, 1) has c > 0; firing g3 gives (q1, q2, -1).
      ev.preprocessed = true;
      t = to_triple(l, fire(graph, to_position(l, t), l.gamma3));
    }
    ev.certified_start = t;
    ev.status = condition_star(l, t);
    if (!ev.status.holds) throw VerificationError(ev.name + " does not reach condition (*)");
    ev.linear_form_strictly_increasing = true;
    ev.linear_form_nondecreasing = true;
    for (int c = 0; c < n_cycles; ++c) {
      if (detail::precision_exhausted(l, t)) {
        throw VerificationError(fmt::format(
            "{}: precision exhausted before macro-cycle {}: linear form {:.3g} is below the rounding level of "
            "|lambda| = {:.3g}",
            ev.name, c + 1, linear_form(l, t), max_abs(t)));
      }
      MacroCycleWitness w = detail::witness_cycle(graph, l, t);
      const double tol = kWitnessTolerance * std::max(1.0, std::abs(w.linear_form));
      if (!(w.next_linear_form > w.linear_form)) ev.linear_form_strictly_increasing = false;
      if (w.next_linear_form < w.linear_form - tol) ev.linear_form_nondecreasing = false;
      t = w.next;
      ev.chain.push_back(std::move(w));
    }
  }
  cert.verdict = kVerdictNotAdmissible;
  return cert;
}

// ---------------------------------------------------------------------------
// Long divergence runs. Macro-cycles grow positions geometrically, so once
// the largest value passes 2^512 the runner divides by a power of two (exact
// in floating point) and keeps the exponent. Legality is decided on the
// unscaled value, and the linear form is tracked as log.

inline constexpr int kRescaleExponent = 512;

struct DivergenceRun {
  std::size_t moves = 0;
  std::size_t cycles = 0;
  bool all_legal = true;
  bool terminated = false;  // reached a position with no legal move
  bool precision_exhausted = false;
  std::vector<double> log_linear_forms;  // log L at the start of each cycle
  bool strictly_increasing = true;
  bool nondecreasing = true;
  std::string diagnostic;
};

inline DivergenceRun divergence_run(const Graph& graph, const Cyclic3Labels& l, std::size_t fundamental,
                                    std::size_t max_moves) {
  if (fundamental > 2) throw DomainError("fundamental index must be 0, 1 or 2");
  DivergenceRun run;
  Triple t{0, 0, 0};
  t[fundamental] = 1.0;
  Position pos = to_position(l, t);
  int exponent = 0;  // true position = pos * 2^exponent

  const auto legal = [&](NodeId node) { return pos[node] > std::ldexp(kLegalEpsilon, -exponent); };
  const auto step = [&](NodeId node) {
    bool any = false;
    for (NodeId n = 0; n < graph.node_count(); ++n) any = any || legal(n);
    if (!any) {
      run.terminated = true;
      return false;
    }
    if (!legal(node)) {
      run.all_legal = false;
      run.diagnostic = fmt::format("illegal firing of '{}' after {} moves", graph.id(node), run.moves);
      return false;
    }
    if (!is_legal(pos, node)) {
      run.precision_exhausted = true;
      run.diagnostic = fmt::format("precision exhausted after {} moves: scaled value {:.3g} of '{}'", run.moves,
                                   pos[node], graph.id(node));
      return false;
    }
    pos = fire(graph, pos, node);
    ++run.moves;
    return true;
  };

  if (fundamental == 2 && !step(l.gamma3)) return run;
  while (run.moves < max_moves) {
    t = to_triple(l, pos);
    const auto status = condition_star(l, t);
    if (detail::precision_exhausted(l, t)) {
      run.precision_exhausted = true;
      run.diagnostic = fmt::format("precision exhausted after {} moves: linear form {:.3g} at |lambda| = {:.3g}",
                                   run.moves, status.linear_form, max_abs(t));
      return run;
    }
    if (!status.holds) {
      run.all_legal = false;
      run.diagnostic = fmt::format("condition (*) lost after {} moves", run.moves);
      return run;
    }
    const double log_form = exponent * std::numbers::ln2 + std::log(status.linear_form);
    if (!run.log_linear_forms.empty()) {
      const double prev = run.log_linear_forms.back();
      if (!(log_form > prev)) run.strictly_increasing = false;
      if (log_form < prev - kWitnessTolerance * std::max(1.0, std::abs(prev))) run.nondecreasing = false;
    }
    run.log_linear_forms.push_back(log_form);

    auto seq = claim_sequence(l, t);
    seq.push_back(l.gamma3);
    for (NodeId node : seq) {
      if (run.moves >= max_moves) break;
      if (!step(node)) return run;
    }
    if (run.moves >= max_moves) break;
    ++run.cycles;
    const int magnitude = std::ilogb(max_abs(pos));
    if (magnitude > kRescaleExponent) {
      std::vector<double> v(pos.values().begin(), pos.values().end());
      for (double& x : v) x = std::ldexp(x, -magnitude);
      pos = Position(std::move(v));
      exponent += magnitude;
    }
  }
  bool any = false;
  for (NodeId n = 0; n < graph.node_count(); ++n) any = any || legal(n);
  if (!any) run.terminated = true;
  return run;
}

}  // namespace egame
