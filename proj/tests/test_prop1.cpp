#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "egame/engine.hpp"
#include "egame/graph.hpp"
#include "egame/matrix.hpp"
#include "egame/prop1.hpp"
#include "oracle.hpp"

using namespace egame;
using egame::testing::Case;

namespace {

constexpr double kPhi = 1.6180339887498948482;

const Cyclic3Labels kOnes = labels_from_amplitudes(1, 1, 1, 1, 1, 1);

void expect_triple(const Triple& got, const Triple& want, double tol) {
  EXPECT_LE(max_abs_diff(got, want), tol) << "got (" << got[0] << ", " << got[1] << ", " << got[2] << ")";
}

/// Fires the claim sequence on the real board, failing on any illegal step.
Triple simulate_claim(const Graph& g, const Cyclic3Labels& l, const Triple& t) {
  Position pos = to_position(l, t);
  for (NodeId n : claim_sequence(l, t)) {
    EXPECT_TRUE(is_legal(pos, n));
    pos = fire(g, pos, n);
  }
  return to_triple(l, pos);
}

}  // namespace

TEST(Kappas, Examples) {
  const Kappas ones = kappas(kOnes);
  EXPECT_DOUBLE_EQ(ones.kappa1, 2.0);
  EXPECT_DOUBLE_EQ(ones.kappa2, 2.0);

  const Kappas golden = kappas(labels_from_amplitudes(1, 1, kPhi, kPhi, kPhi, kPhi));
  EXPECT_NEAR(golden.kappa1, 2 * kPhi, 1e-14);
  EXPECT_NEAR(golden.kappa2, 2 * kPhi, 1e-14);

  const auto split = labels_from_amplitudes(1, 1, 2, 0.5, 1, 1);
  EXPECT_DOUBLE_EQ(kappas(split).kappa1, 3.0);
  EXPECT_DOUBLE_EQ(kappas(split).kappa2, 3.0);
  EXPECT_TRUE(inequalities(split).holds());
}

TEST(Kappas, ProductFourIsDomainError) {
  EXPECT_THROW(kappas(labels_from_amplitudes(2, 2, 1, 1, 1, 1)), DomainError);
}

TEST(ConditionStar, Examples) {
  const auto w1 = condition_star(kOnes, {1, 0, 0});
  EXPECT_TRUE(w1.holds);
  EXPECT_DOUBLE_EQ(w1.linear_form, 1.0);
  const auto w3 = condition_star(kOnes, {0, 0, 1});
  EXPECT_FALSE(w3.sign_ok);
  EXPECT_FALSE(w3.holds);
  const auto zero = condition_star(kOnes, {0, 0, 0});
  EXPECT_TRUE(zero.sign_ok);
  EXPECT_FALSE(zero.holds);
}

TEST(ClaimSequence, ThreeCases) {
  EXPECT_EQ(claim_sequence(kOnes, {1, 0, 0}), (std::vector<NodeId>{0, 1}));
  EXPECT_EQ(claim_sequence(kOnes, {2, 1, -2}), (std::vector<NodeId>{0, 1, 0}));
  EXPECT_EQ(claim_sequence(kOnes, {0, 1, 0}), (std::vector<NodeId>{1, 0}));
  EXPECT_EQ(claim_case(kOnes, {2, 1, -2}), ClaimCase::both_positive);
}

TEST(ClaimSequence, LengthFollowsM12) {
  const auto l = canonicalize_prop1(make_cyclic3(9, 9, 9));
  EXPECT_EQ(claim_sequence(l, {1, 1, -0.1}).size(), 9u);
  EXPECT_EQ(claim_sequence(l, {1, 0, -0.1}).size(), 8u);
}

TEST(ClaimSequence, Errors) {
  EXPECT_THROW(claim_sequence(kOnes, {0, 0, 1}), PreconditionError);
  EXPECT_THROW(claim_sequence(kOnes, {1, 0, -5}), PreconditionError);
}

TEST(LambdaPrime, Examples) {
  expect_triple(lambda_prime(kOnes, {1, 0, 0}), {0, -1, 2}, 0.0);
  expect_triple(lambda_prime(kOnes, {2, 1, -2}), {-1, -2, 4}, 0.0);
  const Graph g = make_cyclic3(3, 3, 3);
  expect_triple(simulate_claim(g, kOnes, {1, 0, 0}), {0, -1, 2}, 0.0);
  expect_triple(simulate_claim(g, kOnes, {2, 1, -2}), {-1, -2, 4}, 0.0);
  EXPECT_THROW(lambda_prime(kOnes, {0, 0, -1}), PreconditionError);
}

TEST(LambdaPrime, IsHalfwordPairing) {
  for (const auto& entry : egame::testing::make_corpus(100, 41)) {
    const auto l = canonicalize_prop1(entry.graph);
    std::mt19937_64 rng(entry.ms[0] * 31 + entry.ms[2]);
    const Triple t = egame::testing::random_star_position(l, Case::I, rng);
    const Mat3 h = halfword(l).entries;
    const Vec3 lambda{t[0], t[1], t[2]};
    const Triple via_matrix{dot(lambda, column(h, 0)), dot(lambda, column(h, 1)), dot(lambda, column(h, 2))};
    expect_triple(via_matrix, lambda_prime(l, t), 1e-9);
  }
}

TEST(MacroCycle, Examples) {
  const Graph g = make_cyclic3(3, 3, 3);
  expect_triple(macro_cycle(kOnes, {1, 0, 0}), {2, 1, -2}, 0.0);
  expect_triple(macro_cycle(kOnes, {2, 1, -2}), {3, 2, -4}, 0.0);
  expect_triple(macro_cycle(kOnes, {0, 1, 0}), {1, 2, -2}, 0.0);
  // by the engine: claim sequence then g3
  const Triple sim = to_triple(kOnes, fire(g, to_position(kOnes, simulate_claim(g, kOnes, {0, 1, 0})), 2));
  expect_triple(sim, {1, 2, -2}, 0.0);
}

TEST(MacroCycle, AllOnesChainMatchesSimulation) {
  const Graph g = make_cyclic3(3, 3, 3);
  Triple closed{1, 0, 0};
  Position sim{1, 0, 0};
  for (int n = 1; n <= 25; ++n) {
    for (NodeId node : claim_sequence(kOnes, to_triple(kOnes, sim))) sim = fire(g, sim, node);
    sim = fire(g, sim, 2);
    closed = macro_cycle(kOnes, closed);
    const Triple want{n + 1.0, static_cast<double>(n), -2.0 * n};
    expect_triple(closed, want, 1e-12);
    expect_triple(to_triple(kOnes, sim), want, 1e-12);
  }
}

TEST(MacroCycle, ClosureOverCorpus) {
  std::mt19937_64 rng(43);
  for (const auto& entry : egame::testing::make_corpus(1000, 43)) {
    const auto l = canonicalize_prop1(entry.graph);
    for (Case c : {Case::I, Case::II, Case::III}) {
      const Triple next = macro_cycle(l, egame::testing::random_star_position(l, c, rng));
      const auto s = condition_star(l, next);
      EXPECT_TRUE(s.holds);
      EXPECT_GT(s.linear_form, 0.0);
      EXPECT_NE(next[0], 0.0);
      EXPECT_NE(next[1], 0.0);
      EXPECT_NE(next[2], 0.0);
    }
  }
}

TEST(MacroCycle, AgreesWithFiringGamma3AfterLambdaPrime) {
  std::mt19937_64 rng(47);
  for (const auto& entry : egame::testing::make_corpus(200, 47)) {
    const auto l = canonicalize_prop1(entry.graph);
    const Triple t = egame::testing::random_star_position(l, Case::I, rng);
    const Position fired = fire(entry.graph, to_position(l, lambda_prime(l, t)), l.gamma3);
    expect_triple(to_triple(l, fired), macro_cycle(l, t), 1e-9);
  }
}

TEST(ClaimConsistency, SimulationEqualsClosedFormAllCases) {
  std::mt19937_64 rng(53);
  for (const auto& entry : egame::testing::make_corpus(300, 53)) {
    const auto l = canonicalize_prop1(entry.graph);
    for (Case c : {Case::I, Case::II, Case::III}) {
      const Triple t = egame::testing::random_star_position(l, c, rng);
      expect_triple(simulate_claim(entry.graph, l, t), lambda_prime(l, t), 1e-9);
    }
  }
}

TEST(Inequalities, Examples) {
  const Inequalities ones = inequalities(kOnes);
  EXPECT_DOUBLE_EQ(ones.i, 1.0);
  EXPECT_DOUBLE_EQ(ones.ii, 1.0);
  EXPECT_DOUBLE_EQ(ones.iii, 1.0);

  // q1 * cstar1 = phi * (2 phi - 1/phi) = phi^3 = 2 phi + 1
  const Inequalities golden = inequalities(labels_from_amplitudes(1, 1, kPhi, kPhi, kPhi, kPhi));
  EXPECT_NEAR(golden.i, 2 * kPhi + 1, 1e-14);
  EXPECT_NEAR(golden.ii, 2 * kPhi + 1, 1e-14);
  EXPECT_NEAR(golden.iii, 4 * kPhi + 1, 1e-14);
}

TEST(Inequalities, SwappedOrderingStillHoldsForOddNeighborlyLabels) {
  // m12 = 5 with m = 3 sides: pq is the largest product, yet (i) and (ii)
  // equal 2 phi + 1 because every odd-neighborly side has product >= 2 - sqrt(pq).
  const auto swapped = labels_from_amplitudes(kPhi, kPhi, 1, 1, 1, 1);
  EXPECT_FALSE(swapped.ordering_holds());
  const Inequalities v = inequalities(swapped);
  EXPECT_NEAR(v.i, 2 * kPhi + 1, 1e-13);
  EXPECT_NEAR(v.ii, 2 * kPhi + 1, 1e-13);
  EXPECT_TRUE(v.holds());
}

TEST(Inequalities, FailWhenSideProductsAreTooSmall) {
  const auto bad = labels_from_amplitudes(1, 1, 0.5, 0.5, 0.5, 0.5);
  const Inequalities v = inequalities(bad);
  EXPECT_LT(v.i, 1.0);
  EXPECT_FALSE(v.holds());
}

TEST(Inequalities, HoldOverCorpus) {
  for (const auto& entry : egame::testing::make_corpus(1000, 59)) {
    const auto l = canonicalize_prop1(entry.graph);
    const Inequalities v = inequalities(l);
    EXPECT_GE(v.i, 1.0 - 1e-12);
    EXPECT_GE(v.ii, 1.0 - 1e-12);
    EXPECT_GT(v.iii, 0.0);
  }
}

TEST(Identity, Examples) {
  EXPECT_LE(verify_identity(kOnes, {2, 1, -2}), 1e-12);
  EXPECT_EQ(verify_identity(kOnes, {0, 0, 0}), 0.0);
}

TEST(Identity, ArbitraryPositions) {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> v(-3.0, 3.0);
  const auto corpus = egame::testing::make_corpus(1000, 61);
  for (const auto& entry : corpus) {
    const auto l = canonicalize_prop1(entry.graph);
    EXPECT_LE(verify_identity(l, {v(rng), v(rng), v(rng)}), 1e-9);
  }
}

TEST(Identity, LinearFormConservedExactlyWhenAllMAreThree) {
  std::mt19937_64 rng(67);
  for (const auto& s : {std::array<double, 3>{1, 1, 1}, {2.5, 0.4, 1.7}, {0.35, 2.9, 0.5}}) {
    const Graph g = make_cyclic3(3, 3, 3, s);
    const auto l = canonicalize_prop1(g);
    const Inequalities v = inequalities(l);
    EXPECT_NEAR(v.i, 1.0, 1e-12);
    EXPECT_NEAR(v.ii, 1.0, 1e-12);
    const Triple t = egame::testing::random_star_position(l, Case::I, rng);
    EXPECT_NEAR(linear_form(l, macro_cycle(l, t)), linear_form(l, t), 1e-9 * std::abs(linear_form(l, t)) + 1e-12);
  }
}

TEST(LegalityAudit, CaseTwoAllOnes) {
  const LegalityAudit a = legality_audit(kOnes, {1, 0, 0});
  EXPECT_EQ(a.which, ClaimCase::only_a);
  ASSERT_EQ(a.entries.size(), 2u);
  EXPECT_DOUBLE_EQ(a.entries[0].simulated, 1.0);
  EXPECT_DOUBLE_EQ(a.entries[1].simulated, 1.0);
  EXPECT_LE(a.max_disagreement, 1e-12);
  EXPECT_TRUE(a.all_positive);
}

TEST(LegalityAudit, CaseOneAllOnes) {
  const LegalityAudit a = legality_audit(kOnes, {2, 1, -2});
  ASSERT_EQ(a.entries.size(), 3u);
  EXPECT_DOUBLE_EQ(a.entries[0].simulated, 2.0);
  EXPECT_DOUBLE_EQ(a.entries[1].simulated, 3.0);
  EXPECT_DOUBLE_EQ(a.entries[2].simulated, 1.0);
  for (const auto& e : a.entries) EXPECT_NEAR(e.closed_form, e.simulated, 1e-12);
  expect_triple(a.result, {-1, -2, 4}, 1e-12);
}

TEST(LegalityAudit, GoldenEdgeCaseOne) {
  const auto l = labels_from_amplitudes(kPhi, kPhi, 1, 1, 1, 1);
  ASSERT_TRUE(condition_star(l, {1, 1, -0.1}).holds);
  const LegalityAudit a = legality_audit(l, {1, 1, -0.1});
  EXPECT_EQ(a.entries.size(), 5u);
  EXPECT_TRUE(a.all_positive);
  EXPECT_LE(a.max_disagreement, 1e-9);
}

TEST(LegalityAudit, CorpusAllCases) {
  std::mt19937_64 rng(71);
  for (const auto& entry : egame::testing::make_corpus(300, 71)) {
    const auto l = canonicalize_prop1(entry.graph);
    for (Case c : {Case::I, Case::II, Case::III}) {
      const Triple t = egame::testing::random_star_position(l, c, rng);
      const LegalityAudit a = legality_audit(l, t);
      EXPECT_TRUE(a.all_positive);
      EXPECT_LE(a.max_disagreement, 1e-9);
      expect_triple(a.result, lambda_prime(l, t), 1e-9);
    }
  }
}

TEST(Certificate, AllOnes) {
  const Prop1Certificate cert = divergence_certificate(make_cyclic3(3, 3, 3));
  EXPECT_DOUBLE_EQ(cert.kappa1, 2.0);
  EXPECT_DOUBLE_EQ(cert.kappa2, 2.0);
  EXPECT_EQ(cert.m12, 3);
  EXPECT_EQ(cert.verdict, kVerdictNotAdmissible);
  const auto& w1 = cert.fundamentals[0];
  ASSERT_EQ(w1.chain.size(), static_cast<std::size_t>(kDefaultCycles));
  expect_triple(w1.chain[0].position, {1, 0, 0}, 0.0);
  expect_triple(w1.chain[0].next, {2, 1, -2}, 0.0);
  expect_triple(w1.chain[1].next, {3, 2, -4}, 0.0);
  expect_triple(w1.chain[2].next, {4, 3, -6}, 0.0);
  EXPECT_TRUE(w1.linear_form_nondecreasing);
  EXPECT_FALSE(w1.linear_form_strictly_increasing);  // L stays 1 on this graph

  const auto& w3 = cert.fundamentals[2];
  EXPECT_TRUE(w3.preprocessed);
  expect_triple(w3.certified_start, {1, 1, -1}, 0.0);
  EXPECT_EQ(cert.fundamentals[1].chain[0].sequence, (std::vector<NodeId>{1, 0, 2}));
}

TEST(Certificate, GoldenSidesGrowStrictly) {
  const Prop1Certificate cert = divergence_certificate(make_cyclic3(3, 5, 5));
  for (const auto& ev : cert.fundamentals) {
    EXPECT_TRUE(ev.status.holds);
    EXPECT_TRUE(ev.linear_form_strictly_increasing) << ev.name;
  }
  EXPECT_NEAR(cert.fundamentals[2].certified_start[0], kPhi, 1e-14);
}

TEST(Certificate, CycleCountConfigurable) {
  const Prop1Certificate cert = divergence_certificate(make_cyclic3(5, 7, 9), 4);
  for (const auto& ev : cert.fundamentals) EXPECT_EQ(ev.chain.size(), 4u);
  EXPECT_THROW(divergence_certificate(make_cyclic3(3, 3, 3), 0), DomainError);
}

TEST(Certificate, EvenMIsIneligible) {
  const double r2 = std::sqrt(2.0);
  const Graph g({"a", "b", "c"}, {{0, 1, 1, 1, 3}, {0, 2, r2, r2, 4}, {1, 2, 1, 1, 3}});
  EXPECT_THROW(divergence_certificate(g), ValidationError);
  EXPECT_THROW(divergence_certificate(Graph({"x", "y"}, {{0, 1, 1, 1, 3}})), ValidationError);
}

TEST(DivergenceRun, NeverTerminatesAndFormGrows) {
  const Graph g = make_cyclic3(9, 7, 9, {3.0, 0.34, 2.9});
  const auto l = canonicalize_prop1(g);
  for (std::size_t f = 0; f < 3; ++f) {
    const DivergenceRun run = divergence_run(g, l, f, 10000);
    EXPECT_EQ(run.moves, 10000u);
    EXPECT_TRUE(run.all_legal) << run.diagnostic;
    EXPECT_FALSE(run.terminated);
    EXPECT_TRUE(run.strictly_increasing);
    EXPECT_GT(run.cycles, 900u);
  }
}

TEST(DivergenceRun, AllOnesConservesTheForm) {
  const Graph g = make_cyclic3(3, 3, 3);
  const auto l = canonicalize_prop1(g);
  const DivergenceRun run = divergence_run(g, l, 0, 10000);
  EXPECT_EQ(run.moves, 10000u);
  EXPECT_TRUE(run.all_legal);
  EXPECT_TRUE(run.nondecreasing);
  EXPECT_FALSE(run.strictly_increasing);
  EXPECT_NEAR(run.log_linear_forms.back(), run.log_linear_forms.front(), 1e-9);
}

TEST(DivergenceRun, UnbalancedAllThreesExhaustPrecision) {
  // a grows by 4x per macro-cycle while the linear form stays fixed
  const Graph g = make_cyclic3(3, 3, 3, {2.0, 0.5, 1.0});
  const auto l = canonicalize_prop1(g);
  const DivergenceRun run = divergence_run(g, l, 0, 10000);
  EXPECT_TRUE(run.precision_exhausted);
  EXPECT_FALSE(run.terminated);
  EXPECT_LT(run.moves, 10000u);
  EXPECT_NE(run.diagnostic.find("precision exhausted"), std::string::npos);
  try {
    divergence_certificate(g);
    FAIL() << "expected VerificationError";
  } catch (const VerificationError& err) {
    EXPECT_NE(std::string(err.what()).find("precision exhausted"), std::string::npos);
  }
  EXPECT_NO_THROW(divergence_certificate(g, 5));
}
