#pragma once

#include <utility>

#include "egame/error.hpp"
#include "egame/graph.hpp"

namespace egame {

struct Kappas {
  double kappa1 = 0.0;
  double kappa2 = 0.0;
};

/// kappa1 = (p p2 + p1 sqrt(pq)) / (sqrt(pq)(2 - sqrt(pq))),
/// kappa2 = (q p1 + p2 sqrt(pq)) / (sqrt(pq)(2 - sqrt(pq))).
inline Kappas kappas(const Cyclic3Labels& l) {
  if (!(l.pq() < 4.0) || !(l.pq() > 0.0)) {
    throw DomainError("kappas: need 0 < pq < 4, got pq = " + std::to_string(l.pq()));
  }
  const double r = l.root_pq();
  const double denom = r * (2.0 - r);
  return {(l.p * l.p2 + l.p1 * r) / denom, (l.q * l.p1 + l.p2 * r) / denom};
}

/// Coefficients of a and b in the condition-(*) linear form:
/// kappa1 - p/(q2 sqrt(pq)) and kappa2 - q/(q1 sqrt(pq)).
inline std::pair<double, double> cstar_coefficients(const Cyclic3Labels& l) {
  const Kappas k = kappas(l);
  const double r = l.root_pq();
  return {k.kappa1 - l.p / (l.q2 * r), k.kappa2 - l.q / (l.q1 * r)};
}

}  // namespace egame
