#pragma once

// Matrices of the reflections s1, s2 and their products acting on the simple
// roots (alpha1, alpha2, alpha3) of a three-node cyclic graph. Column j of a
// matrix for a word w holds the coordinates of w(alpha_j), so for a position
// lambda the pairing <lambda, w(alpha_j)> is lambda . column j.
//
// The closed forms express X12^k and X21^k with sines of multiples of
// theta = pi/m12; oracle_power recomputes everything by plain multiplication.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <utility>

#include "egame/error.hpp"
#include "egame/graph.hpp"
#include "egame/kappa.hpp"

namespace egame {

using Mat3 = std::array<std::array<double, 3>, 3>;
using Vec3 = std::array<double, 3>;

inline constexpr Mat3 kIdentity3{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

inline Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) out[i][j] += a[i][k] * b[k][j];
  return out;
}

inline Vec3 operator*(const Mat3& a, const Vec3& v) {
  Vec3 out{};
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) out[i] += a[i][k] * v[k];
  return out;
}

inline double det(const Mat3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

inline Mat3 inverse(const Mat3& m) {
  const double d = det(m);
  if (d == 0.0) throw DomainError("singular matrix");
  Mat3 inv{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      inv[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / d;
    }
  }
  return inv;
}

/// Max absolute entry difference.
inline double max_abs_diff(const Mat3& a, const Mat3& b) {
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) worst = std::max(worst, std::abs(a[i][j] - b[i][j]));
  return worst;
}

inline Vec3 column(const Mat3& m, int j) { return {m[0][j], m[1][j], m[2][j]}; }

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

enum class Variant { X1, X2, X12, X21, X12_pow_k, X21_pow_k, X2_X12_pow_k, X1_X21_pow_k, halfword };

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::X1: return "X1";
    case Variant::X2: return "X2";
    case Variant::X12: return "X12";
    case Variant::X21: return "X21";
    case Variant::X12_pow_k: return "X12_pow_k";
    case Variant::X21_pow_k: return "X21_pow_k";
    case Variant::X2_X12_pow_k: return "X2_X12_pow_k";
    case Variant::X1_X21_pow_k: return "X1_X21_pow_k";
    case Variant::halfword: return "halfword";
  }
  return "unknown";
}

struct RepMatrix {
  Mat3 entries = kIdentity3;
  Variant variant = Variant::X1;
  std::optional<int> k;
  std::optional<double> theta;

  double operator()(int i, int j) const { return entries[i][j]; }
  bool bottom_row_fixed() const {
    return entries[2][0] == 0.0 && entries[2][1] == 0.0 && entries[2][2] == 1.0;
  }
};

inline double theta_for(const Cyclic3Labels& labels) {
  return std::numbers::pi / static_cast<double>(recover_m12(labels));
}

inline std::pair<RepMatrix, RepMatrix> generators(const Cyclic3Labels& l) {
  RepMatrix x1{{{{-1, l.p, l.p1}, {0, 1, 0}, {0, 0, 1}}}, Variant::X1, {}, {}};
  RepMatrix x2{{{{1, 0, 0}, {l.q, -1, l.p2}, {0, 0, 1}}}, Variant::X2, {}, {}};
  return {x1, x2};
}

namespace detail {

/// The sine ratios and third-column coefficients shared by the closed forms.
struct SineTerms {
  double theta;
  double s_k;     // sin(2k theta)/sin(2 theta)
  double s_next;  // sin(2(k+1) theta)/sin(2 theta)
  double s_prev;  // sin(2(k-1) theta)/sin(2 theta)
  double c1p, c2p;    // C1', C2'  (third column of X12^k)
  double c1pp, c2pp;  // C1'', C2'' (third column of X21^k)
};

inline SineTerms sine_terms(const Cyclic3Labels& l, int k) {
  if (k < 0) throw DomainError("closed form power: k must be >= 0, got " + std::to_string(k));
  SineTerms t{};
  t.theta = theta_for(l);
  const double s2 = std::sin(2.0 * t.theta);
  const auto ratio = [&](int j) { return std::sin(2.0 * j * t.theta) / s2; };
  t.s_k = ratio(k);
  t.s_next = ratio(k + 1);
  t.s_prev = ratio(k - 1);
  const double e1 = l.p2 * l.p + 2.0 * l.p1;  // p2 p + 2 p1
  const double e2 = l.p1 * l.q + 2.0 * l.p2;  // p1 q + 2 p2
  const double w = 4.0 - l.pq();
  const double diag_a = t.s_next + t.s_k;  // (sin 2(k+1)t + sin 2kt)/sin 2t
  const double diag_b = t.s_k + t.s_prev;  // (sin 2kt + sin 2(k-1)t)/sin 2t
  t.c1p = -e1 / w * (diag_a - 1.0) + l.p * e2 * t.s_k / w;
  t.c2p = -l.q * e1 * t.s_k / w + e2 / w * (diag_b + 1.0);
  t.c1pp = e1 / w * (diag_b + 1.0) - l.p * e2 * t.s_k / w;
  t.c2pp = l.q * e1 * t.s_k / w - e2 / w * (diag_a - 1.0);
  return t;
}

}  // namespace detail

/// X12^k or X21^k from the sine formulas. variant must be X12 or X21
/// (the _pow_k tags are accepted as synonyms).
inline RepMatrix closed_form_power(const Cyclic3Labels& l, int k, Variant variant) {
  const auto t = detail::sine_terms(l, k);
  const double diag_a = t.s_next + t.s_k;
  const double diag_b = t.s_k + t.s_prev;
  RepMatrix out;
  out.k = k;
  out.theta = t.theta;
  switch (variant) {
    case Variant::X12:
    case Variant::X12_pow_k:
      out.variant = Variant::X12_pow_k;
      out.entries = {{{diag_a, -l.p * t.s_k, t.c1p}, {l.q * t.s_k, -diag_b, t.c2p}, {0, 0, 1}}};
      break;
    case Variant::X21:
    case Variant::X21_pow_k:
      out.variant = Variant::X21_pow_k;
      out.entries = {{{-diag_b, l.p * t.s_k, t.c1pp}, {-l.q * t.s_k, diag_a, t.c2pp}, {0, 0, 1}}};
      break;
    default:
      throw DomainError(std::string("closed_form_power: unsupported variant ") + to_string(variant));
  }
  return out;
}

/// X2 X12^k or X1 X21^k from the sine formulas.
inline RepMatrix prefix_matrix(const Cyclic3Labels& l, int k, Variant variant) {
  const auto t = detail::sine_terms(l, k);
  const double diag_a = t.s_next + t.s_k;
  const double mixed = (1.0 - l.pq()) * t.s_k + t.s_prev;
  RepMatrix out;
  out.k = k;
  out.theta = t.theta;
  out.variant = variant;
  switch (variant) {
    case Variant::X2_X12_pow_k:
      out.entries = {{{diag_a, -l.p * t.s_k, t.c1p},
                      {l.q * t.s_next, mixed, l.q * t.c1p - t.c2p + l.p2},
                      {0, 0, 1}}};
      break;
    case Variant::X1_X21_pow_k:
      out.entries = {{{mixed, l.p * t.s_next, -t.c1pp + l.p * t.c2pp + l.p1},
                      {-l.q * t.s_k, diag_a, t.c2pp},
                      {0, 0, 1}}};
      break;
    default:
      throw DomainError(std::string("prefix_matrix: unsupported variant ") + to_string(variant));
  }
  return out;
}

/// X1 X21^((m12-1)/2) written through the kappas:
/// [[0, -p/sqrt(pq), kappa1], [-q/sqrt(pq), 0, kappa2], [0, 0, 1]].
inline RepMatrix halfword(const Cyclic3Labels& l) {
  const int m12 = recover_m12(l);
  const Kappas k = kappas(l);
  const double r = l.root_pq();
  RepMatrix out;
  out.variant = Variant::halfword;
  out.k = (m12 - 1) / 2;
  out.theta = std::numbers::pi / m12;
  out.entries = {{{0, -l.p / r, k.kappa1}, {-l.q / r, 0, k.kappa2}, {0, 0, 1}}};
  return out;
}

/// Brute-force oracle: repeated 3x3 multiplication of the generators.
inline RepMatrix oracle_power(const Cyclic3Labels& l, int k, Variant variant) {
  if (k < 0) throw DomainError("oracle_power: k must be >= 0");
  const auto [x1, x2] = generators(l);
  const Mat3 x12 = x1.entries * x2.entries;
  const Mat3 x21 = x2.entries * x1.entries;
  const auto power = [k](const Mat3& m) {
    Mat3 acc = kIdentity3;
    for (int i = 0; i < k; ++i) acc = acc * m;
    return acc;
  };
  RepMatrix out;
  out.k = k;
  out.variant = variant;
  switch (variant) {
    case Variant::X1: out.entries = x1.entries; out.k.reset(); break;
    case Variant::X2: out.entries = x2.entries; out.k.reset(); break;
    case Variant::X12:
    case Variant::X12_pow_k: out.entries = power(x12); out.variant = Variant::X12_pow_k; break;
    case Variant::X21:
    case Variant::X21_pow_k: out.entries = power(x21); out.variant = Variant::X21_pow_k; break;
    case Variant::X2_X12_pow_k: out.entries = x2.entries * power(x12); break;
    case Variant::X1_X21_pow_k: out.entries = x1.entries * power(x21); break;
    case Variant::halfword: {
      const int half = (recover_m12(l) - 1) / 2;
      Mat3 acc = kIdentity3;
      for (int i = 0; i < half; ++i) acc = acc * x21;
      out.entries = x1.entries * acc;
      out.k = half;
      break;
    }
  }
  return out;
}

struct EigenCheck {
  double residual = 0.0;            // max |X12 - P D P^-1|
  double imaginary_residual = 0.0;  // max |Im(P D P^-1)|
  double inverse_residual = 0.0;    // max |P P^-1 - I|
  double eigenvalue_residual = 0.0; // diag(D) vs characteristic-polynomial roots
};

/// Reassembles X12 from the eigendecomposition P D P^-1 with
/// D = diag(e^{2i theta}, e^{-2i theta}, 1). The scalar 1/(q(e^{2i theta} - e^{-2i theta}))
/// belongs to P^-1.
inline EigenCheck eigencheck(const Cyclic3Labels& l) {
  using C = std::complex<double>;
  using CMat = std::array<std::array<C, 3>, 3>;
  if (!(l.pq() < 4.0)) throw DomainError("eigencheck: pq must be < 4");
  const double theta = theta_for(l);
  const C e = std::polar(1.0, 2.0 * theta);
  const C ei = std::polar(1.0, -2.0 * theta);
  const double e1 = l.p2 * l.p + 2.0 * l.p1;
  const double e2 = l.p1 * l.q + 2.0 * l.p2;
  const double w = 4.0 - l.pq();

  const CMat p{{{e + 1.0, ei + 1.0, e1}, {l.q, l.q, e2}, {0.0, 0.0, w}}};
  const CMat d{{{e, 0.0, 0.0}, {0.0, ei, 0.0}, {0.0, 0.0, 1.0}}};
  const C c1 = (-l.q * e1 + (ei + 1.0) * e2) / w;
  const C c2 = (l.q * e1 - (e + 1.0) * e2) / w;
  const C c3 = l.q * (e - ei) / w;
  const C scale = 1.0 / (l.q * (e - ei));
  CMat p_inv{{{l.q, -ei - 1.0, c1}, {-l.q, e + 1.0, c2}, {0.0, 0.0, c3}}};
  for (auto& row : p_inv)
    for (auto& x : row) x *= scale;

  const auto mul = [](const CMat& a, const CMat& b) {
    CMat out{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) out[i][j] += a[i][k] * b[k][j];
    return out;
  };

  const auto [x1, x2] = generators(l);
  const Mat3 x12 = x1.entries * x2.entries;
  const CMat reassembled = mul(mul(p, d), p_inv);
  const CMat should_be_identity = mul(p, p_inv);

  EigenCheck out;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      out.residual = std::max(out.residual, std::abs(reassembled[i][j] - C(x12[i][j])));
      out.imaginary_residual = std::max(out.imaginary_residual, std::abs(reassembled[i][j].imag()));
      out.inverse_residual = std::max(
          out.inverse_residual, std::abs(should_be_identity[i][j] - C(i == j ? 1.0 : 0.0)));
    }
  }

  // Characteristic polynomial t^3 + a t^2 + b t + c of X12; 1 is a root, the
  // remaining quadratic t^2 + (a + 1) t + (a + b + 1) gives the other two.
  const double tr = x12[0][0] + x12[1][1] + x12[2][2];
  const double minors = x12[0][0] * x12[1][1] - x12[0][1] * x12[1][0] + x12[0][0] * x12[2][2] -
                        x12[0][2] * x12[2][0] + x12[1][1] * x12[2][2] - x12[1][2] * x12[2][1];
  const double a = -tr, b = minors;
  const C disc = std::sqrt(C((a + 1.0) * (a + 1.0) - 4.0 * (a + b + 1.0)));
  const C r_plus = (-(a + 1.0) + disc) / 2.0;
  const C r_minus = (-(a + 1.0) - disc) / 2.0;
  const double root_one_residual = std::abs(1.0 + a + b - det(x12));  // p(1) = 1 + a + b + c, c = -det
  const double match = std::min(std::max(std::abs(r_plus - e), std::abs(r_minus - ei)),
                                std::max(std::abs(r_plus - ei), std::abs(r_minus - e)));
  out.eigenvalue_residual = std::max(match, root_one_residual);
  return out;
}

}  // namespace egame
