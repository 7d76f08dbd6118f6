#pragma once

// Eigenvalue families of the quarter-plane autoregression
//   X(i,j) = L1 X(i-1,j) + L2 X(i,j-1) + L3 X(i-1,j-1) + eps(i,j),
// acting mode by mode through the triples (l1, l2, l3), together with the
// rational spectral density and the log-integral that fixes the
// componentwise normalization.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>

#include "errors.hpp"
#include "spectral.hpp"

namespace sarhcox {

struct Eigentriple {
  double l1 = 0.0;
  double l2 = 0.0;
  double l3 = 0.0;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return x >= lo && x <= hi; }
  double width() const { return hi - lo; }
};

inline constexpr Interval example1_box{0.7, 4.0};
inline constexpr std::array<Interval, 4> example2_box{
    {{0.7, 1.3}, {1.3, 1.9}, {1.2, 1.8}, {0.9, 1.5}}};

/// lambda_{k,1} = theta^2 / (pi^2 k^1.1), lambda_{k,2} = theta^2 / (pi^2 k^1.2),
/// lambda_{k,3} = -lambda_{k,1} lambda_{k,2}.  k is 1-based.
inline Eigentriple eigenvalues_example1(double theta, int k) {
  if (!example1_box.contains(theta))
    throw DomainError("example1 theta=" + std::to_string(theta) + " outside [0.7, 4]");
  if (k < 1) throw DomainError("mode index must be >= 1");
  const double s = theta * theta / (std::numbers::pi * std::numbers::pi);
  const double l1 = s / std::pow(k, 1.1);
  const double l2 = s / std::pow(k, 1.2);
  return {l1, l2, -l1 * l2};
}

/// theta = (theta_11, theta_12, theta_21, theta_22):
/// lambda_{k,q} = theta_q1 / (k + theta_q2), lambda_{k,3} = -lambda_{k,1} lambda_{k,2}.
inline Eigentriple eigenvalues_example2(std::span<const double> theta, int k) {
  if (theta.size() != 4) throw DomainError("example2 expects 4 parameters");
  for (std::size_t i = 0; i < 4; ++i)
    if (!example2_box[i].contains(theta[i]))
      throw DomainError("example2 theta[" + std::to_string(i) + "] outside its interval");
  if (k < 1) throw DomainError("mode index must be >= 1");
  const double l1 = theta[0] / (k + theta[1]);
  const double l2 = theta[2] / (k + theta[3]);
  return {l1, l2, -l1 * l2};
}

/// |1 - l1 e^{i w1} - l2 e^{i w2} - l3 e^{i(w1+w2)}|^2, expanded as a
/// trigonometric polynomial with lags in {0, +-1}^2.
inline double ar_modulus2(const Eigentriple& t, double w1, double w2) {
  const double a = t.l1, b = t.l2, c = t.l3;
  return 1.0 + a * a + b * b + c * c + 2.0 * (b * c - a) * std::cos(w1) +
         2.0 * (a * c - b) * std::cos(w2) - 2.0 * c * std::cos(w1 + w2) +
         2.0 * a * b * std::cos(w1 - w2);
}

/// Coefficients of the trigonometric expansion of ar_modulus2 on
/// (1, cos w1, cos w2, cos(w1+w2), cos(w1-w2)).
inline std::array<double, 5> ar_modulus2_coeffs(const Eigentriple& t) {
  const double a = t.l1, b = t.l2, c = t.l3;
  return {1.0 + a * a + b * b + c * c, 2.0 * (b * c - a), 2.0 * (a * c - b), -2.0 * c, 2.0 * a * b};
}

/// F(omega) = sigma2 / |1 - l1 e^{i w1} - l2 e^{i w2} - l3 e^{i(w1+w2)}|^2.
inline double sarh1_spectral_density(const Eigentriple& t, double sigma2, double w1, double w2) {
  const double den = ar_modulus2(t, w1, w2);
  if (!(den > 1e-300)) throw SingularityError("vanishing autoregressive denominator", w1, w2);
  return sigma2 / den;
}

/// Sufficient stationarity margin 1 - (|l1| + |l2| + |l3|); positive means
/// the crude bound holds.
inline double crude_margin(const Eigentriple& t) {
  return 1.0 - (std::abs(t.l1) + std::abs(t.l2) + std::abs(t.l3));
}

/// Exact test that 1 - l1 z1 - l2 z2 - l3 z1 z2 has no zero on the closed unit
/// bidisk. Solving for z1 gives z1 = (1 - l2 z2) / (l1 + l3 z2); stability
/// holds iff |l2| < 1 and |l1 + l3 z2| < |1 - l2 z2| on |z2| = 1, which
/// reduces to (l1^2 + l3^2 - 1 - l2^2) + 2 |l1 l3 + l2| < 0.
inline bool is_stable(const Eigentriple& t) {
  if (!(std::abs(t.l2) < 1.0)) return false;
  const double a = t.l1, b = t.l2, c = t.l3;
  return (a * a + c * c - 1.0 - b * b) + 2.0 * std::abs(a * c + b) < 0.0;
}

/// Stability margin used in diagnostics: -(l1^2 + l3^2 - 1 - l2^2 + 2|l1 l3 + l2|).
inline double exact_margin(const Eigentriple& t) {
  const double a = t.l1, b = t.l2, c = t.l3;
  return -((a * a + c * c - 1.0 - b * b) + 2.0 * std::abs(a * c + b));
}

/// min |A|^2 over a G x G grid of the torus |z1| = |z2| = 1.
inline double min_modulus2_on_torus(const Eigentriple& t, int grid = 256) {
  double best = std::numeric_limits<double>::infinity();
  for (int u1 = 0; u1 < grid; ++u1)
    for (int u2 = 0; u2 < grid; ++u2)
      best = std::min(best, ar_modulus2(t, two_pi * u1 / grid, two_pi * u2 / grid));
  return best;
}

/// int_{[-pi,pi]^2} log |A(omega)|^2 d omega by the periodic trapezoid rule.
inline double log_modulus_integral_quadrature(const Eigentriple& t, int grid = 512) {
  double acc = 0.0;
  for (int u1 = 0; u1 < grid; ++u1) {
    const double w1 = two_pi * u1 / grid;
    for (int u2 = 0; u2 < grid; ++u2) {
      const double d = ar_modulus2(t, w1, two_pi * u2 / grid);
      if (!(d > 0.0)) throw SingularityError("log of vanishing denominator", w1, two_pi * u2 / grid);
      acc += std::log(d);
    }
  }
  return acc * two_pi_sq / (static_cast<double>(grid) * grid);
}

/// Same integral through Jensen's formula in w1: for fixed w2 the polynomial
/// is a - b e^{i w1} with a = 1 - l2 e^{i w2}, b = l1 + l3 e^{i w2}, and
/// (1/2pi) int log|a - b e^{i w1}|^2 d w1 = 2 log max(|a|, |b|). The remaining
/// 1-D integral is exactly zero for stable triples.
inline double log_modulus_integral_jensen(const Eigentriple& t, int grid = 4096) {
  if (is_stable(t)) return 0.0;
  double acc = 0.0;
  for (int u = 0; u < grid; ++u) {
    const double w = two_pi * u / grid;
    const cplx e = std::polar(1.0, w);
    const double a = std::abs(1.0 - t.l2 * e), b = std::abs(t.l1 + t.l3 * e);
    const double mx = std::max(a, b);
    if (!(mx > 0.0)) throw SingularityError("log of vanishing denominator", 0.0, w);
    acc += 2.0 * std::log(mx);
  }
  return two_pi * (two_pi * acc / grid);
}

/// Numerator sigma2 making int log((2 pi)^2 F) = 0 given the log-integral of |A|^2.
inline double c2_numerator_from_log_integral(double log_integral) {
  return std::exp(log_integral / two_pi_sq) / two_pi_sq;
}

}  // namespace sarhcox
