#pragma once

// Least-squares cubic B-spline smoothing on uniform interior knots.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace sarhcox {

/// Clamped cubic B-spline basis on [a, b] with `n_interior` uniform interior knots.
class CubicBSplineBasis {
public:
  static constexpr int degree = 3;

  CubicBSplineBasis(double a, double b, int n_interior) : a_(a), b_(b) {
    if (!(b > a)) throw DomainError("spline interval must satisfy a < b");
    if (n_interior < 0) throw DomainError("n_knots must be >= 0");
    for (int r = 0; r <= degree; ++r) knots_.push_back(a);
    for (int q = 1; q <= n_interior; ++q) knots_.push_back(a + (b - a) * q / (n_interior + 1));
    for (int r = 0; r <= degree; ++r) knots_.push_back(b);
  }

  int size() const { return static_cast<int>(knots_.size()) - degree - 1; }
  double lo() const { return a_; }
  double hi() const { return b_; }

  /// Row of basis values (deriv = 0) or first derivatives (deriv = 1) at t.
  std::vector<double> row(double t, int deriv = 0) const {
    if (deriv < 0 || deriv > 1) throw DomainError("only value and first derivative are supported");
    t = std::clamp(t, a_, b_);
    const int span = find_span(t);
    std::vector<double> out(size(), 0.0);
    // Values of the degree-2 and degree-3 functions that are nonzero on the span.
    const auto n2 = local(t, span, degree - 1);
    const auto n3 = local(t, span, degree);
    if (deriv == 0) {
      for (int r = 0; r <= degree; ++r) out[span - degree + r] = n3[r];
      return out;
    }
    // d/dt N_{i,3} = 3 (N_{i,2} / (u_{i+3} - u_i) - N_{i+1,2} / (u_{i+4} - u_{i+1})).
    for (int r = 0; r <= degree; ++r) {
      const int i = span - degree + r;
      double d = 0.0;
      const double left = r >= 1 ? n2[r - 1] : 0.0;
      const double right = r <= degree - 1 ? n2[r] : 0.0;
      const double den1 = knots_[i + degree] - knots_[i];
      const double den2 = knots_[i + degree + 1] - knots_[i + 1];
      if (den1 > 0) d += left / den1;
      if (den2 > 0) d -= right / den2;
      out[i] = degree * d;
    }
    return out;
  }

private:
  int find_span(double t) const {
    const int n = size();
    if (t >= knots_[n]) return n - 1;
    const auto it = std::upper_bound(knots_.begin() + degree, knots_.begin() + n + 1, t);
    return static_cast<int>(it - knots_.begin()) - 1;
  }

  /// Nonzero degree-p functions N_{span-p..span, p}(t) by the triangular recurrence.
  std::vector<double> local(double t, int span, int p) const {
    std::vector<double> n(p + 1, 0.0), left(p + 1), right(p + 1);
    n[0] = 1.0;
    for (int j = 1; j <= p; ++j) {
      left[j] = t - knots_[span + 1 - j];
      right[j] = knots_[span + j] - t;
      double saved = 0.0;
      for (int r = 0; r < j; ++r) {
        const double den = right[r + 1] + left[j - r];
        const double tmp = den > 0 ? n[r] / den : 0.0;
        n[r] = saved + right[r + 1] * tmp;
        saved = left[j - r] * tmp;
      }
      n[j] = saved;
    }
    return n;
  }

  double a_, b_;
  std::vector<double> knots_;
};

/// Fits every series observed at `times` by least squares and evaluates the
/// fit (or its derivative) on `out_grid`. The design factorization is shared.
class SplineSmoother {
public:
  SplineSmoother(std::vector<double> times, int n_knots, std::vector<double> out_grid)
      : basis_(times.empty() ? 0.0 : times.front(), times.empty() ? 1.0 : times.back(), n_knots),
        times_(std::move(times)),
        out_(std::move(out_grid)) {
    const int nb = basis_.size();
    if (static_cast<int>(times_.size()) < n_knots + 4)
      throw RankError("spline smoothing with " + std::to_string(n_knots) + " knots needs at least " +
                      std::to_string(n_knots + 4) + " observations, got " + std::to_string(times_.size()));
    Eigen::MatrixXd design(times_.size(), nb);
    for (std::size_t r = 0; r < times_.size(); ++r) {
      const auto row = basis_.row(times_[r]);
      for (int c = 0; c < nb; ++c) design(r, c) = row[c];
    }
    qr_.compute(design);
    if (qr_.rank() < nb)
      throw RankError("spline design is rank deficient (rank " + std::to_string(qr_.rank()) + " of " +
                      std::to_string(nb) + "); reduce n_knots");
    value_.resize(out_.size(), nb);
    slope_.resize(out_.size(), nb);
    for (std::size_t r = 0; r < out_.size(); ++r) {
      const auto v = basis_.row(out_[r], 0), d = basis_.row(out_[r], 1);
      for (int c = 0; c < nb; ++c) {
        value_(r, c) = v[c];
        slope_(r, c) = d[c];
      }
    }
  }

  const CubicBSplineBasis& basis() const { return basis_; }
  const std::vector<double>& out_grid() const { return out_; }

  Eigen::VectorXd coefficients(std::span<const double> y) const {
    if (y.size() != times_.size()) throw DomainError("series length does not match the spline time grid");
    const Eigen::Map<const Eigen::VectorXd> v(y.data(), static_cast<Eigen::Index>(y.size()));
    return qr_.solve(v);
  }

  std::vector<double> smooth(std::span<const double> y) const { return apply(value_, coefficients(y)); }
  std::vector<double> derivative(std::span<const double> y) const { return apply(slope_, coefficients(y)); }

private:
  static std::vector<double> apply(const Eigen::MatrixXd& m, const Eigen::VectorXd& c) {
    const Eigen::VectorXd r = m * c;
    return {r.data(), r.data() + r.size()};
  }

  CubicBSplineBasis basis_;
  std::vector<double> times_, out_;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
  Eigen::MatrixXd value_, slope_;
};

/// One-shot least-squares cubic spline smoothing of a single series.
inline std::vector<double> spline_smooth(std::span<const double> times, std::span<const double> y, int n_knots,
                                         std::span<const double> out_grid) {
  SplineSmoother s({times.begin(), times.end()}, n_knots, {out_grid.begin(), out_grid.end()});
  return s.smooth(y);
}

}  // namespace sarhcox
