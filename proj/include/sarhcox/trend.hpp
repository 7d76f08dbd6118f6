#pragma once

// Per-site polynomial trend in time, optionally fitted jointly with sine modes
// that are kept out of the trend ("protected").

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "hilbert.hpp"

namespace sarhcox {

enum class PolyBasis { legendre, monomial };

struct TrendOptions {
  int degree = 10;
  PolyBasis basis = PolyBasis::legendre;
  /// Sine modes 1..protect_modes enter the least-squares fit but not the trend.
  int protect_modes = 0;
  double max_condition = 1e12;
};

/// Shared least-squares machinery for every series observed on `times`.
class TrendFitter {
public:
  TrendFitter(std::vector<double> times, TrendOptions opt) : times_(std::move(times)), opt_(opt) {
    if (opt_.degree < 0) throw DomainError("trend degree must be >= 0");
    if (opt_.protect_modes < 0) throw DomainError("protect_modes must be >= 0");
    const int cols = n_poly() + opt_.protect_modes;
    if (static_cast<int>(times_.size()) < cols)
      throw RankError("trend fit needs at least " + std::to_string(cols) + " time points, got " +
                      std::to_string(times_.size()));
    const double t0 = times_.front(), t1 = times_.back();
    if (!(t1 > t0)) throw DomainError("trend time grid must span a positive interval");
    design_.resize(static_cast<Eigen::Index>(times_.size()), cols);
    for (std::size_t r = 0; r < times_.size(); ++r) {
      const double t = times_[r];
      const auto p = poly_row(t, t0, t1);
      for (int c = 0; c < n_poly(); ++c) design_(r, c) = p[c];
      for (int q = 1; q <= opt_.protect_modes; ++q)
        design_(r, n_poly() + q - 1) = std::sin(std::numbers::pi * q * (t - t0) / (t1 - t0));
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(design_);
    const auto& sv = svd.singularValues();
    condition_ = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
    if (!(condition_ <= opt_.max_condition))
      throw RankError("trend design condition number " + std::to_string(condition_) + " exceeds " +
                      std::to_string(opt_.max_condition) +
                      (opt_.basis == PolyBasis::monomial ? "; use the orthogonal (legendre) polynomial basis" : ""));
    qr_.compute(design_);
  }

  int n_poly() const { return opt_.degree + 1; }
  double condition() const { return condition_; }
  const TrendOptions& options() const { return opt_; }

  struct Fit {
    std::vector<double> trend;
    std::vector<double> residual;
    std::vector<double> poly_coeffs;
    std::vector<double> protected_coeffs;
  };

  Fit fit(std::span<const double> y) const {
    if (y.size() != times_.size()) throw DomainError("series length does not match the trend time grid");
    const Eigen::Map<const Eigen::VectorXd> v(y.data(), static_cast<Eigen::Index>(y.size()));
    const Eigen::VectorXd beta = qr_.solve(v);
    const Eigen::VectorXd trend = design_.leftCols(n_poly()) * beta.head(n_poly());
    Fit f;
    f.trend.assign(trend.data(), trend.data() + trend.size());
    f.residual.resize(y.size());
    for (std::size_t r = 0; r < y.size(); ++r) f.residual[r] = y[r] - f.trend[r];
    f.poly_coeffs.assign(beta.data(), beta.data() + n_poly());
    f.protected_coeffs.assign(beta.data() + n_poly(), beta.data() + beta.size());
    return f;
  }

  /// Share of |phi_k|^2 (discrete, on the fit grid) left in the residual when
  /// phi_k alone is detrended.
  double retained_fraction(int k) const {
    if (k < 1) throw DomainError("mode index must be >= 1");
    const double t0 = times_.front(), t1 = times_.back();
    std::vector<double> phi(times_.size());
    double total = 0.0;
    for (std::size_t r = 0; r < times_.size(); ++r) {
      phi[r] = std::sin(std::numbers::pi * k * (times_[r] - t0) / (t1 - t0));
      total += phi[r] * phi[r];
    }
    const auto f = fit(phi);
    double left = 0.0;
    for (double v : f.residual) left += v * v;
    return left / total;
  }

private:
  std::vector<double> poly_row(double t, double t0, double t1) const {
    std::vector<double> p(n_poly());
    if (opt_.basis == PolyBasis::monomial) {
      double v = 1.0;
      for (int d = 0; d < n_poly(); ++d, v *= t) p[d] = v;
      return p;
    }
    const double x = 2.0 * (t - t0) / (t1 - t0) - 1.0;
    p[0] = 1.0;
    if (n_poly() > 1) p[1] = x;
    for (int d = 2; d < n_poly(); ++d) p[d] = ((2.0 * d - 1.0) * x * p[d - 1] - (d - 1.0) * p[d - 2]) / d;
    return p;
  }

  std::vector<double> times_;
  TrendOptions opt_;
  Eigen::MatrixXd design_;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
  double condition_ = 0.0;
};

/// Fits the trend of every series (rows of `values`, `times.size()` long).
struct TrendField {
  std::vector<double> trend;
  std::vector<double> residual;
};

inline TrendField polyfit_trend(std::span<const double> values, std::span<const double> times,
                                const TrendOptions& opt = {}) {
  if (times.empty() || values.size() % times.size() != 0) throw DomainError("values must be sites x times");
  const TrendFitter fitter({times.begin(), times.end()}, opt);
  TrendField out;
  out.trend.reserve(values.size());
  out.residual.reserve(values.size());
  for (std::size_t s = 0; s < values.size() / times.size(); ++s) {
    const auto f = fitter.fit(values.subspan(s * times.size(), times.size()));
    out.trend.insert(out.trend.end(), f.trend.begin(), f.trend.end());
    out.residual.insert(out.residual.end(), f.residual.begin(), f.residual.end());
  }
  return out;
}

}  // namespace sarhcox
