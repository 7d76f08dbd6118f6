#pragma once

// Moments and predictors of the lattice Cox count process whose log-intensity
// at site z, tested against phi, is X_z(phi) = <c_z, phi>.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "hilbert.hpp"
#include "model.hpp"
#include "spectral.hpp"

namespace sarhcox {

inline constexpr double max_exponent = 700.0;

struct TestFunction {
  std::vector<double> coeffs;

  explicit TestFunction(std::vector<double> c) : coeffs(std::move(c)) {
    for (double v : coeffs)
      if (!std::isfinite(v)) throw DomainError("test function coefficients must be finite");
  }
  static TestFunction unit(int n_modes, int k) {
    if (k < 1 || k > n_modes) throw DomainError("unit test function mode outside [1, M]");
    std::vector<double> c(n_modes, 0.0);
    c[k - 1] = 1.0;
    return TestFunction(std::move(c));
  }
  bool is_zero() const {
    for (double v : coeffs)
      if (v != 0.0) return false;
    return true;
  }
};

/// Inclusive site rectangle [i0, i1] x [j0, j1]; every site is a unit cell.
struct BorelRect {
  int i0 = 0, i1 = 0, j0 = 0, j1 = 0;

  std::size_t area() const { return static_cast<std::size_t>(i1 - i0 + 1) * (j1 - j0 + 1); }
  int width1() const { return i1 - i0 + 1; }
  int width2() const { return j1 - j0 + 1; }

  void validate() const {
    if (i1 < i0 || j1 < j0) throw DomainError("rectangle must be non-empty");
  }
  void validate(LatticeDims d) const {
    validate();
    if (i0 < 0 || j0 < 0 || i1 >= d.n1 || j1 >= d.n2) throw IndexError("rectangle exceeds lattice");
  }
};

inline double log_intensity_at(const CoeffField& field, Site site, const TestFunction& phi) {
  if (static_cast<int>(phi.coeffs.size()) != field.n_modes())
    throw DomainError("test function has " + std::to_string(phi.coeffs.size()) + " coefficients, field has " +
                      std::to_string(field.n_modes()) + " modes");
  auto c = field.site(site);
  double acc = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) acc += c[k] * phi.coeffs[k];
  return acc;
}

/// rho_phi = exp(R_0(phi)(phi) / 2).
inline double cox_intensity(double cov0) {
  if (!(cov0 >= 0.0)) throw DomainError("invalid covariance: R_0(phi)(phi) must be >= 0");
  if (cov0 / 2 > max_exponent) throw OverflowError("intensity overflow", cov0 / 2);
  return std::exp(cov0 / 2);
}

/// g_phi = exp(R_{z_i - z_j}(phi)(phi)).
inline double pair_correlation(double covz) {
  if (covz > max_exponent) throw OverflowError("pair correlation overflow", covz);
  return std::exp(covz);
}

enum class DiagonalTerms { exclude, include };

/// rho^(n) = rho^n exp(1/2 sum_{i != j} R_{z_i - z_j}). With
/// DiagonalTerms::include the i = j terms n R_0 / 2 enter the exponent too.
inline double product_density_n(std::span<const Site> points, const CovarianceTable& cov,
                                DiagonalTerms diag = DiagonalTerms::exclude) {
  const double r0 = cov.at(0, 0);
  const double rho = cox_intensity(r0);
  double expo = 0.0;
  for (std::size_t a = 0; a < points.size(); ++a)
    for (std::size_t b = 0; b < points.size(); ++b) {
      if (a == b && diag == DiagonalTerms::exclude) continue;
      expo += 0.5 * cov.at(points[a].i - points[b].i, points[a].j - points[b].j);
    }
  const double total = static_cast<double>(points.size()) * std::log(rho) + expo;
  if (total > max_exponent) throw OverflowError("product density overflow", total);
  return std::exp(total);
}

struct CountMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// E N(B) = rho |B|; Var N(B) = e^{R_0} sum_{z,y in B} e^{(R_{z-y} + R_{y-z})/2} + |B| rho (1 - |B| rho).
inline CountMoments count_moments(const BorelRect& b, const CovarianceTable& cov) {
  b.validate();
  const double r0 = cov.at(0, 0);
  const double rho = cox_intensity(r0);
  const double area = static_cast<double>(b.area());
  double s = 0.0;
  // The double sum depends on z - y only; weight each lag by its multiplicity.
  for (int d1 = -(b.width1() - 1); d1 <= b.width1() - 1; ++d1)
    for (int d2 = -(b.width2() - 1); d2 <= b.width2() - 1; ++d2) {
      const double mult = static_cast<double>(b.width1() - std::abs(d1)) * (b.width2() - std::abs(d2));
      s += mult * std::exp(0.5 * (cov.at(d1, d2) + cov.at(-d1, -d2)));
    }
  return {rho * area, std::exp(r0) * s + area * rho * (1.0 - area * rho)};
}

/// E[N(B) | lambda] = sum_{z in B} exp(X_z(phi)).
inline double ls_count_predictor(const CoeffField& field, const BorelRect& b, const TestFunction& phi) {
  b.validate(field.dims());
  double worst = -std::numeric_limits<double>::infinity(), acc = 0.0;
  for (int i = b.i0; i <= b.i1; ++i)
    for (int j = b.j0; j <= b.j1; ++j) {
      const double x = log_intensity_at(field, {i, j}, phi);
      worst = std::max(worst, x);
      acc += std::exp(std::min(x, max_exponent));
    }
  if (worst > max_exponent) throw OverflowError("conditional intensity overflow", worst);
  return acc;
}

/// Poisson draw with the given mean from a generator seeded by `seed`.
inline std::int64_t sample_poisson(double mean, std::uint64_t seed) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw DomainError("Poisson mean must be finite and >= 0");
  if (mean == 0.0) return 0;
  std::mt19937_64 rng(seed);
  std::poisson_distribution<std::int64_t> pois(mean);
  return pois(rng);
}

inline std::int64_t sample_counts(const CoeffField& field, const BorelRect& b, const TestFunction& phi,
                                  std::uint64_t seed) {
  return sample_poisson(ls_count_predictor(field, b, phi), seed);
}

/// Per mode: l1 c_{i-1,j} + l2 c_{i,j-1} + l3 c_{i-1,j-1}.
inline std::vector<double> plug_in_predict(std::span<const double> up, std::span<const double> left,
                                           std::span<const double> diag, std::span<const Eigentriple> triples) {
  if (up.size() != triples.size() || left.size() != triples.size() || diag.size() != triples.size())
    throw DomainError("neighbor coefficient vectors must have one entry per mode");
  std::vector<double> out(triples.size());
  for (std::size_t k = 0; k < triples.size(); ++k)
    out[k] = triples[k].l1 * up[k] + triples[k].l2 * left[k] + triples[k].l3 * diag[k];
  return out;
}

inline std::vector<Eigentriple> model_triples(const SpectralModel& model, std::span<const double> theta) {
  std::vector<Eigentriple> out;
  for (int k = 1; k <= model.n_modes(); ++k) out.push_back(model.eigentriple(theta, k));
  return out;
}

inline std::vector<double> plug_in_predict(const CoeffField& field, Site s, std::span<const Eigentriple> triples) {
  field.require_site(s);
  if (s.i < 1 || s.j < 1)
    throw BoundaryError("site (" + std::to_string(s.i) + "," + std::to_string(s.j) +
                        ") lacks a quarter-plane neighbor");
  return plug_in_predict(field.site({s.i - 1, s.j}), field.site({s.i, s.j - 1}), field.site({s.i - 1, s.j - 1}),
                         triples);
}

/// Predictions at every interior site (i, j >= 1): an (N1 - 1) x (N2 - 1) field
/// whose entry (i - 1, j - 1) predicts site (i, j).
inline CoeffField plug_in_predict_field(const CoeffField& field, std::span<const Eigentriple> triples) {
  if (field.n1() < 2 || field.n2() < 2) throw BoundaryError("field has no interior sites");
  if (static_cast<int>(triples.size()) != field.n_modes()) throw DomainError("one eigentriple per mode required");
  CoeffField out({field.n1() - 1, field.n2() - 1}, field.basis());
  for (int i = 1; i < field.n1(); ++i)
    for (int j = 1; j < field.n2(); ++j) {
      const auto p = plug_in_predict(field, {i, j}, triples);
      std::copy(p.begin(), p.end(), out.site({i - 1, j - 1}).begin());
    }
  return out;
}

/// R_z(phi)(phi) = sum_k phi_k^2 R_z(k, k) from the model (diagonal in the basis).
inline CovarianceTable functional_cov(const SpectralModel& model, std::span<const double> theta,
                                      const TestFunction& phi, int max_lag1, int max_lag2, int grid = 512) {
  if (static_cast<int>(phi.coeffs.size()) != model.n_modes()) throw DomainError("test function / model mode mismatch");
  CovarianceTable out(max_lag1, max_lag2);
  for (int k = 1; k <= model.n_modes(); ++k) {
    const double w = phi.coeffs[k - 1] * phi.coeffs[k - 1];
    if (w == 0.0) continue;
    const auto t = cov_from_spectrum([&](double w1, double w2) { return model.density(theta, k, w1, w2); },
                                     max_lag1, max_lag2, grid, grid);
    for (int z1 = -max_lag1; z1 <= max_lag1; ++z1)
      for (int z2 = -max_lag2; z2 <= max_lag2; ++z2) out.ref(z1, z2) += w * t.at(z1, z2);
    out.max_imag_residue = std::max(out.max_imag_residue, w * t.max_imag_residue);
  }
  return out;
}

/// R_z(phi)(phi) = sum_{k,l} phi_k phi_l C(z, k, l) from the empirical covariance.
inline CovarianceTable functional_cov(const EmpiricalCov& c, const TestFunction& phi) {
  if (static_cast<int>(phi.coeffs.size()) != c.n_modes()) throw DomainError("test function / field mode mismatch");
  CovarianceTable out(c.max_lag1(), c.max_lag2());
  for (int z1 = -c.max_lag1(); z1 <= c.max_lag1(); ++z1)
    for (int z2 = -c.max_lag2(); z2 <= c.max_lag2(); ++z2) {
      double acc = 0.0;
      for (int k = 0; k < c.n_modes(); ++k)
        for (int l = 0; l < c.n_modes(); ++l) acc += phi.coeffs[k] * phi.coeffs[l] * c.at(z1, z2, k, l);
      out.ref(z1, z2) = acc;
    }
  return out;
}

/// Intensity, pair correlation and product density for a fixed phi.
class CoxMomentSet {
public:
  CoxMomentSet(TestFunction phi, CovarianceTable cov, DiagonalTerms diag = DiagonalTerms::exclude)
      : phi_(std::move(phi)), cov_(std::move(cov)), diag_(diag) {}

  const TestFunction& phi() const { return phi_; }
  const CovarianceTable& cov() const { return cov_; }

  double intensity() const { return cox_intensity(cov_.at(0, 0)); }
  double pair_correlation(int z1, int z2) const { return sarhcox::pair_correlation(cov_.at(z1, z2)); }
  double product_density(std::span<const Site> points) const { return product_density_n(points, cov_, diag_); }
  CountMoments count_moments(const BorelRect& b) const { return sarhcox::count_moments(b, cov_); }

private:
  TestFunction phi_;
  CovarianceTable cov_;
  DiagonalTerms diag_;
};

}  // namespace sarhcox
