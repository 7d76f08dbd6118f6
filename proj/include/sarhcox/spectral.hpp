#pragma once

// Functional DFT, periodogram operator, empirical covariance coefficients,
// Fejer-smoothed inverse spectra and spectrum -> covariance inversion.

#include <algorithm>
#include <cmath>
#include <complex>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <vector>

#include "errors.hpp"
#include "fft.hpp"
#include "hilbert.hpp"

namespace sarhcox {

using cplx = std::complex<double>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double two_pi_sq = two_pi * two_pi;

/// Complex values over FrequencyGrid x modes, stored (u1, u2, k), k fastest.
struct ModeSpectrum {
  FrequencyGrid grid;
  int n_modes = 0;
  std::vector<cplx> values;

  cplx operator()(int u1, int u2, int k) const {
    return values[(static_cast<std::size_t>(u1) * grid.dims().n2 + u2) * n_modes + k];
  }
};

/// X~_omega = (N (2 pi)^2)^{-1/2} sum_{y=1..N} exp(-i <omega, y>) X_y, each
/// mode separately. Lattice site (i, j) is y = (i + 1, j + 1).
inline ModeSpectrum functional_dft(const CoeffField& field) {
  const int n1 = field.n1(), n2 = field.n2(), m = field.n_modes();
  ModeSpectrum out{FrequencyGrid(field.dims()), m, {}};
  out.values.assign(field.data().begin(), field.data().end());
  fft::transform_2d(out.values, n1, n2, m, fft::Direction::forward);
  const double scale = 1.0 / std::sqrt(static_cast<double>(field.dims().size()) * two_pi_sq);
  for (int u1 = 0; u1 < n1; ++u1) {
    for (int u2 = 0; u2 < n2; ++u2) {
      // Shift from zero-based to one-based site origin.
      const cplx phase = std::polar(scale, -(out.grid.omega1(u1) + out.grid.omega2(u2)));
      for (int k = 0; k < m; ++k) out.values[(static_cast<std::size_t>(u1) * n2 + u2) * m + k] *= phase;
    }
  }
  return out;
}

/// Periodogram operator I_omega(phi_k)(phi_l) = X~_omega(phi_k) X~_{-omega}(phi_l)
/// on the Fourier grid of the sample. The diagonal is always present; the
/// full cross block only when requested.
class Periodogram {
public:
  Periodogram() = default;

  /// Builds a diagonal-only periodogram from real nonnegative values stored
  /// (u1, u2, k); used for model-generated (noise-free) inputs.
  static Periodogram from_diagonal(FrequencyGrid grid, int n_modes, std::vector<double> diag) {
    if (diag.size() != grid.size() * static_cast<std::size_t>(n_modes))
      throw DomainError("periodogram diagonal extent mismatch");
    Periodogram p;
    p.grid_ = grid;
    p.n_modes_ = n_modes;
    p.diag_ = std::move(diag);
    for (double v : p.diag_)
      if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("periodogram diagonal must be finite and >= 0");
    return p;
  }

  static Periodogram from_dft(const ModeSpectrum& x, bool full) {
    Periodogram p;
    p.grid_ = x.grid;
    p.n_modes_ = x.n_modes;
    const int n1 = x.grid.dims().n1, n2 = x.grid.dims().n2, m = x.n_modes;
    p.diag_.resize(x.grid.size() * m);
    if (full) p.cross_.emplace(x.grid.size() * m * m);
    for (int u1 = 0; u1 < n1; ++u1) {
      const int v1 = FrequencyGrid::mirror(u1, n1);
      for (int u2 = 0; u2 < n2; ++u2) {
        const int v2 = FrequencyGrid::mirror(u2, n2);
        const std::size_t cell = static_cast<std::size_t>(u1) * n2 + u2;
        for (int k = 0; k < m; ++k) p.diag_[cell * m + k] = std::norm(x(u1, u2, k));
        if (full)
          for (int k = 0; k < m; ++k)
            for (int l = 0; l < m; ++l)
              (*p.cross_)[(cell * m + k) * m + l] = x(u1, u2, k) * x(v1, v2, l);
      }
    }
    return p;
  }

  const FrequencyGrid& grid() const { return grid_; }
  int n_modes() const { return n_modes_; }
  bool has_cross() const { return cross_.has_value(); }

  /// Real diagonal entry I_omega(phi_k)(phi_k), k zero-based.
  double diag(int u1, int u2, int k) const {
    return diag_[(static_cast<std::size_t>(u1) * grid_.dims().n2 + u2) * n_modes_ + k];
  }

  cplx entry(int u1, int u2, int k, int l) const {
    if (k == l && !cross_) return diag(u1, u2, k);
    if (!cross_) throw DomainError("periodogram holds the diagonal only");
    const std::size_t cell = static_cast<std::size_t>(u1) * grid_.dims().n2 + u2;
    return (*cross_)[(cell * n_modes_ + k) * n_modes_ + l];
  }

  std::span<const double> diagonal() const { return diag_; }

private:
  FrequencyGrid grid_{};
  int n_modes_ = 0;
  std::vector<double> diag_;
  std::optional<std::vector<cplx>> cross_;
};

inline Periodogram periodogram(const CoeffField& field, bool full = false) {
  return Periodogram::from_dft(functional_dft(field), full);
}

/// Un-centered empirical covariance C(z, k, l) = (1/N) sum_y X_y(k) X_{y+z}(l)
/// over the sites y with y and y + z both inside the lattice.
class EmpiricalCov {
public:
  EmpiricalCov(LatticeDims dims, int n_modes, int max_lag1, int max_lag2)
      : dims_(dims), m_(n_modes), l1_(max_lag1), l2_(max_lag2),
        values_(static_cast<std::size_t>(2 * l1_ + 1) * (2 * l2_ + 1) * m_ * m_, 0.0) {}

  int max_lag1() const { return l1_; }
  int max_lag2() const { return l2_; }
  int n_modes() const { return m_; }

  /// Zero for lags reaching beyond the lattice; modes zero-based.
  double at(int z1, int z2, int k, int l) const {
    if (std::abs(z1) >= dims_.n1 || std::abs(z2) >= dims_.n2) return 0.0;
    if (std::abs(z1) > l1_ || std::abs(z2) > l2_)
      throw IndexError("lag (" + std::to_string(z1) + "," + std::to_string(z2) + ") not computed");
    return values_[offset(z1, z2, k, l)];
  }

  double& ref(int z1, int z2, int k, int l) { return values_[offset(z1, z2, k, l)]; }

private:
  std::size_t offset(int z1, int z2, int k, int l) const {
    const std::size_t cell = static_cast<std::size_t>(z1 + l1_) * (2 * l2_ + 1) + (z2 + l2_);
    return (cell * m_ + k) * m_ + l;
  }

  LatticeDims dims_;
  int m_, l1_, l2_;
  std::vector<double> values_;
};

inline EmpiricalCov empirical_cov(const CoeffField& field, int max_lag1, int max_lag2) {
  const int n1 = field.n1(), n2 = field.n2(), m = field.n_modes();
  if (max_lag1 < 0 || max_lag2 < 0 || max_lag1 >= n1 || max_lag2 >= n2)
    throw DomainError("max_lag must satisfy 0 <= L_j < N_j");
  EmpiricalCov cov(field.dims(), m, max_lag1, max_lag2);
  const double inv_n = 1.0 / static_cast<double>(field.dims().size());
  for (int z1 = -max_lag1; z1 <= max_lag1; ++z1) {
    const int i_lo = std::max(0, -z1), i_hi = std::min(n1, n1 - z1);
    for (int z2 = -max_lag2; z2 <= max_lag2; ++z2) {
      const int j_lo = std::max(0, -z2), j_hi = std::min(n2, n2 - z2);
      for (int k = 0; k < m; ++k) {
        for (int l = 0; l < m; ++l) {
          double acc = 0.0;
          for (int i = i_lo; i < i_hi; ++i)
            for (int j = j_lo; j < j_hi; ++j) acc += field(i, j, k) * field(i + z1, j + z2, l);
          cov.ref(z1, z2, k, l) = acc * inv_n;
        }
      }
    }
  }
  return cov;
}

/// Covariance coefficients R_z for |z_j| <= L_j (single functional).
class CovarianceTable {
public:
  CovarianceTable() = default;
  CovarianceTable(int max_lag1, int max_lag2)
      : l1_(max_lag1), l2_(max_lag2),
        values_(static_cast<std::size_t>(2 * max_lag1 + 1) * (2 * max_lag2 + 1), 0.0) {}

  int max_lag1() const { return l1_; }
  int max_lag2() const { return l2_; }
  bool contains(int z1, int z2) const { return std::abs(z1) <= l1_ && std::abs(z2) <= l2_; }

  double at(int z1, int z2) const {
    if (!contains(z1, z2))
      throw IndexError("covariance at lag (" + std::to_string(z1) + "," + std::to_string(z2) +
                       ") unavailable");
    return values_[offset(z1, z2)];
  }
  double& ref(int z1, int z2) { return values_[offset(z1, z2)]; }

  /// Largest imaginary residue met while computing the table.
  double max_imag_residue = 0.0;

private:
  std::size_t offset(int z1, int z2) const {
    return static_cast<std::size_t>(z1 + l1_) * (2 * l2_ + 1) + (z2 + l2_);
  }

  int l1_ = 0, l2_ = 0;
  std::vector<double> values_;
};

/// R_z = int_{[-pi,pi]^2} exp(i <z, omega>) F(omega) d omega, trapezoid on a
/// periodic G1 x G2 grid. `density(w1, w2)` must return F.
template <class Density>
CovarianceTable cov_from_spectrum(const Density& density, int max_lag1, int max_lag2,
                                  int grid1 = 512, int grid2 = 512) {
  if (max_lag1 < 0 || max_lag2 < 0) throw DomainError("lags must be nonnegative");
  if (2 * max_lag1 >= grid1 || 2 * max_lag2 >= grid2)
    throw ResolutionError("frequency grid too coarse for requested lag (need grid > 2 * lag)");
  std::vector<cplx> buf(static_cast<std::size_t>(grid1) * grid2);
  for (int u1 = 0; u1 < grid1; ++u1)
    for (int u2 = 0; u2 < grid2; ++u2)
      buf[static_cast<std::size_t>(u1) * grid2 + u2] =
          density(two_pi * u1 / grid1, two_pi * u2 / grid2);
  fft::transform_2d(buf, grid1, grid2, 1, fft::Direction::backward);
  const double w = two_pi_sq / (static_cast<double>(grid1) * grid2);
  CovarianceTable table(max_lag1, max_lag2);
  for (int z1 = -max_lag1; z1 <= max_lag1; ++z1) {
    for (int z2 = -max_lag2; z2 <= max_lag2; ++z2) {
      const int u1 = (z1 + grid1) % grid1, u2 = (z2 + grid2) % grid2;
      const cplx v = buf[static_cast<std::size_t>(u1) * grid2 + u2] * w;
      table.ref(z1, z2) = v.real();
      table.max_imag_residue = std::max(table.max_imag_residue, std::abs(v.imag()));
    }
  }
  return table;
}

/// Evaluates F(omega) = (2 pi)^{-2} sum_z R_z exp(-i <omega, z>) from a table.
inline double spectrum_from_cov(const CovarianceTable& cov, double w1, double w2) {
  double acc = 0.0;
  for (int z1 = -cov.max_lag1(); z1 <= cov.max_lag1(); ++z1)
    for (int z2 = -cov.max_lag2(); z2 <= cov.max_lag2(); ++z2)
      acc += cov.at(z1, z2) * std::cos(w1 * z1 + w2 * z2);
  return acc / two_pi_sq;
}

/// Cesaro (Fejer) partial sums of the Fourier series of 1/F. Fourier
/// coefficients g(z) = (2 pi)^{-2} int exp(i <xi, z>) / F(xi) d xi come from a
/// periodic quadrature grid (default 256^2).
class FejerInverse {
public:
  template <class Density>
  explicit FejerInverse(const Density& density, int grid = 256) : g_(grid) {
    if (grid < 8) throw ResolutionError("Fejer quadrature grid must be at least 8");
    coeffs_.resize(static_cast<std::size_t>(grid) * grid);
    for (int u1 = 0; u1 < grid; ++u1) {
      for (int u2 = 0; u2 < grid; ++u2) {
        const double f = density(two_pi * u1 / grid, two_pi * u2 / grid);
        if (!(f > 0.0) || !std::isfinite(f))
          throw SingularityError("spectral density not invertible", two_pi * u1 / grid,
                                 two_pi * u2 / grid);
        coeffs_[static_cast<std::size_t>(u1) * grid + u2] = 1.0 / f;
      }
    }
    fft::transform_2d(coeffs_, grid, grid, 1, fft::Direction::backward);
    const double w = 1.0 / (static_cast<double>(grid) * grid);
    for (auto& c : coeffs_) c *= w;
    // Coefficients near the folding lag should have decayed; otherwise the
    // quadrature aliases and the smoothed sums are not trustworthy.
    double head = std::abs(coeffs_[0]), tail = 0.0;
    for (int z1 = -grid / 2 + 1; z1 <= grid / 2; ++z1)
      for (int z2 = -grid / 2 + 1; z2 <= grid / 2; ++z2)
        if (std::max(std::abs(z1), std::abs(z2)) >= grid / 4) tail = std::max(tail, std::abs(g(z1, z2)));
    if (tail > 1e-8 * head)
      throw ConvergenceError("Fejer quadrature not converged: Fourier coefficients of 1/F decay too slowly");
  }

  /// g(z) for |z_j| < grid / 2.
  cplx g(int z1, int z2) const {
    const int u1 = (z1 % g_ + g_) % g_, u2 = (z2 % g_ + g_) % g_;
    return coeffs_[static_cast<std::size_t>(u1) * g_ + u2];
  }

  /// q^M(omega) = sum_{|z_j| < M_j} prod_j (1 - |z_j| / M_j) g(z) exp(-i <omega, z>).
  double smoothed(int m1, int m2, double w1, double w2) const {
    if (m1 < 1 || m2 < 1) throw DomainError("Fejer order must be positive");
    if (2 * m1 > g_ || 2 * m2 > g_) throw ResolutionError("Fejer order exceeds quadrature resolution");
    cplx acc = 0.0;
    for (int z1 = -m1 + 1; z1 < m1; ++z1) {
      const double a = 1.0 - std::abs(z1) / static_cast<double>(m1);
      for (int z2 = -m2 + 1; z2 < m2; ++z2) {
        const double b = 1.0 - std::abs(z2) / static_cast<double>(m2);
        acc += a * b * g(z1, z2) * std::polar(1.0, -(w1 * z1 + w2 * z2));
      }
    }
    return acc.real();
  }

private:
  int g_;
  std::vector<cplx> coeffs_;
};

/// CSV columns omega1,omega2,k,l,re,im (modes 1-based); cross entries only when stored.
inline void write_periodogram_csv(std::ostream& os, const Periodogram& pg) {
  const auto& g = pg.grid();
  const int m = pg.n_modes();
  os << "omega1,omega2,k,l,re,im\n" << std::setprecision(17);
  for (int u1 = 0; u1 < g.dims().n1; ++u1)
    for (int u2 = 0; u2 < g.dims().n2; ++u2)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) {
          if (k != l && !pg.has_cross()) continue;
          const cplx v = pg.entry(u1, u2, k, l);
          os << g.omega1(u1) << ',' << g.omega2(u2) << ',' << k + 1 << ',' << l + 1 << ',' << v.real() << ','
             << v.imag() << '\n';
        }
}

/// CSV columns z1,z2,k,l,value (modes 1-based).
inline void write_empirical_cov_csv(std::ostream& os, const EmpiricalCov& c) {
  os << "z1,z2,k,l,value\n" << std::setprecision(17);
  for (int z1 = -c.max_lag1(); z1 <= c.max_lag1(); ++z1)
    for (int z2 = -c.max_lag2(); z2 <= c.max_lag2(); ++z2)
      for (int k = 0; k < c.n_modes(); ++k)
        for (int l = 0; l < c.n_modes(); ++l)
          os << z1 << ',' << z2 << ',' << k + 1 << ',' << l + 1 << ',' << c.at(z1, z2, k, l) << '\n';
}

}  // namespace sarhcox
