#pragma once

// Function-space plumbing: the sine basis on [0, L], coefficient fields over
// a rectangular lattice, and the Fourier frequency grid of that lattice.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace sarhcox {

/// Scaling convention of the sine basis.
///   sine:        phi_p(t) = sin(pi p t / L)              (norm^2 = L/2)
///   orthonormal: phi_p(t) = sqrt(2/L) sin(pi p t / L)    (norm^2 = 1)
enum class BasisNormalization { sine, orthonormal };

enum class BasisKind { sine };

struct BasisSpec {
  double support_length = 1.0;
  int n_modes = 1;
  BasisKind kind = BasisKind::sine;
  BasisNormalization normalization = BasisNormalization::sine;

  BasisSpec() = default;
  BasisSpec(double length, int modes,
            BasisNormalization norm = BasisNormalization::sine)
      : support_length(length), n_modes(modes), normalization(norm) {
    validate();
  }

  void validate() const {
    if (!(support_length > 0.0) || !std::isfinite(support_length))
      throw DomainError("basis support_length must be positive and finite");
    if (n_modes < 1) throw DomainError("basis n_modes must be >= 1");
  }

  /// Multiplier applied to sin(pi p t / L) under the active convention.
  double scale() const {
    return normalization == BasisNormalization::orthonormal ? std::sqrt(2.0 / support_length)
                                                            : 1.0;
  }

  /// Squared L2 norm of every basis function.
  double norm2() const {
    return normalization == BasisNormalization::orthonormal ? 1.0 : support_length / 2.0;
  }
};

/// Value of basis function p (1-based) at t.
inline double sine_basis_eval(const BasisSpec& spec, int p, double t) {
  if (p < 1 || p > spec.n_modes)
    throw DomainError("basis mode index " + std::to_string(p) + " outside [1, " +
                      std::to_string(spec.n_modes) + "]");
  const double slack = 1e-12 * spec.support_length;
  if (!(t >= -slack && t <= spec.support_length + slack))
    throw DomainError("basis argument t=" + std::to_string(t) + " outside [0, support_length]");
  return spec.scale() * std::sin(std::numbers::pi * p * t / spec.support_length);
}

/// Uniform grid of n points covering [0, L] including both ends.
inline std::vector<double> uniform_grid(double length, std::size_t n) {
  if (n < 2) throw ResolutionError("uniform grid needs at least 2 points");
  std::vector<double> t(n);
  const double h = length / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) t[i] = h * static_cast<double>(i);
  t.back() = length;
  return t;
}

/// Coefficients of `samples` (taken on the uniform grid over [0, L]) with
/// respect to the basis: c_p = <f, phi_p> / |phi_p|^2, composite trapezoid.
inline std::vector<double> project_samples(std::span<const double> samples, const BasisSpec& spec) {
  spec.validate();
  const std::size_t n = samples.size();
  if (n < static_cast<std::size_t>(2 * spec.n_modes + 1))
    throw ResolutionError("projection needs at least 2M+1 samples, got " + std::to_string(n));
  const double h = spec.support_length / static_cast<double>(n - 1);
  const double w0 = std::numbers::pi / static_cast<double>(n - 1);
  std::vector<double> coeffs(spec.n_modes, 0.0);
  for (int p = 1; p <= spec.n_modes; ++p) {
    // phi_p vanishes at both endpoints, so the trapezoid end weights drop out.
    double acc = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) acc += samples[i] * std::sin(w0 * p * static_cast<double>(i));
    coeffs[p - 1] = h * spec.scale() * acc / spec.norm2();
  }
  return coeffs;
}

/// Evaluates sum_p c_p phi_p on the uniform n-point grid over [0, L].
inline std::vector<double> synthesize(std::span<const double> coeffs, const BasisSpec& spec,
                                      std::size_t n) {
  if (coeffs.size() > static_cast<std::size_t>(spec.n_modes))
    throw DomainError("more coefficients than basis modes");
  std::vector<double> out(n, 0.0);
  if (n < 2) throw ResolutionError("synthesis grid needs at least 2 points");
  const double w0 = std::numbers::pi / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t p = 0; p < coeffs.size(); ++p)
      acc += coeffs[p] * std::sin(w0 * static_cast<double>(p + 1) * static_cast<double>(i));
    out[i] = spec.scale() * acc;
  }
  return out;
}

struct LatticeDims {
  int n1 = 0;
  int n2 = 0;

  std::size_t size() const { return static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2); }
  bool operator==(const LatticeDims&) const = default;
};

/// Lattice site, zero-based (i along the first axis, j along the second).
struct Site {
  int i = 0;
  int j = 0;
};

/// Real coefficient array over an N1 x N2 lattice, M modes per site.
/// Storage order is (i, j, k) with k fastest.
class CoeffField {
public:
  CoeffField() = default;

  CoeffField(LatticeDims dims, BasisSpec basis)
      : dims_(dims), basis_(basis),
        data_(dims.size() * static_cast<std::size_t>(basis.n_modes), 0.0) {
    check_dims();
  }

  CoeffField(LatticeDims dims, BasisSpec basis, std::vector<double> data)
      : dims_(dims), basis_(basis), data_(std::move(data)) {
    check_dims();
    if (data_.size() != dims_.size() * static_cast<std::size_t>(basis_.n_modes))
      throw DomainError("coefficient data extent does not match dims x modes");
    for (double v : data_)
      if (!std::isfinite(v)) throw DomainError("coefficient field entries must be finite");
  }

  LatticeDims dims() const { return dims_; }
  int n1() const { return dims_.n1; }
  int n2() const { return dims_.n2; }
  int n_modes() const { return basis_.n_modes; }
  const BasisSpec& basis() const { return basis_; }

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * static_cast<std::size_t>(dims_.n2) +
            static_cast<std::size_t>(j)) *
               static_cast<std::size_t>(basis_.n_modes) +
           static_cast<std::size_t>(k);
  }

  bool contains(Site s) const { return s.i >= 0 && s.i < dims_.n1 && s.j >= 0 && s.j < dims_.n2; }

  /// Mode k is zero-based here.
  double operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }
  double& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }

  std::span<const double> site(Site s) const {
    require_site(s);
    return {data_.data() + index(s.i, s.j, 0), static_cast<std::size_t>(basis_.n_modes)};
  }
  std::span<double> site(Site s) {
    require_site(s);
    return {data_.data() + index(s.i, s.j, 0), static_cast<std::size_t>(basis_.n_modes)};
  }

  /// Copy of one mode as an N1 x N2 row-major plane.
  std::vector<double> mode_plane(int k) const {
    std::vector<double> plane(dims_.size());
    for (int i = 0; i < dims_.n1; ++i)
      for (int j = 0; j < dims_.n2; ++j)
        plane[static_cast<std::size_t>(i) * dims_.n2 + j] = (*this)(i, j, k);
    return plane;
  }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  void require_site(Site s) const {
    if (!contains(s))
      throw IndexError("site (" + std::to_string(s.i) + "," + std::to_string(s.j) +
                       ") outside lattice " + std::to_string(dims_.n1) + "x" +
                       std::to_string(dims_.n2));
  }

private:
  void check_dims() const {
    if (dims_.n1 < 1 || dims_.n2 < 1) throw DomainError("lattice dims must be positive");
    basis_.validate();
  }

  LatticeDims dims_{};
  BasisSpec basis_{};
  std::vector<double> data_;
};

/// X_z(t) = sum_k c_{z,k} phi_k(t).
inline double evaluate_field(const CoeffField& field, Site site, double t) {
  auto c = field.site(site);
  double acc = 0.0;
  for (int k = 0; k < field.n_modes(); ++k) acc += c[k] * sine_basis_eval(field.basis(), k + 1, t);
  return acc;
}

/// Fourier frequencies omega_z = (2 pi z1 / N1, 2 pi z2 / N2) with
/// -N_j/2 < z_j <= floor(N_j/2). Index u in [0, N_j) is the DFT bin; it maps
/// to z_j = u for u <= N_j/2 and u - N_j otherwise.
class FrequencyGrid {
public:
  FrequencyGrid() = default;
  explicit FrequencyGrid(LatticeDims dims) : dims_(dims) {
    if (dims.n1 < 1 || dims.n2 < 1) throw DomainError("frequency grid dims must be positive");
  }

  LatticeDims dims() const { return dims_; }
  std::size_t size() const { return dims_.size(); }

  static int signed_index(int u, int n) { return u <= n / 2 ? u : u - n; }

  /// DFT bin holding the negated frequency.
  static int mirror(int u, int n) { return u == 0 ? 0 : n - u; }

  double omega1(int u1) const {
    return 2.0 * std::numbers::pi * signed_index(u1, dims_.n1) / dims_.n1;
  }
  double omega2(int u2) const {
    return 2.0 * std::numbers::pi * signed_index(u2, dims_.n2) / dims_.n2;
  }

private:
  LatticeDims dims_{};
};

}  // namespace sarhcox
