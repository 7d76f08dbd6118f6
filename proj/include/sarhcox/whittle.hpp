#pragma once

// Whittle-type contrast sigma_N(theta) = max_{k<=M} (1/N) sum_omega I_omega(k,k) / F_omega(k,k)
// and its minimization over the parameter box.

#include <array>
#include <chrono>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "optimize.hpp"
#include "spectral.hpp"

namespace sarhcox {

/// Componentwise normalizing numerators sigma^2_k by periodic trapezoid
/// quadrature of log |A|^2 on a grid x grid mesh.
inline std::vector<double> normalize_c2(const SpectralModel& model, std::span<const double> theta,
                                        int grid = 512) {
  std::vector<double> out(model.n_modes());
  for (int k = 1; k <= model.n_modes(); ++k)
    out[k - 1] = c2_numerator_from_log_integral(log_modulus_integral_quadrature(model.eigentriple(theta, k), grid));
  return out;
}

/// (1/N) sum_omega log((2 pi)^2 F) mapped back to the integral scale, i.e.
/// the trapezoid value of int log((2 pi)^2 F) d omega on a grid x grid mesh.
inline double log_density_integral(const SpectralModel& model, std::span<const double> theta, int k,
                                   int grid = 512) {
  double acc = 0.0;
  for (int u1 = 0; u1 < grid; ++u1)
    for (int u2 = 0; u2 < grid; ++u2)
      acc += std::log(two_pi_sq * model.density(theta, k, two_pi * u1 / grid, two_pi * u2 / grid));
  return acc * two_pi_sq / (static_cast<double>(grid) * grid);
}

/// Riemann-sum contrast of one mode (k zero-based) on the periodogram grid.
inline double whittle_mode_loss(const SpectralModel& model, std::span<const double> theta, const Periodogram& pg,
                                int k) {
  const auto& grid = pg.grid();
  const int n1 = grid.dims().n1, n2 = grid.dims().n2;
  double acc = 0.0;
  for (int u1 = 0; u1 < n1; ++u1) {
    const double w1 = grid.omega1(u1);
    for (int u2 = 0; u2 < n2; ++u2) {
      const double w2 = grid.omega2(u2);
      const double f = model.density(theta, k + 1, w1, w2);
      if (!(f > 0.0)) throw SingularityError("non-positive spectral density", w1, w2);
      acc += std::abs(pg.diag(u1, u2, k) / f);
    }
  }
  return acc / static_cast<double>(grid.size());
}

inline double whittle_loss(const SpectralModel& model, std::span<const double> theta, const Periodogram& pg) {
  if (pg.n_modes() < model.n_modes()) throw DomainError("periodogram has fewer modes than the model");
  double best = 0.0;
  for (int k = 0; k < model.n_modes(); ++k) best = std::max(best, whittle_mode_loss(model, theta, pg, k));
  return best;
}

/// Per-mode periodogram moments (1/N) sum_omega I(omega) b(omega) for
/// b in {1, cos w1, cos w2, cos(w1+w2), cos(w1-w2)}. Since 1/F is a
/// trigonometric polynomial in these terms, the contrast becomes a dot
/// product and each evaluation costs O(M).
struct WhittleStats {
  int n_modes = 0;
  std::vector<std::array<double, 5>> moments;

  static WhittleStats from(const Periodogram& pg) {
    WhittleStats s;
    s.n_modes = pg.n_modes();
    s.moments.assign(s.n_modes, {0, 0, 0, 0, 0});
    const auto& grid = pg.grid();
    const int n1 = grid.dims().n1, n2 = grid.dims().n2;
    for (int u1 = 0; u1 < n1; ++u1) {
      const double w1 = grid.omega1(u1);
      for (int u2 = 0; u2 < n2; ++u2) {
        const double w2 = grid.omega2(u2);
        const std::array<double, 5> b{1.0, std::cos(w1), std::cos(w2), std::cos(w1 + w2), std::cos(w1 - w2)};
        for (int k = 0; k < s.n_modes; ++k) {
          const double v = pg.diag(u1, u2, k);
          for (int q = 0; q < 5; ++q) s.moments[k][q] += v * b[q];
        }
      }
    }
    const double inv_n = 1.0 / static_cast<double>(grid.size());
    for (auto& m : s.moments)
      for (double& v : m) v *= inv_n;
    return s;
  }
};

inline double whittle_mode_loss(const SpectralModel& model, std::span<const double> theta, const WhittleStats& st,
                                int k) {
  const Eigentriple t = model.eigentriple(theta, k + 1);
  if (model.requires_stability() && !is_stable(t))
    throw SingularityError("non-stationary eigentriple for mode " + std::to_string(k + 1));
  const auto c = ar_modulus2_coeffs(t);
  double acc = 0.0;
  for (int q = 0; q < 5; ++q) acc += c[q] * st.moments[k][q];
  return acc / model.numerator(theta, k + 1);
}

inline double whittle_loss(const SpectralModel& model, std::span<const double> theta, const WhittleStats& st) {
  if (st.n_modes < model.n_modes()) throw DomainError("periodogram has fewer modes than the model");
  double best = 0.0;
  for (int k = 0; k < model.n_modes(); ++k) best = std::max(best, whittle_mode_loss(model, theta, st, k));
  return best;
}

/// Maximum over the listed modes (1-based) only.
inline double whittle_loss(const SpectralModel& model, std::span<const double> theta, const WhittleStats& st,
                           std::span<const int> modes) {
  if (modes.empty()) return whittle_loss(model, theta, st);
  double best = 0.0;
  for (int k : modes) {
    if (k < 1 || k > model.n_modes() || k > st.n_modes) throw DomainError("loss mode index outside [1, M]");
    best = std::max(best, whittle_mode_loss(model, theta, st, k - 1));
  }
  return best;
}

struct ThetaEstimate {
  std::vector<double> theta_hat;
  double loss_at_min = 0.0;
  int n_loss_evals = 0;
  bool converged = false;
  std::vector<optim::StartRecord> multistart_table;
  double runtime_seconds = 0.0;
};

/// max: sigma_N itself. max_tiebreak: sigma_N + w * mean_k loss_k, which
/// picks among the near-minimizers of sigma_N the one with the smallest mean
/// loss; parameters that only enter non-maximal modes are otherwise flat.
/// mean: the pooled average over modes.
enum class LossAggregate { max, max_tiebreak, mean };

inline std::string to_string(LossAggregate a) {
  switch (a) {
    case LossAggregate::max: return "max";
    case LossAggregate::max_tiebreak: return "max_tiebreak";
    case LossAggregate::mean: return "mean";
  }
  return "max";
}

inline LossAggregate loss_aggregate_from_string(const std::string& s) {
  if (s == "max") return LossAggregate::max;
  if (s == "max_tiebreak") return LossAggregate::max_tiebreak;
  if (s == "mean") return LossAggregate::mean;
  throw DomainError("unknown loss aggregate '" + s + "' (expected max, max_tiebreak or mean)");
}

struct EstimateOptions {
  optim::Options optimizer{};
  /// Modes entering the loss (1-based); empty uses all.
  std::vector<int> modes;
  LossAggregate aggregate = LossAggregate::max;
  double tiebreak_weight = 1e-2;
};

inline double aggregate_loss(const SpectralModel& model, std::span<const double> theta, const WhittleStats& st,
                             const EstimateOptions& opts) {
  if (opts.aggregate == LossAggregate::max) return whittle_loss(model, theta, st, opts.modes);
  std::vector<int> all;
  std::span<const int> modes = opts.modes;
  if (modes.empty()) {
    for (int k = 1; k <= model.n_modes(); ++k) all.push_back(k);
    modes = all;
  }
  double mx = 0.0, sum = 0.0;
  for (int k : modes) {
    if (k < 1 || k > model.n_modes() || k > st.n_modes) throw DomainError("loss mode index outside [1, M]");
    const double v = whittle_mode_loss(model, theta, st, k - 1);
    mx = std::max(mx, v);
    sum += v;
  }
  const double mean = sum / static_cast<double>(modes.size());
  return opts.aggregate == LossAggregate::mean ? mean : mx + opts.tiebreak_weight * mean;
}

inline ThetaEstimate estimate(const SpectralModel& model, const WhittleStats& stats, const EstimateOptions& opts = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const optim::Objective f = [&](std::span<const double> th) { return aggregate_loss(model, th, stats, opts); };
  optim::Result r = optim::minimize(f, model.box(), opts.optimizer);
  ThetaEstimate est;
  est.theta_hat = std::move(r.x);
  est.loss_at_min = whittle_loss(model, est.theta_hat, stats, opts.modes);
  est.n_loss_evals = r.evals;
  est.converged = r.converged;
  est.multistart_table = std::move(r.starts);
  est.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return est;
}

inline ThetaEstimate estimate(const SpectralModel& model, const Periodogram& pg, const EstimateOptions& opts = {}) {
  return estimate(model, WhittleStats::from(pg), opts);
}

/// Noise-free periodogram I := F_{., theta} on the Fourier grid of `dims`.
inline Periodogram model_periodogram(const SpectralModel& model, std::span<const double> theta, LatticeDims dims) {
  FrequencyGrid grid(dims);
  const int m = model.n_modes();
  std::vector<double> diag(grid.size() * m);
  for (int u1 = 0; u1 < dims.n1; ++u1)
    for (int u2 = 0; u2 < dims.n2; ++u2)
      for (int k = 0; k < m; ++k)
        diag[(static_cast<std::size_t>(u1) * dims.n2 + u2) * m + k] =
            model.density(theta, k + 1, grid.omega1(u1), grid.omega2(u2));
  return Periodogram::from_diagonal(grid, m, std::move(diag));
}

/// (2 pi)^{-2} int F_{theta1} / F_{theta2} d omega for mode k on a grid x grid mesh.
inline double density_ratio_integral(const SpectralModel& model, std::span<const double> theta1,
                                     std::span<const double> theta2, int k, int grid = 128) {
  double acc = 0.0;
  for (int u1 = 0; u1 < grid; ++u1)
    for (int u2 = 0; u2 < grid; ++u2) {
      const double w1 = two_pi * u1 / grid, w2 = two_pi * u2 / grid;
      acc += model.density(theta1, k, w1, w2) / model.density(theta2, k, w1, w2);
    }
  return acc / (static_cast<double>(grid) * grid);
}

}  // namespace sarhcox
