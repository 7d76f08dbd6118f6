#pragma once

// Synthetic space-time counts with a known SARH(1) log-intensity component:
// log Lambda_z(t) = trend_z(t) + sum_k X_z(k) phi_k(t), monthly Poisson counts.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "errors.hpp"
#include "hilbert.hpp"
#include "model.hpp"
#include "sarh_sim.hpp"
#include "series.hpp"

namespace sarhcox {

struct SyntheticScenario {
  LatticeDims dims{48, 48};
  int n_periods = 120;
  int n_modes = 10;
  /// Point spectra parameters (layout of SpectralModel::realdata_pmf).
  std::vector<double> theta{0.4, 0.15, -0.1, 0.35, 0.1, -0.1, -0.2, -0.05, 0.05};
  std::optional<PmfGroups> groups;
  double innovation_sd = 0.15;
  /// Mean log count per period at the lattice centre.
  double base_log_level = std::log(3000.0);
  /// Amplitudes of the spatially varying (constant, linear, quadratic, cubic) trend terms.
  double spatial_amplitude = 0.25;
  double slope = 0.4;
  double curvature = -0.3;
  double cubic = 0.2;
  bool poisson = true;
  int burn_in = 50;
  std::uint64_t seed = 1;

  PmfGroups resolved_groups() const { return groups.value_or(PmfGroups::standard(n_modes)); }
};

struct SyntheticData {
  /// Counts per period at sites (i, j) placed at the integer coordinates (i, j).
  GridSeries counts;
  /// Unnormalized true SARH(1) coefficient field.
  CoeffField field;
  std::vector<Eigentriple> triples;
};

/// Cubic-in-time trend with smooth spatial variation.
inline double synthetic_trend(const SyntheticScenario& sc, int i, int j, double t) {
  const double u = static_cast<double>(i) / std::max(1, sc.dims.n1 - 1);
  const double v = static_cast<double>(j) / std::max(1, sc.dims.n2 - 1);
  const double tau = t / sc.n_periods;
  const double pi = std::numbers::pi;
  const double level = sc.base_log_level + sc.spatial_amplitude * std::sin(pi * u) * std::cos(pi * v);
  const double b1 = sc.slope * (0.5 + 0.5 * u);
  const double b2 = sc.curvature * (0.5 + 0.5 * v);
  const double b3 = sc.cubic * std::cos(pi * (u - v));
  return level + b1 * tau + b2 * tau * tau + b3 * tau * tau * tau;
}

inline SyntheticData make_synthetic(const SyntheticScenario& sc) {
  if (sc.n_periods < 2) throw DomainError("synthetic scenario needs at least two periods");
  Sarh1Params params{Family::realdata_pmf, sc.theta, sc.n_modes,
                     std::vector<double>(sc.n_modes, sc.innovation_sd), sc.resolved_groups()};
  const double length = sc.n_periods;
  SyntheticData out{{}, CoeffField(sc.dims, BasisSpec(length, sc.n_modes)), params.triples()};
  if (sc.innovation_sd > 0.0) out.field = simulate_sarh1(params, sc.dims, sc.burn_in, sc.seed, nullptr, length);
  const BasisSpec basis(length, sc.n_modes);
  constexpr int sub = 16;
  std::vector<SiteCoord> sites;
  std::vector<double> times, values;
  for (int m = 1; m <= sc.n_periods; ++m) times.push_back(m);
  for (int i = 0; i < sc.dims.n1; ++i)
    for (int j = 0; j < sc.dims.n2; ++j) {
      sites.push_back({static_cast<double>(i), static_cast<double>(j)});
      const auto c = out.field.site({i, j});
      std::seed_seq seq{static_cast<std::uint32_t>(sc.seed), static_cast<std::uint32_t>(sc.seed >> 32), 0x9e37u,
                        static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)};
      std::mt19937_64 rng(seq);
      auto lambda = [&](double t) {
        double x = synthetic_trend(sc, i, j, t);
        for (int k = 1; k <= sc.n_modes; ++k) x += c[k - 1] * sine_basis_eval(basis, k, t);
        return std::exp(x);
      };
      for (int m = 1; m <= sc.n_periods; ++m) {
        // Composite Simpson over the period.
        const double a = m - 1.0, h = 1.0 / sub;
        double acc = lambda(a) + lambda(a + 1.0);
        for (int q = 1; q < sub; ++q) acc += (q % 2 ? 4.0 : 2.0) * lambda(a + q * h);
        const double mean = acc * h / 3.0;
        if (sc.poisson) {
          std::poisson_distribution<std::int64_t> pois(mean);
          values.push_back(static_cast<double>(pois(rng)));
        } else {
          values.push_back(mean);
        }
      }
    }
  out.counts = GridSeries(std::move(sites), std::move(times), std::move(values));
  return out;
}

/// Every `stride`-th interior raw site (i, j = offset mod stride), as site indices.
inline std::vector<std::size_t> lattice_holdouts(LatticeDims dims, int stride = 4, int offset = 2) {
  std::vector<std::size_t> out;
  for (int i = 1; i < dims.n1 - 1; ++i)
    for (int j = 1; j < dims.n2 - 1; ++j)
      if (i % stride == offset && j % stride == offset) out.push_back(static_cast<std::size_t>(i) * dims.n2 + j);
  return out;
}

}  // namespace sarhcox
