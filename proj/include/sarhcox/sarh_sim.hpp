#pragma once

// Gaussian SARH(1) coefficient fields: one scalar quarter-plane
// autoregression per mode, driven by independent Gaussian innovations.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "hilbert.hpp"
#include "model.hpp"
#include "sarh_model.hpp"

namespace sarhcox {

struct Sarh1Params {
  Family family = Family::example1;
  std::vector<double> theta;
  int n_modes = 10;
  /// Innovation standard deviation per mode. Empty selects the values whose
  /// spectral numerator satisfies the componentwise normalization.
  std::vector<double> noise_sd;
  /// Point spectra grouping (realdata_pmf only).
  std::optional<PmfGroups> groups;

  static Sarh1Params example1(double theta, int n_modes = 10) {
    return {Family::example1, {theta}, n_modes, {}, std::nullopt};
  }
  static Sarh1Params example2(std::vector<double> theta, int n_modes = 10) {
    return {Family::example2, std::move(theta), n_modes, {}, std::nullopt};
  }
  static Sarh1Params custom(const std::vector<Eigentriple>& triples) {
    Sarh1Params p{Family::custom, {}, static_cast<int>(triples.size()), {}, std::nullopt};
    for (const auto& t : triples) p.theta.insert(p.theta.end(), {t.l1, t.l2, t.l3});
    return p;
  }

  /// Model with an unrestricted box for custom triples, so any triple can be simulated.
  SpectralModel model() const {
    switch (family) {
      case Family::example1: return SpectralModel::example1(n_modes);
      case Family::example2: return SpectralModel::example2(n_modes);
      case Family::realdata_pmf:
        return SpectralModel::realdata_pmf(n_modes, groups.value_or(PmfGroups::standard(n_modes)), {-10, 10},
                                           {-10, 10});
      case Family::custom: return SpectralModel::custom(n_modes, {-1e6, 1e6});
    }
    throw DomainError("unknown family");
  }

  std::vector<Eigentriple> triples() const {
    const SpectralModel m = model();
    std::vector<Eigentriple> out;
    for (int k = 1; k <= n_modes; ++k) out.push_back(m.eigentriple(theta, k));
    return out;
  }

  /// Innovation SDs, resolving the normalizing default. The density
  /// sigma^2 / |A|^2 of a field with innovation variance s^2 has
  /// sigma^2 = s^2 / (2 pi)^2.
  std::vector<double> innovation_sd() const {
    if (!noise_sd.empty()) {
      if (static_cast<int>(noise_sd.size()) != n_modes) throw DomainError("one noise_sd per mode required");
      for (double s : noise_sd)
        if (!(s >= 0.0)) throw DomainError("noise_sd must be >= 0");
      return noise_sd;
    }
    const SpectralModel m = model();
    std::vector<double> out;
    for (int k = 1; k <= n_modes; ++k) out.push_back(std::sqrt(two_pi_sq * m.numerator(theta, k)));
    return out;
  }
};

struct StationarityReport {
  /// True iff the crude bound |l1| + |l2| + |l3| < 1 holds for every mode.
  bool crude_bound = true;
  /// True iff every characteristic polynomial is zero-free on the closed bidisk.
  bool stable = true;
  std::vector<double> crude_margins;
  std::vector<double> exact_margins;
  int first_unstable_mode = 0;  ///< 1-based; 0 when all modes are stable
};

inline StationarityReport check_stationarity(const Sarh1Params& params) {
  StationarityReport r;
  const auto tr = params.triples();
  for (std::size_t k = 0; k < tr.size(); ++k) {
    r.crude_margins.push_back(crude_margin(tr[k]));
    r.exact_margins.push_back(exact_margin(tr[k]));
    if (!(r.crude_margins.back() > 0.0)) r.crude_bound = false;
    if (!is_stable(tr[k]) && r.stable) {
      r.stable = false;
      r.first_unstable_mode = static_cast<int>(k) + 1;
    }
  }
  return r;
}

/// Simulates the field on an (N1 + burn_in) x (N2 + burn_in) lattice with
/// zero boundary values, sweeping rows then columns, and keeps the last
/// N1 x N2 block. Mode k draws from its own stream seeded by (seed, k).
inline CoeffField simulate_sarh1(const Sarh1Params& params, LatticeDims dims, int burn_in, std::uint64_t seed,
                                 std::vector<std::string>* warnings = nullptr, double support_length = 1.0) {
  if (dims.n1 < 2 || dims.n2 < 2) throw DomainError("simulation lattice must be at least 2x2");
  if (burn_in < 0) throw DomainError("burn_in must be >= 0");
  const StationarityReport st = check_stationarity(params);
  if (!st.stable)
    throw StationarityError("mode " + std::to_string(st.first_unstable_mode) + " is not stationary",
                            st.first_unstable_mode);
  if (!st.crude_bound && warnings)
    for (std::size_t k = 0; k < st.crude_margins.size(); ++k)
      if (!(st.crude_margins[k] > 0.0))
        warnings->push_back("mode " + std::to_string(k + 1) + ": |l1|+|l2|+|l3| = " +
                            std::to_string(1.0 - st.crude_margins[k]) +
                            " >= 1, but the characteristic polynomial has no zero on the closed bidisk");
  const auto tr = params.triples();
  const auto sd = params.innovation_sd();
  const int m = params.n_modes;
  const int r1 = dims.n1 + burn_in, c1 = dims.n2 + burn_in;
  CoeffField out(dims, BasisSpec(support_length, m));
  std::vector<double> buf(static_cast<std::size_t>(r1 + 1) * (c1 + 1));
  for (int k = 0; k < m; ++k) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(k)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::fill(buf.begin(), buf.end(), 0.0);
    const double a = tr[k].l1, b = tr[k].l2, c = tr[k].l3, s = sd[k];
    auto at = [&](int i, int j) -> double& { return buf[static_cast<std::size_t>(i) * (c1 + 1) + j]; };
    // Row 0 and column 0 hold the zero boundary.
    for (int i = 1; i <= r1; ++i)
      for (int j = 1; j <= c1; ++j)
        at(i, j) = a * at(i - 1, j) + b * at(i, j - 1) + c * at(i - 1, j - 1) + s * normal(rng);
    for (int i = 0; i < dims.n1; ++i)
      for (int j = 0; j < dims.n2; ++j) out(i, j, k) = at(burn_in + 1 + i, burn_in + 1 + j);
  }
  return out;
}

}  // namespace sarhcox
