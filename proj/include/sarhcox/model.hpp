#pragma once

// Parametric spectral families F_{omega,theta}(phi_k)(phi_k), diagonal in the
// basis. Every family maps (theta, k) to an eigentriple; the numerator of the
// rational density is the componentwise normalizing value unless overridden.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "sarh_model.hpp"

namespace sarhcox {

enum class Family { example1, example2, realdata_pmf, custom };

inline std::string to_string(Family f) {
  switch (f) {
    case Family::example1: return "example1";
    case Family::example2: return "example2";
    case Family::realdata_pmf: return "realdata_pmf";
    case Family::custom: return "custom";
  }
  return "unknown";
}

inline Family family_from_string(const std::string& s) {
  if (s == "example1") return Family::example1;
  if (s == "example2") return Family::example2;
  if (s == "realdata_pmf") return Family::realdata_pmf;
  if (s == "custom") return Family::custom;
  throw DomainError("unknown family '" + s + "'");
}

/// Grouping of the odd modes sharing one theta_{i,2} value in the point
/// spectra model. group[p - 1] is the group of mode p, or -1 when the mode
/// carries no second coefficient (even p, where |sin(p pi / 2)| = 0).
struct PmfGroups {
  std::vector<int> group;
  int n_groups = 0;

  /// Odd modes {1, 3, 5} in group 0, {7, 9, 11, ...} in group 1.
  static PmfGroups standard(int n_modes) {
    PmfGroups g;
    g.group.resize(n_modes);
    for (int p = 1; p <= n_modes; ++p) g.group[p - 1] = (p % 2 == 0) ? -1 : (p <= 5 ? 0 : 1);
    g.n_groups = n_modes >= 7 ? 2 : 1;
    return g;
  }

  void validate(int n_modes) const {
    if (static_cast<int>(group.size()) != n_modes) throw DomainError("pmf group table must cover every mode");
    for (int p = 1; p <= n_modes; ++p) {
      const int g = group[p - 1];
      if (g < -1 || g >= n_groups) throw DomainError("pmf group index out of range");
      if (p % 2 == 0 && g != -1) throw DomainError("even modes carry no second pmf coefficient");
    }
  }
};

class SpectralModel {
public:
  static SpectralModel example1(int n_modes = 10) {
    return SpectralModel(Family::example1, n_modes, {example1_box});
  }

  static SpectralModel example2(int n_modes = 10) {
    return SpectralModel(Family::example2, n_modes, {example2_box.begin(), example2_box.end()});
  }

  /// theta layout: for operator i = 1..3, (theta_{i,1}, theta_{i,2}(g) for each group g).
  static SpectralModel realdata_pmf(int n_modes, PmfGroups groups, Interval base = {-0.9, 0.9},
                                    Interval odd = {-0.5, 0.5}) {
    groups.validate(n_modes);
    std::vector<Interval> box;
    for (int i = 0; i < 3; ++i) {
      box.push_back(base);
      for (int g = 0; g < groups.n_groups; ++g) box.push_back(odd);
    }
    SpectralModel m(Family::realdata_pmf, n_modes, std::move(box));
    m.groups_ = std::move(groups);
    return m;
  }

  /// theta = (l1, l2, l3) for each mode in turn.
  static SpectralModel custom(int n_modes, Interval each = {-0.99, 0.99}) {
    return SpectralModel(Family::custom, n_modes, std::vector<Interval>(3 * n_modes, each));
  }

  Family family() const { return family_; }
  int n_modes() const { return n_modes_; }
  std::size_t n_params() const { return box_.size(); }
  std::span<const Interval> box() const { return box_; }
  const PmfGroups& groups() const { return groups_; }

  void set_box(std::vector<Interval> box) {
    if (box.size() != box_.size()) throw DomainError("theta box has the wrong dimension");
    for (const auto& iv : box)
      if (!(iv.hi >= iv.lo)) throw DomainError("theta box intervals must satisfy lo <= hi");
    box_ = std::move(box);
  }

  /// Fixes sigma^2_k explicitly instead of the normalizing value.
  void set_numerators(std::vector<double> sigma2) {
    if (!sigma2.empty() && static_cast<int>(sigma2.size()) != n_modes_)
      throw DomainError("one numerator per mode required");
    for (double s : sigma2)
      if (!(s > 0.0)) throw DomainError("numerators must be positive");
    numerators_ = std::move(sigma2);
  }
  bool has_fixed_numerators() const { return !numerators_.empty(); }

  void check_theta(std::span<const double> theta) const {
    if (theta.size() != box_.size())
      throw DomainError(to_string(family_) + " expects " + std::to_string(box_.size()) + " parameters, got " +
                        std::to_string(theta.size()));
    for (std::size_t i = 0; i < theta.size(); ++i)
      if (!box_[i].contains(theta[i]))
        throw DomainError("theta[" + std::to_string(i) + "]=" + std::to_string(theta[i]) + " outside box");
  }

  /// Eigentriple of mode k (1-based).
  Eigentriple eigentriple(std::span<const double> theta, int k) const {
    if (k < 1 || k > n_modes_) throw DomainError("mode index outside [1, M]");
    check_theta(theta);
    switch (family_) {
      case Family::example1: return eigenvalues_example1(theta[0], k);
      case Family::example2: return eigenvalues_example2(theta, k);
      case Family::realdata_pmf: {
        const std::size_t stride = 1 + static_cast<std::size_t>(groups_.n_groups);
        const int g = groups_.group[k - 1];
        if (theta.size() < 3 * stride || g >= groups_.n_groups)
          throw DomainError("theta or group index outside the pmf layout");
        double l[3];
        // GCC 11 flags this loop when an example1 call site with a one-element theta is inlined.
#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Warray-bounds"
        for (int i = 0; i < 3; ++i) {
          const std::size_t base = i * stride;
          l[i] = theta[base] + (g >= 0 ? theta[base + 1 + static_cast<std::size_t>(g)] : 0.0);
        }
#pragma GCC diagnostic pop
        return {l[0], l[1], l[2]};
      }
      case Family::custom: {
        const std::size_t o = 3 * static_cast<std::size_t>(k - 1);
        if (theta.size() < o + 3) throw DomainError("theta too short for the custom layout");
        return {theta[o], theta[o + 1], theta[o + 2]};
      }
    }
    throw DomainError("unknown family");
  }

  /// Numerator sigma^2_k of the rational density.
  double numerator(std::span<const double> theta, int k) const {
    if (!numerators_.empty()) return numerators_[k - 1];
    return c2_numerator_from_log_integral(log_modulus_integral_jensen(eigentriple(theta, k)));
  }

  /// The point spectra family only admits stationary triples.
  bool requires_stability() const { return family_ == Family::realdata_pmf || family_ == Family::custom; }

  double density(std::span<const double> theta, int k, double w1, double w2) const {
    const Eigentriple t = eigentriple(theta, k);
    if (requires_stability() && !is_stable(t))
      throw SingularityError("non-stationary eigentriple for mode " + std::to_string(k));
    return sarh1_spectral_density(t, numerator(theta, k), w1, w2);
  }

private:
  SpectralModel(Family f, int n_modes, std::vector<Interval> box)
      : family_(f), n_modes_(n_modes), box_(std::move(box)) {
    if (n_modes < 1) throw DomainError("model needs at least one mode");
  }

  Family family_;
  int n_modes_;
  std::vector<Interval> box_;
  PmfGroups groups_;
  std::vector<double> numerators_;
};

/// Point spectra density for mode k: the rational density with eigenvalues
/// lambda_{p,i} = theta_{i,1} + |sin(p pi / 2)| theta_{i,2}(group of p).
inline double realdata_pmf_spectrum(const SpectralModel& model, std::span<const double> theta, int k,
                                    double w1, double w2) {
  if (model.family() != Family::realdata_pmf) throw DomainError("model is not the point spectra family");
  return model.density(theta, k, w1, w2);
}

}  // namespace sarhcox
