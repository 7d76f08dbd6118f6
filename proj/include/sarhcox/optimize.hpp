#pragma once

// Derivative-free minimization over a box: Nelder-Mead with projection of
// every trial vertex onto the box, restarted from Latin-hypercube starts.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "errors.hpp"
#include "sarh_model.hpp"

namespace sarhcox::optim {

struct Options {
  int starts = 5;
  int max_evals_per_start = 500;
  double ftol = 1e-6;            ///< absolute spread of simplex values
  double xtol = 1e-6;            ///< simplex diameter, in units of box width
  double initial_step = 0.1;     ///< initial simplex edge, in units of box width
  int max_restarts = 3;          ///< simplex rebuilds around the incumbent after convergence
  std::uint64_t seed = 20210101;  ///< Latin hypercube seed
};

struct StartRecord {
  std::vector<double> start;
  std::vector<double> end;
  double loss = 0.0;
  int evals = 0;
  bool converged = false;
};

struct Result {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  int evals = 0;
  bool converged = false;
  std::vector<StartRecord> starts;
};

using Objective = std::function<double(std::span<const double>)>;

namespace detail {

class BoxMap {
public:
  explicit BoxMap(std::span<const Interval> box) : box_(box.begin(), box.end()) {
    for (const auto& iv : box_)
      if (!(iv.hi > iv.lo)) throw DomainError("optimization box must be non-degenerate");
  }
  std::size_t dim() const { return box_.size(); }
  std::vector<double> to_box(std::span<const double> u) const {
    std::vector<double> x(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) x[i] = box_[i].lo + std::clamp(u[i], 0.0, 1.0) * box_[i].width();
    return x;
  }
  std::vector<double> to_unit(std::span<const double> x) const {
    std::vector<double> u(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) u[i] = std::clamp((x[i] - box_[i].lo) / box_[i].width(), 0.0, 1.0);
    return u;
  }

private:
  std::vector<Interval> box_;
};

struct Vertex {
  std::vector<double> u;
  double f;
};

inline double safe_eval(const Objective& f, const BoxMap& map, std::span<const double> u) {
  try {
    const double v = f(map.to_box(u));
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

/// One projected Nelder-Mead run (adaptive coefficients), with restarts.
inline StartRecord nelder_mead(const Objective& f, const BoxMap& map, std::vector<double> u0,
                               const Options& opt) {
  const std::size_t n = map.dim();
  const double dn = static_cast<double>(n);
  const double alpha = 1.0, beta = 1.0 + 2.0 / dn, gamma = 0.75 - 0.5 / dn,
               delta = n > 1 ? 1.0 - 1.0 / dn : 0.5;
  int evals = 0;
  auto eval = [&](std::vector<double>& u) {
    for (double& x : u) x = std::clamp(x, 0.0, 1.0);
    ++evals;
    return safe_eval(f, map, u);
  };

  StartRecord rec;
  rec.start = map.to_box(u0);
  Vertex best{u0, eval(u0)};
  // Infeasible start: walk toward the box centre until the objective is finite.
  for (int pull = 0; pull < 30 && !std::isfinite(best.f) && evals < opt.max_evals_per_start; ++pull) {
    for (double& x : best.u) x = 0.5 * (x + 0.5);
    best.f = eval(best.u);
  }
  double step = opt.initial_step;

  for (int round = 0; round <= opt.max_restarts && evals < opt.max_evals_per_start; ++round) {
    std::vector<Vertex> s;
    s.push_back(best);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> u = best.u;
      u[i] += (u[i] + step <= 1.0) ? step : -step;
      const double fu = eval(u);
      s.push_back({u, fu});
    }
    bool conv = false;
    while (evals < opt.max_evals_per_start) {
      std::sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
      double diam = 0.0;
      for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t d = 0; d < n; ++d) diam = std::max(diam, std::abs(s[i].u[d] - s[0].u[d]));
      if (std::isfinite(s[n].f) && s[n].f - s[0].f <= opt.ftol && diam <= opt.xtol) {
        conv = true;
        break;
      }
      std::vector<double> c(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < n; ++d) c[d] += s[i].u[d] / dn;
      auto along = [&](double t) {
        std::vector<double> u(n);
        for (std::size_t d = 0; d < n; ++d) u[d] = c[d] + t * (s[n].u[d] - c[d]);
        return u;
      };
      std::vector<double> ur = along(-alpha);
      const double fr = eval(ur);
      if (fr < s[0].f) {
        std::vector<double> ue = along(-alpha * beta);
        const double fe = eval(ue);
        s[n] = fe < fr ? Vertex{ue, fe} : Vertex{ur, fr};
      } else if (fr < s[n - 1].f) {
        s[n] = {ur, fr};
      } else {
        const bool outside = fr < s[n].f;
        std::vector<double> uc = along(outside ? -alpha * gamma : gamma);
        const double fc = eval(uc);
        if (fc < (outside ? fr : s[n].f)) {
          s[n] = {uc, fc};
        } else {
          for (std::size_t i = 1; i <= n && evals < opt.max_evals_per_start; ++i) {
            for (std::size_t d = 0; d < n; ++d) s[i].u[d] = s[0].u[d] + delta * (s[i].u[d] - s[0].u[d]);
            s[i].f = eval(s[i].u);
          }
        }
      }
    }
    std::sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    const double gain = best.f - s[0].f;
    if (s[0].f <= best.f) best = s[0];
    rec.converged = conv;
    // A restart that no longer improves the incumbent confirms convergence.
    if (!conv || (round > 0 && !(gain > opt.ftol * 1e-3))) break;
    step = std::max(opt.initial_step * 0.1, 10.0 * opt.xtol);
  }
  rec.end = map.to_box(best.u);
  rec.loss = best.f;
  rec.evals = evals;
  return rec;
}

}  // namespace detail

/// Latin hypercube over the unit cube: one point per stratum per axis.
inline std::vector<std::vector<double>> latin_hypercube(std::size_t n_points, std::size_t dim,
                                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::vector<double>> pts(n_points, std::vector<double>(dim));
  for (std::size_t d = 0; d < dim; ++d) {
    std::vector<std::size_t> perm(n_points);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t i = 0; i < n_points; ++i)
      pts[i][d] = (static_cast<double>(perm[i]) + unif(rng)) / static_cast<double>(n_points);
  }
  return pts;
}

/// Multistart projected Nelder-Mead over `box`. Starts with infinite value
/// everywhere are recorded but cannot win.
inline Result minimize(const Objective& f, std::span<const Interval> box, const Options& opt = {}) {
  if (opt.starts < 1) throw DomainError("at least one start required");
  detail::BoxMap map(box);
  Result res;
  for (const auto& u0 : latin_hypercube(static_cast<std::size_t>(opt.starts), map.dim(), opt.seed)) {
    StartRecord rec = detail::nelder_mead(f, map, u0, opt);
    res.evals += rec.evals;
    res.converged = res.converged || rec.converged;
    if (rec.loss < res.value || res.x.empty()) {
      res.value = rec.loss;
      res.x = rec.end;
    }
    res.starts.push_back(std::move(rec));
  }
  return res;
}

}  // namespace sarhcox::optim
