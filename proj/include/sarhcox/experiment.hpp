#pragma once

// Monte Carlo runner: simulate, periodogram, estimate over replicates and
// grid sizes; tabulates mean, sample SD and MSE of each parameter.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "sarh_sim.hpp"
#include "spectral.hpp"
#include "whittle.hpp"

namespace sarhcox {

struct ExperimentConfig {
  Family family = Family::example1;
  std::vector<double> theta{1.0};
  /// Square lattice sides; N = side^2.
  std::vector<int> grid_sides{100, 150, 200};
  int replicates = 30;
  int n_modes = 10;
  int burn_in = 100;
  std::uint64_t seed = 20210101;
  std::string output_path;
  int threads = 1;
  EstimateOptions estimate{};

  void validate() const {
    if (family != Family::example1 && family != Family::example2)
      throw DomainError("experiments support the example1 and example2 families");
    if (replicates < 1) throw DomainError("replicates must be >= 1");
    if (grid_sides.empty()) throw DomainError("at least one grid size is required");
    for (std::size_t g = 0; g < grid_sides.size(); ++g) {
      if (grid_sides[g] < 2) throw DomainError("grid sides must be >= 2");
      if (g > 0 && grid_sides[g] <= grid_sides[g - 1]) throw DomainError("grid sizes must be ascending");
    }
    const SpectralModel m = model();
    m.check_theta(theta);
  }

  SpectralModel model() const {
    return family == Family::example1 ? SpectralModel::example1(n_modes) : SpectralModel::example2(n_modes);
  }
  Sarh1Params params() const { return {family, theta, n_modes, {}, std::nullopt}; }
};

struct ExperimentRow {
  long n = 0;
  int param = 0;
  double mean = 0.0;
  double sd = 0.0;
  double mse = 0.0;
  int failures = 0;
  int successes = 0;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  /// estimates[g][r] is empty for a failed replicate.
  std::vector<std::vector<std::vector<double>>> estimates;
  std::vector<std::vector<std::string>> errors;
};

/// Replicate seed: SplitMix64 of (base, grid index, replicate).
inline std::uint64_t replicate_seed(std::uint64_t base, std::size_t grid, std::size_t rep) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (1 + grid * 1000003ULL + rep);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Mean, sample SD (n - 1 divisor, 0 for one draw) and MSE = mean (x - truth)^2.
inline ExperimentRow summarize(const std::vector<double>& x, double truth) {
  ExperimentRow row;
  row.successes = static_cast<int>(x.size());
  if (x.empty()) {
    row.mean = row.sd = row.mse = std::nan("");
    return row;
  }
  double s = 0.0, se = 0.0;
  for (double v : x) {
    s += v;
    se += (v - truth) * (v - truth);
  }
  row.mean = s / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - row.mean) * (v - row.mean);
  row.sd = x.size() > 1 ? std::sqrt(ss / static_cast<double>(x.size() - 1)) : 0.0;
  row.mse = se / static_cast<double>(x.size());
  return row;
}

inline void write_experiment_csv(std::ostream& os, const ExperimentResult& r) {
  os << "N,param,mean,sd,mse,failures\n" << std::setprecision(10);
  for (const auto& row : r.rows)
    os << row.n << ',' << row.param << ',' << row.mean << ',' << row.sd << ',' << row.mse << ',' << row.failures
       << '\n';
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const SpectralModel model = cfg.model();
  const Sarh1Params params = cfg.params();
  ExperimentResult out;
  const std::size_t ng = cfg.grid_sides.size(), nr = static_cast<std::size_t>(cfg.replicates);
  out.estimates.assign(ng, std::vector<std::vector<double>>(nr));
  out.errors.assign(ng, std::vector<std::string>(nr));
  parallel_for(ng * nr, cfg.threads, [&](std::size_t job) {
    const std::size_t g = job / nr, r = job % nr;
    const int side = cfg.grid_sides[g];
    try {
      const CoeffField f = simulate_sarh1(params, {side, side}, cfg.burn_in, replicate_seed(cfg.seed, g, r));
      const ThetaEstimate e = estimate(model, WhittleStats::from(periodogram(f)), cfg.estimate);
      out.estimates[g][r] = e.theta_hat;
    } catch (const std::exception& ex) {
      out.errors[g][r] = ex.what();
    }
  });
  for (std::size_t g = 0; g < ng; ++g)
    for (std::size_t p = 0; p < cfg.theta.size(); ++p) {
      std::vector<double> xs;
      for (const auto& e : out.estimates[g])
        if (!e.empty()) xs.push_back(e[p]);
      ExperimentRow row = summarize(xs, cfg.theta[p]);
      row.n = static_cast<long>(cfg.grid_sides[g]) * cfg.grid_sides[g];
      row.param = static_cast<int>(p) + 1;
      row.failures = static_cast<int>(nr) - row.successes;
      out.rows.push_back(row);
    }
  if (!cfg.output_path.empty()) {
    std::ofstream os(cfg.output_path);
    if (!os) throw FormatError("cannot open " + cfg.output_path + " for writing");
    write_experiment_csv(os, out);
  }
  return out;
}

}  // namespace sarhcox
