#pragma once

// Estimation pipeline for space-time counts: cumulate, spline smooth, IDW to
// the lattice, log transform, trend removal, sine projection, per-mode
// normalization, periodogram, point-spectra Whittle fit and plug-in prediction.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bspline.hpp"
#include "cox.hpp"
#include "errors.hpp"
#include "field_io.hpp"
#include "hilbert.hpp"
#include "idw.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "series.hpp"
#include "spectral.hpp"
#include "trend.hpp"
#include "whittle.hpp"

namespace sarhcox {

enum class SmoothOutput { intensity, cumulative };

inline EstimateOptions pipeline_estimate_defaults() {
  EstimateOptions e;
  e.aggregate = LossAggregate::max_tiebreak;
  return e;
}

struct PipelineConfig {
  LatticeGeometry lattice{{32, 32}};
  int n_modes = 10;
  /// Temporal nodes of the smoothed curves.
  int out_nodes = 1725;
  int n_knots = 40;
  /// Input values are counts per period; they are cumulated, with a zero
  /// prepended one period before the first stamp.
  bool cumulate = true;
  /// intensity: derivative of the smoothed cumulative curve; cumulative: the curve itself.
  SmoothOutput smooth_output = SmoothOutput::intensity;
  IdwOptions idw{};
  double log_floor = 1.0;
  TrendOptions trend{};
  /// Divide each mode by its innovation scale estimated from the log periodogram.
  bool normalize = true;
  std::optional<PmfGroups> groups;
  Interval base_box{-0.9, 0.9};
  Interval odd_box{-0.5, 0.5};
  EstimateOptions estimate = pipeline_estimate_defaults();
  /// Modes keeping less than this share of their energy after detrending
  /// are left out of the Whittle maximum (they carry almost no signal).
  double min_retained_fraction = 0.05;
  /// Residual RMS below this skips estimation.
  double zero_residual_rms = 1e-4;
  std::string checkpoint_dir;
  int threads = 1;

  PmfGroups resolved_groups() const { return groups.value_or(PmfGroups::standard(n_modes)); }
  SpectralModel model() const { return SpectralModel::realdata_pmf(n_modes, resolved_groups(), base_box, odd_box); }

  void validate() const {
    if (lattice.dims.n1 < 2 || lattice.dims.n2 < 2) throw DomainError("pipeline lattice must be at least 2x2");
    if (n_modes < 1) throw DomainError("n_modes must be >= 1");
    if (out_nodes < 2 * n_modes + 1) throw ResolutionError("out_nodes must be >= 2 n_modes + 1");
    if (n_knots < 0) throw DomainError("n_knots must be >= 0");
    if (!(log_floor > 0.0)) throw DomainError("log_floor must be positive");
    resolved_groups().validate(n_modes);
  }
};

struct PipelineResult {
  std::vector<double> t_grid;
  /// Raw-site curves after smoothing (input sites x out_nodes).
  GridSeries smoothed;
  /// Lattice log curves (nodes x out_nodes), node (i, j) in row-major order.
  GridSeries lattice;
  /// Polynomial part of the lattice log curves (same layout).
  std::vector<double> trend;
  /// Sine coefficients of the residuals divided by mode_scales.
  CoeffField coefficients;
  std::vector<double> mode_scales;
  /// Share of each sine mode surviving the trend fit.
  std::vector<double> retained;
  /// Modes (1-based) in the Whittle maximum.
  std::vector<int> loss_modes;
  double residual_rms = 0.0;
  bool estimated = false;
  std::vector<std::string> diagnostics;
  std::optional<ThetaEstimate> estimate;
  std::vector<Eigentriple> triples;
  CoeffField predicted;

  double support_length() const { return t_grid.back() - t_grid.front(); }
  std::span<const double> trend_at(std::size_t node) const {
    return {trend.data() + node * t_grid.size(), t_grid.size()};
  }
};

enum class Checkpoint { none, lattice, coefficients };

inline std::string to_string(Checkpoint c) {
  switch (c) {
    case Checkpoint::none: return "none";
    case Checkpoint::lattice: return "lattice";
    case Checkpoint::coefficients: return "coefficients";
  }
  return "none";
}

inline Checkpoint checkpoint_from_string(const std::string& s) {
  if (s == "none" || s.empty()) return Checkpoint::none;
  if (s == "lattice") return Checkpoint::lattice;
  if (s == "coefficients") return Checkpoint::coefficients;
  throw DomainError("unknown checkpoint stage '" + s + "'");
}

namespace detail {

template <class Fn>
auto run_stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

struct Smoothed {
  std::vector<double> t_grid;
  GridSeries curves;
};

/// Steps 1 and 2 for every raw site.
inline Smoothed cumulate_and_smooth(const GridSeries& raw, const PipelineConfig& cfg) {
  std::vector<double> times = raw.times();
  std::vector<double> values(raw.values().begin(), raw.values().end());
  if (cfg.cumulate) {
    run_stage("cumulate", [&] {
      if (!raw.nonnegative()) throw DomainError("count inputs must be >= 0");
      if (times.size() < 2) throw DomainError("cumulating needs at least two time stamps");
      const double origin = times[0] - (times[1] - times[0]);
      times.insert(times.begin(), origin);
      std::vector<double> cum;
      cum.reserve(raw.n_sites() * times.size());
      for (std::size_t s = 0; s < raw.n_sites(); ++s) {
        double acc = 0.0;
        cum.push_back(0.0);
        for (double v : raw.series(s)) cum.push_back(acc += v);
      }
      values = std::move(cum);
      return 0;
    });
  }
  return run_stage("smooth", [&] {
    const auto grid = uniform_grid(times.back() - times.front(), static_cast<std::size_t>(cfg.out_nodes));
    std::vector<double> t_grid(grid.size());
    for (std::size_t r = 0; r < grid.size(); ++r) t_grid[r] = times.front() + grid[r];
    t_grid.back() = times.back();
    const SplineSmoother smoother(times, cfg.n_knots, t_grid);
    std::vector<double> out(raw.n_sites() * t_grid.size());
    parallel_for(raw.n_sites(), cfg.threads, [&](std::size_t s) {
      const std::span<const double> y(values.data() + s * times.size(), times.size());
      const auto c = cfg.smooth_output == SmoothOutput::intensity ? smoother.derivative(y) : smoother.smooth(y);
      std::copy(c.begin(), c.end(), out.begin() + static_cast<std::ptrdiff_t>(s * t_grid.size()));
    });
    return Smoothed{t_grid, GridSeries(raw.sites(), t_grid, std::move(out), raw.ids())};
  });
}

/// Steps 3 and 4.
inline GridSeries to_lattice_log(const GridSeries& smoothed, const PipelineConfig& cfg) {
  GridSeries lat = run_stage("idw", [&] { return idw_interpolate(smoothed, cfg.lattice, cfg.idw); });
  run_stage("log", [&] {
    for (double& v : lat.values()) v = std::log(std::max(v, cfg.log_floor));
    return 0;
  });
  return lat;
}

inline std::string path_in(const std::string& dir, const char* name) {
  return (std::filesystem::path(dir) / name).string();
}

}  // namespace detail

/// s_k^2 = (2 pi)^2 exp(mean over w != 0 of log I_w(k) + Euler gamma): the
/// innovation variance of a stationary rational field, since E log of a unit
/// exponential is -gamma and the log density integrates to log sigma^2.
inline std::vector<double> innovation_scales(const Periodogram& pg) {
  const auto& grid = pg.grid();
  std::vector<double> out;
  for (int k = 0; k < pg.n_modes(); ++k) {
    double acc = 0.0;
    std::size_t count = 0;
    for (int u1 = 0; u1 < grid.dims().n1; ++u1)
      for (int u2 = 0; u2 < grid.dims().n2; ++u2) {
        if (u1 == 0 && u2 == 0) continue;
        const double v = pg.diag(u1, u2, k);
        if (!(v > 0.0)) continue;
        acc += std::log(v);
        ++count;
      }
    if (count == 0) throw SingularityError("mode " + std::to_string(k + 1) + " has an all-zero periodogram");
    out.push_back(std::sqrt(two_pi_sq * std::exp(acc / static_cast<double>(count) + std::numbers::egamma)));
  }
  return out;
}

namespace detail {

struct Coefficients {
  std::vector<double> trend;
  CoeffField field;
  std::vector<double> scales;
  double residual_rms = 0.0;
};

/// Steps 5 to 7.
inline Coefficients trend_project_normalize(const GridSeries& lat, const std::vector<double>& t_grid,
                                          const PipelineConfig& cfg) {
  const std::size_t nt = t_grid.size();
  const BasisSpec basis(t_grid.back() - t_grid.front(), cfg.n_modes);
  Coefficients out{std::vector<double>(lat.n_sites() * nt), CoeffField(cfg.lattice.dims, basis), {}, 0.0};
  std::vector<double> sq(lat.n_sites(), 0.0);
  run_stage("trend", [&] {
    const TrendFitter fitter(t_grid, cfg.trend);
    parallel_for(lat.n_sites(), cfg.threads, [&](std::size_t s) {
      const auto f = fitter.fit(lat.series(s));
      std::copy(f.trend.begin(), f.trend.end(), out.trend.begin() + static_cast<std::ptrdiff_t>(s * nt));
      const auto c = project_samples(f.residual, basis);
      std::copy(c.begin(), c.end(), out.field.data().begin() + static_cast<std::ptrdiff_t>(s * cfg.n_modes));
      for (double r : f.residual) sq[s] += r * r;
    });
    return 0;
  });
  double total = 0.0;
  for (double v : sq) total += v;
  out.residual_rms = std::sqrt(total / static_cast<double>(lat.n_sites() * nt));
  out.scales.assign(cfg.n_modes, 1.0);
  if (cfg.normalize && out.residual_rms >= cfg.zero_residual_rms) {
    run_stage("normalize", [&] {
      out.scales = innovation_scales(periodogram(out.field));
      auto d = out.field.data();
      for (std::size_t s = 0; s < lat.n_sites(); ++s)
        for (int k = 0; k < cfg.n_modes; ++k) d[s * cfg.n_modes + k] /= out.scales[k];
      return 0;
    });
  }
  return out;
}

inline void write_state_json(const std::string& path, const std::vector<double>& scales, double rms) {
  nlohmann::json j;
  j["mode_scales"] = scales;
  j["residual_rms"] = rms;
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  os << j.dump(2) << '\n';
}

inline void read_state_json(const std::string& path, std::vector<double>& scales, double& rms) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path);
  try {
    const auto j = nlohmann::json::parse(is);
    scales = j.at("mode_scales").get<std::vector<double>>();
    rms = j.at("residual_rms").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

/// Steps 8 to 10 on a finished coefficient field.
inline void estimate_and_predict(PipelineResult& r, const PipelineConfig& cfg) {
  if (r.residual_rms < cfg.zero_residual_rms) {
    r.diagnostics.push_back("residual field is numerically zero (rms " + std::to_string(r.residual_rms) +
                            "); estimation skipped");
    return;
  }
  const SpectralModel model = cfg.model();
  run_stage("estimate", [&] {
    const TrendFitter fitter(r.t_grid, cfg.trend);
    r.retained.clear();
    r.loss_modes.clear();
    for (int k = 1; k <= cfg.n_modes; ++k) {
      r.retained.push_back(fitter.retained_fraction(k));
      if (r.retained.back() >= cfg.min_retained_fraction) r.loss_modes.push_back(k);
      else
        r.diagnostics.push_back("mode " + std::to_string(k) + " keeps " + std::to_string(r.retained.back()) +
                                " of its energy after detrending; left out of the loss");
    }
    if (r.loss_modes.empty()) throw RankError("every mode is absorbed by the trend; lower min_retained_fraction");
    return 0;
  });
  EstimateOptions eo = cfg.estimate;
  if (eo.modes.empty()) eo.modes = r.loss_modes;
  const WhittleStats stats = run_stage("fft", [&] { return WhittleStats::from(periodogram(r.coefficients)); });
  r.estimate = run_stage("estimate", [&] { return sarhcox::estimate(model, stats, eo); });
  r.estimated = true;
  if (!r.estimate->converged) r.diagnostics.push_back("optimizer stopped at the evaluation budget");
  r.triples = run_stage("predict", [&] { return model_triples(model, r.estimate->theta_hat); });
  r.predicted = run_stage("predict", [&] { return plug_in_predict_field(r.coefficients, r.triples); });
}

inline void finish_from_coefficients(PipelineResult& r, Coefficients c, const PipelineConfig& cfg) {
  r.trend = std::move(c.trend);
  r.coefficients = std::move(c.field);
  r.mode_scales = std::move(c.scales);
  r.residual_rms = c.residual_rms;
  estimate_and_predict(r, cfg);
}

inline void save_lattice_checkpoint(const PipelineResult& r, const std::string& dir) {
  std::filesystem::create_directories(dir);
  io::save_series_binary(path_in(dir, "smoothed.bin"), r.smoothed);
  io::save_series_binary(path_in(dir, "lattice.bin"), r.lattice);
}

inline void save_coefficient_checkpoint(const PipelineResult& r, const std::string& dir) {
  std::filesystem::create_directories(dir);
  io::save_binary(path_in(dir, "coefficients.bin"), r.coefficients);
  io::save_series_binary(path_in(dir, "trend.bin"), GridSeries(r.lattice.sites(), r.t_grid, r.trend));
  write_state_json(path_in(dir, "state.json"), r.mode_scales, r.residual_rms);
}

}  // namespace detail

/// Runs every stage on `raw` (counts per period, or curves with cumulate = false).
/// With a checkpoint directory each stage boundary is written there.
inline PipelineResult run_pipeline(const GridSeries& raw, const PipelineConfig& cfg) {
  detail::run_stage("config", [&] {
    cfg.validate();
    return 0;
  });
  PipelineResult r;
  auto sm = detail::cumulate_and_smooth(raw, cfg);
  r.t_grid = std::move(sm.t_grid);
  r.smoothed = std::move(sm.curves);
  r.lattice = detail::to_lattice_log(r.smoothed, cfg);
  if (!cfg.checkpoint_dir.empty())
    detail::run_stage("checkpoint", [&] {
      detail::save_lattice_checkpoint(r, cfg.checkpoint_dir);
      return 0;
    });
  auto c = detail::trend_project_normalize(r.lattice, r.t_grid, cfg);
  r.trend = std::move(c.trend);
  r.coefficients = std::move(c.field);
  r.mode_scales = std::move(c.scales);
  r.residual_rms = c.residual_rms;
  if (!cfg.checkpoint_dir.empty())
    detail::run_stage("checkpoint", [&] {
      detail::save_coefficient_checkpoint(r, cfg.checkpoint_dir);
      return 0;
    });
  detail::estimate_and_predict(r, cfg);
  return r;
}

/// Re-enters the pipeline after the named stage using the files in cfg.checkpoint_dir.
inline PipelineResult resume_pipeline(const PipelineConfig& cfg, Checkpoint from) {
  if (cfg.checkpoint_dir.empty()) throw DomainError("resuming needs a checkpoint directory");
  if (from == Checkpoint::none) throw DomainError("resume stage must be lattice or coefficients");
  const std::string& dir = cfg.checkpoint_dir;
  PipelineResult r;
  detail::run_stage("resume", [&] {
    cfg.validate();
    r.smoothed = io::load_series_binary(detail::path_in(dir, "smoothed.bin"));
    r.lattice = io::load_series_binary(detail::path_in(dir, "lattice.bin"));
    r.t_grid = r.lattice.times();
    if (r.lattice.n_sites() != cfg.lattice.dims.size())
      throw FormatError("checkpoint lattice does not match the configured dims");
    return 0;
  });
  if (from == Checkpoint::lattice) {
    detail::finish_from_coefficients(r, detail::trend_project_normalize(r.lattice, r.t_grid, cfg), cfg);
    return r;
  }
  detail::Coefficients c;
  detail::run_stage("resume", [&] {
    c.field = io::load_binary(detail::path_in(dir, "coefficients.bin"));
    const GridSeries trend = io::load_series_binary(detail::path_in(dir, "trend.bin"));
    c.trend.assign(trend.values().begin(), trend.values().end());
    detail::read_state_json(detail::path_in(dir, "state.json"), c.scales, c.residual_rms);
    if (c.field.dims() != cfg.lattice.dims || c.field.n_modes() != cfg.n_modes)
      throw FormatError("checkpoint coefficients do not match the configured lattice / modes");
    return 0;
  });
  detail::finish_from_coefficients(r, std::move(c), cfg);
  return r;
}

struct CvfareCurve {
  std::vector<double> values;
  /// (1 / (t_end - t_0)) int CVFARE dt by the trapezoid rule.
  double l1 = 0.0;
};

/// CVFARE(t) = mean over sites of |Lambda - Lambda_hat| / Lambda. Rows of
/// `truth` and `predicted` are sites, columns follow `t_grid`.
inline CvfareCurve cvfare(std::span<const double> truth, std::span<const double> predicted,
                          std::span<const double> t_grid) {
  const std::size_t nt = t_grid.size();
  if (nt < 2) throw ResolutionError("CVFARE needs at least two time nodes");
  if (truth.size() != predicted.size() || truth.empty() || truth.size() % nt != 0)
    throw DomainError("truth and prediction must both be sites x times");
  const std::size_t ns = truth.size() / nt;
  CvfareCurve out;
  out.values.assign(nt, 0.0);
  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t t = 0; t < nt; ++t) {
      const double lam = truth[s * nt + t];
      if (!(lam > 0.0))
        throw DomainError("true intensity must be positive (site " + std::to_string(s) + ", node " +
                          std::to_string(t) + ")");
      out.values[t] += std::abs(lam - predicted[s * nt + t]) / lam / static_cast<double>(ns);
    }
  double acc = 0.0;
  for (std::size_t t = 1; t < nt; ++t) acc += 0.5 * (out.values[t] + out.values[t - 1]) * (t_grid[t] - t_grid[t - 1]);
  out.l1 = acc / (t_grid.back() - t_grid.front());
  return out;
}

enum class CvScheme { joint, leave_one_out };

struct CrossValidation {
  std::vector<std::size_t> holdouts;
  std::vector<Site> nodes;
  std::vector<double> t_grid;
  std::vector<double> truth, plug_in, baseline;
  CvfareCurve plug_in_cvfare, baseline_cvfare;
  /// Pipeline fit of the first fold.
  PipelineResult fit;
};

namespace detail {

inline void predict_holdout(const PipelineResult& fit, const LatticeGeometry& geo, Site node,
                            std::span<double> plug, std::span<double> base) {
  const std::size_t idx = geo.index(node.i, node.j);
  const auto tr = fit.trend_at(idx);
  std::vector<double> x(fit.coefficients.n_modes(), 0.0);
  if (fit.estimated) x = plug_in_predict(fit.coefficients, node, fit.triples);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] *= fit.mode_scales[k];
  const auto sig = synthesize(x, fit.coefficients.basis(), fit.t_grid.size());
  for (std::size_t t = 0; t < tr.size(); ++t) {
    base[t] = std::exp(tr[t]);
    plug[t] = std::exp(tr[t] + sig[t]);
  }
}

}  // namespace detail

/// Removes the listed raw sites, refits, and predicts their intensity curves
/// at the nearest lattice node. Truth is each site's own smoothed curve.
inline CrossValidation cross_validate(const GridSeries& raw, const PipelineConfig& cfg,
                                      std::vector<std::size_t> holdouts, CvScheme scheme = CvScheme::joint) {
  if (holdouts.empty()) throw DomainError("cross-validation needs at least one held-out site");
  std::sort(holdouts.begin(), holdouts.end());
  holdouts.erase(std::unique(holdouts.begin(), holdouts.end()), holdouts.end());
  CrossValidation cv;
  cv.holdouts = holdouts;
  for (std::size_t h : holdouts) {
    if (h >= raw.n_sites()) throw IndexError("held-out site index " + std::to_string(h) + " out of range");
    const Site n = cfg.lattice.nearest(raw.sites()[h]);
    if (n.i < 1 || n.j < 1)
      throw BoundaryError("held-out site " + raw.ids()[h] + " maps to a lattice node without quarter-plane neighbors");
    cv.nodes.push_back(n);
  }
  PipelineConfig fold_cfg = cfg;
  fold_cfg.checkpoint_dir.clear();
  const auto own = detail::cumulate_and_smooth(raw, fold_cfg);
  cv.t_grid = own.t_grid;
  const std::size_t nt = cv.t_grid.size(), nh = holdouts.size();
  cv.truth.resize(nh * nt);
  cv.plug_in.resize(nh * nt);
  cv.baseline.resize(nh * nt);
  for (std::size_t h = 0; h < nh; ++h) {
    auto s = own.curves.series(holdouts[h]);
    std::copy(s.begin(), s.end(), cv.truth.begin() + static_cast<std::ptrdiff_t>(h * nt));
  }
  auto slot = [&](std::vector<double>& v, std::size_t h) { return std::span<double>(v.data() + h * nt, nt); };
  if (scheme == CvScheme::joint) {
    cv.fit = run_pipeline(raw.without(holdouts), fold_cfg);
    for (std::size_t h = 0; h < nh; ++h)
      detail::predict_holdout(cv.fit, cfg.lattice, cv.nodes[h], slot(cv.plug_in, h), slot(cv.baseline, h));
  } else {
    std::vector<PipelineResult> fits(nh);
    PipelineConfig inner = fold_cfg;
    inner.threads = 1;
    parallel_for(nh, cfg.threads, [&](std::size_t h) {
      fits[h] = run_pipeline(raw.without({holdouts[h]}), inner);
      detail::predict_holdout(fits[h], cfg.lattice, cv.nodes[h], slot(cv.plug_in, h), slot(cv.baseline, h));
    });
    cv.fit = std::move(fits.front());
  }
  cv.plug_in_cvfare = cvfare(cv.truth, cv.plug_in, cv.t_grid);
  cv.baseline_cvfare = cvfare(cv.truth, cv.baseline, cv.t_grid);
  return cv;
}

}  // namespace sarhcox
