// Command-line front end: simulation, spectral analysis, estimation, Cox
// moments, prediction, the count-data pipeline and Monte Carlo experiments.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sarhcox/sarhcox.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sarhcox;

namespace {

struct Globals {
  std::uint64_t seed = 20210101;
  int threads = 1;
  std::string out_dir;

  std::string out_path(const std::string& p) const {
    if (p.empty() || out_dir.empty() || fs::path(p).is_absolute()) return p;
    fs::create_directories(out_dir);
    return (fs::path(out_dir) / p).string();
  }
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

int parse_int(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw DomainError("bad integer '" + s + "' in " + what);
  return v;
}

double parse_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw DomainError("bad number '" + s + "' in " + what);
  return v;
}

/// "N1xN2".
LatticeDims parse_dims(const std::string& s) {
  const auto p = split(s, 'x');
  if (p.size() != 2) throw DomainError("dims must look like N1xN2, got '" + s + "'");
  return {parse_int(p[0], "dims"), parse_int(p[1], "dims")};
}

/// "lo:hi".
Interval parse_interval(const std::string& s) {
  const auto p = split(s, ':');
  if (p.size() != 2) throw DomainError("interval must look like lo:hi, got '" + s + "'");
  const Interval iv{parse_double(p[0], "interval"), parse_double(p[1], "interval")};
  if (!(iv.hi > iv.lo)) throw DomainError("interval '" + s + "' is empty");
  return iv;
}

/// "i0:i1xj0:j1", inclusive.
BorelRect parse_rect(const std::string& s) {
  const auto p = split(s, 'x');
  if (p.size() != 2) throw DomainError("rect must look like i0:i1xj0:j1, got '" + s + "'");
  const auto a = split(p[0], ':'), b = split(p[1], ':');
  if (a.size() != 2 || b.size() != 2) throw DomainError("rect must look like i0:i1xj0:j1, got '" + s + "'");
  BorelRect r{parse_int(a[0], "rect"), parse_int(a[1], "rect"), parse_int(b[0], "rect"), parse_int(b[1], "rect")};
  r.validate();
  return r;
}

bool has_ext(const std::string& path, const char* ext) { return fs::path(path).extension() == ext; }

CoeffField load_field(const std::string& path, double support_length) {
  if (has_ext(path, ".csv")) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open " + path);
    return io::read_csv(is, support_length);
  }
  return io::load_binary(path);
}

void save_field(const std::string& path, const CoeffField& f) {
  if (has_ext(path, ".csv")) {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot open " + path + " for writing");
    io::write_csv(os, f);
    return;
  }
  io::save_binary(path, f);
}

void write_json(const std::string& path, const json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  os << j.dump(2) << '\n';
}

json read_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path);
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

/// Test-function coefficients: comma- or newline-separated numbers.
std::vector<double> read_phi(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path);
  std::vector<double> out;
  std::string tok;
  while (is >> std::ws && std::getline(is, tok, ',')) {
    std::istringstream ls(tok);
    std::string item;
    while (ls >> item) out.push_back(parse_double(item, path));
  }
  if (out.empty()) throw FormatError(path + " holds no coefficients");
  return out;
}

json triples_json(const std::vector<Eigentriple>& t) {
  json a = json::array();
  for (std::size_t k = 0; k < t.size(); ++k)
    a.push_back({{"mode", k + 1}, {"l1", t[k].l1}, {"l2", t[k].l2}, {"l3", t[k].l3}});
  return a;
}

json estimate_json(const ThetaEstimate& e, const SpectralModel& m) {
  json starts = json::array();
  for (const auto& s : e.multistart_table)
    starts.push_back({{"start", s.start}, {"end", s.end}, {"loss", s.loss}, {"evals", s.evals},
                      {"converged", s.converged}});
  return {{"family", to_string(m.family())},
          {"n_modes", m.n_modes()},
          {"theta_hat", e.theta_hat},
          {"loss", e.loss_at_min},
          {"n_loss_evals", e.n_loss_evals},
          {"converged", e.converged},
          {"multistart", starts},
          {"runtime_seconds", e.runtime_seconds},
          {"triples", triples_json(model_triples(m, e.theta_hat))}};
}

SpectralModel make_model(const std::string& family, int modes, const std::vector<std::string>& boxes) {
  const Family f = family_from_string(family);
  SpectralModel m = [&] {
    switch (f) {
      case Family::example1: return SpectralModel::example1(modes);
      case Family::example2: return SpectralModel::example2(modes);
      case Family::realdata_pmf: return SpectralModel::realdata_pmf(modes, PmfGroups::standard(modes));
      case Family::custom: return SpectralModel::custom(modes);
    }
    throw DomainError("unknown family");
  }();
  if (!boxes.empty()) {
    std::vector<Interval> box;
    for (const auto& b : boxes) box.push_back(parse_interval(b));
    m.set_box(std::move(box));
  }
  return m;
}

struct EstimateFlags {
  int starts = 5;
  int max_evals = 500;
  double ftol = 1e-6;
  std::string aggregate;
  std::vector<int> loss_modes;

  void add(CLI::App* c, const std::string& default_aggregate) {
    aggregate = default_aggregate;
    c->add_option("--starts", starts, "Latin hypercube starts")->capture_default_str();
    c->add_option("--max-evals", max_evals, "loss evaluations per start")->capture_default_str();
    c->add_option("--ftol", ftol, "simplex value spread tolerance")->capture_default_str();
    c->add_option("--aggregate", aggregate, "loss over modes: max | max_tiebreak | mean")->capture_default_str();
    c->add_option("--loss-modes", loss_modes, "modes (1-based) entering the loss; default all");
  }
  EstimateOptions options(std::uint64_t seed) const {
    EstimateOptions e;
    e.optimizer.starts = starts;
    e.optimizer.max_evals_per_start = max_evals;
    e.optimizer.ftol = ftol;
    e.optimizer.seed = seed;
    e.aggregate = loss_aggregate_from_string(aggregate);
    e.modes = loss_modes;
    return e;
  }
};

/// Pipeline flags shared by `pipeline` and `cross-validate`.
struct PipelineFlags {
  std::string input;
  bool synthetic = false;
  std::string synthetic_dims = "48x48";
  int synthetic_periods = 120;
  std::string lattice = "48x48";
  double x0 = 0.0, y0 = 0.0, dx = 1.0, dy = 1.0;
  int modes = 10;
  int out_nodes = 1725;
  int knots = 40;
  bool no_cumulate = false;
  std::string smooth_output = "intensity";
  double idw_power = 2.0;
  double idw_radius = std::numeric_limits<double>::infinity();
  double log_floor = 1.0;
  int trend_degree = 10;
  std::string trend_basis = "legendre";
  int protect_modes = 0;
  bool no_normalize = false;
  double min_retained = 0.05;
  std::string base_box = "-0.9:0.9", odd_box = "-0.5:0.5";
  EstimateFlags est;

  void add(CLI::App* c) {
    c->add_option("--input", input, "counts CSV (site_id,lon,lat,time,value) or binary series");
    c->add_flag("--synthetic", synthetic, "generate synthetic counts from the built-in scenario (uses --seed)");
    c->add_option("--synthetic-dims", synthetic_dims, "synthetic site grid N1xN2")->capture_default_str();
    c->add_option("--synthetic-periods", synthetic_periods, "synthetic periods")->capture_default_str();
    c->add_option("--lattice", lattice, "target lattice N1xN2")->capture_default_str();
    c->add_option("--x0", x0, "lattice origin x")->capture_default_str();
    c->add_option("--y0", y0, "lattice origin y")->capture_default_str();
    c->add_option("--dx", dx, "lattice spacing x")->capture_default_str();
    c->add_option("--dy", dy, "lattice spacing y")->capture_default_str();
    c->add_option("--modes", modes, "sine modes M")->capture_default_str();
    c->add_option("--out-nodes", out_nodes, "temporal nodes of the smoothed curves")->capture_default_str();
    c->add_option("--knots", knots, "interior spline knots")->capture_default_str();
    c->add_flag("--no-cumulate", no_cumulate, "input values are already cumulative curves");
    c->add_option("--smooth-output", smooth_output, "intensity | cumulative")->capture_default_str();
    c->add_option("--idw-power", idw_power, "IDW distance power")->capture_default_str();
    c->add_option("--idw-radius", idw_radius, "IDW search radius");
    c->add_option("--log-floor", log_floor, "log(max(value, floor))")->capture_default_str();
    c->add_option("--trend-degree", trend_degree, "polynomial trend degree")->capture_default_str();
    c->add_option("--trend-basis", trend_basis, "legendre | monomial")->capture_default_str();
    c->add_option("--protect-modes", protect_modes, "sine modes fitted jointly with the trend")->capture_default_str();
    c->add_flag("--no-normalize", no_normalize, "keep raw mode scales");
    c->add_option("--min-retained", min_retained, "minimum mode energy share after detrending")
        ->capture_default_str();
    c->add_option("--base-box", base_box, "box of the theta_{i,1} coefficients")->capture_default_str();
    c->add_option("--odd-box", odd_box, "box of the theta_{i,2} coefficients")->capture_default_str();
    est.add(c, to_string(pipeline_estimate_defaults().aggregate));
  }

  PipelineConfig config(const Globals& g) const {
    PipelineConfig cfg;
    cfg.lattice = LatticeGeometry{parse_dims(lattice), x0, y0, dx, dy};
    cfg.n_modes = modes;
    cfg.out_nodes = out_nodes;
    cfg.n_knots = knots;
    cfg.cumulate = !no_cumulate;
    if (smooth_output == "intensity") cfg.smooth_output = SmoothOutput::intensity;
    else if (smooth_output == "cumulative") cfg.smooth_output = SmoothOutput::cumulative;
    else throw DomainError("smooth-output must be intensity or cumulative");
    cfg.idw.power = idw_power;
    cfg.idw.radius = idw_radius;
    cfg.log_floor = log_floor;
    cfg.trend.degree = trend_degree;
    if (trend_basis == "legendre") cfg.trend.basis = PolyBasis::legendre;
    else if (trend_basis == "monomial") cfg.trend.basis = PolyBasis::monomial;
    else throw DomainError("trend-basis must be legendre or monomial");
    cfg.trend.protect_modes = protect_modes;
    cfg.normalize = !no_normalize;
    cfg.min_retained_fraction = min_retained;
    cfg.base_box = parse_interval(base_box);
    cfg.odd_box = parse_interval(odd_box);
    cfg.estimate = est.options(g.seed);
    cfg.threads = g.threads;
    return cfg;
  }

  GridSeries load(const Globals& g) const {
    if (synthetic == !input.empty()) throw DomainError("give exactly one of --input or --synthetic");
    if (synthetic) {
      SyntheticScenario sc;
      sc.dims = parse_dims(synthetic_dims);
      sc.n_periods = synthetic_periods;
      sc.n_modes = modes;
      sc.seed = g.seed;
      return make_synthetic(sc).counts;
    }
    return has_ext(input, ".csv") ? io::load_series_csv(input) : io::load_series_binary(input);
  }
};

void write_lattice_csv(const std::string& path, const PipelineResult& r, const LatticeGeometry& geo) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  os << "i,j,x,y,mean_log_intensity,mean_trend\n" << std::setprecision(10);
  const std::size_t nt = r.t_grid.size();
  for (int i = 0; i < geo.dims.n1; ++i)
    for (int j = 0; j < geo.dims.n2; ++j) {
      const std::size_t s = geo.index(i, j);
      double a = 0.0, b = 0.0;
      const auto curve = r.lattice.series(s);
      const auto tr = r.trend_at(s);
      for (std::size_t t = 0; t < nt; ++t) {
        a += curve[t] / nt;
        b += tr[t] / nt;
      }
      const SiteCoord c = geo.node(i, j);
      os << i << ',' << j << ',' << c.x << ',' << c.y << ',' << a << ',' << b << '\n';
    }
}

json pipeline_json(const PipelineResult& r, const PipelineConfig& cfg) {
  json j{{"estimated", r.estimated},
         {"residual_rms", r.residual_rms},
         {"mode_scales", r.mode_scales},
         {"retained", r.retained},
         {"loss_modes", r.loss_modes},
         {"diagnostics", r.diagnostics},
         {"support_length", r.support_length()}};
  if (r.estimate) j["estimate"] = estimate_json(*r.estimate, cfg.model());
  return j;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw DomainError(msg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SARH(1) spatial functional time series and log-Gaussian Cox tools"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML/INI file mirroring the command-line flags");
  Globals g;
  app.add_option("--seed", g.seed, "random seed (simulation, synthetic data, optimizer starts, experiment base)")
      ->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads (0 = hardware concurrency)")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "directory for relative output paths");

  // simulate
  auto* sim = app.add_subcommand("simulate", "simulate a SARH(1) coefficient field");
  std::string sim_family = "example1", sim_dims = "200x200", sim_out = "field.bin";
  std::vector<double> sim_theta{1.0}, sim_noise;
  int sim_modes = 10, sim_burn = 100;
  double sim_support = 1.0;
  sim->add_option("--family", sim_family, "example1 | example2 | custom")->capture_default_str();
  sim->add_option("--theta", sim_theta, "parameters (custom: l1 l2 l3 per mode)");
  sim->add_option("--dims", sim_dims, "N1xN2")->capture_default_str();
  sim->add_option("--modes", sim_modes, "modes M")->capture_default_str();
  sim->add_option("--burn-in", sim_burn, "discarded rows and columns")->capture_default_str();
  sim->add_option("--noise-sd", sim_noise, "innovation SD per mode (default: normalizing values)");
  sim->add_option("--support", sim_support, "support length of the sine basis")->capture_default_str();
  sim->add_option("--out", sim_out, "output field (.bin or .csv)")->capture_default_str();

  // synthetic
  auto* syn = app.add_subcommand("synthetic", "write synthetic space-time counts with a known SARH(1) component");
  std::string syn_dims = "48x48", syn_out = "counts.csv";
  int syn_periods = 120;
  syn->add_option("--dims", syn_dims, "site grid N1xN2")->capture_default_str();
  syn->add_option("--periods", syn_periods, "time periods")->capture_default_str();
  syn->add_option("--out", syn_out, "counts CSV")->capture_default_str();

  // periodogram
  auto* per = app.add_subcommand("periodogram", "functional periodogram and empirical covariance of a field");
  std::string per_field, per_out = "periodogram.csv", per_cov_out, per_lags = "2x2";
  bool per_full = false;
  double per_support = 1.0;
  per->add_option("--field", per_field, "coefficient field (.bin or .csv)")->required();
  per->add_option("--support", per_support, "support length for CSV fields")->capture_default_str();
  per->add_flag("--full", per_full, "include cross-mode entries");
  per->add_option("--out", per_out, "periodogram CSV")->capture_default_str();
  per->add_option("--cov-out", per_cov_out, "empirical covariance CSV");
  per->add_option("--cov-lags", per_lags, "maximum lags L1xL2")->capture_default_str();

  // estimate
  auto* est = app.add_subcommand("estimate", "minimum-contrast Whittle estimate of theta");
  std::string est_family = "example1", est_field, est_out = "est.json";
  std::vector<std::string> est_box;
  int est_modes = 10;
  double est_support = 1.0;
  EstimateFlags est_flags;
  est->add_option("--family", est_family, "example1 | example2 | realdata_pmf | custom")->capture_default_str();
  est->add_option("--field", est_field, "coefficient field")->required();
  est->add_option("--support", est_support, "support length for CSV fields")->capture_default_str();
  est->add_option("--modes", est_modes, "modes M")->capture_default_str();
  est->add_option("--theta-box", est_box, "lo:hi per parameter (default: family box)");
  est->add_option("--out", est_out, "estimate JSON")->capture_default_str();
  est_flags.add(est, to_string(EstimateOptions{}.aggregate));

  // cox-moments
  auto* cox = app.add_subcommand("cox-moments", "log-Gaussian Cox moments for a test function");
  std::string cox_field, cox_phi, cox_rect = "0:0x0:0", cox_out = "moments.json", cox_family, cox_pair = "2x2";
  std::vector<double> cox_theta;
  int cox_modes = 10;
  double cox_support = 1.0;
  bool cox_diag = false;
  cox->add_option("--field", cox_field, "field for the empirical covariance route and the count predictor");
  cox->add_option("--family", cox_family, "model route: example1 | example2 (with --theta)");
  cox->add_option("--theta", cox_theta, "model parameters");
  cox->add_option("--modes", cox_modes, "modes of the model route")->capture_default_str();
  cox->add_option("--support", cox_support, "support length for CSV fields")->capture_default_str();
  cox->add_option("--phi", cox_phi, "test function coefficients (comma or newline separated)")->required();
  cox->add_option("--rect", cox_rect, "Borel rectangle i0:i1xj0:j1 (inclusive)")->capture_default_str();
  cox->add_option("--pair-lags", cox_pair, "pair-correlation lags L1xL2")->capture_default_str();
  cox->add_flag("--include-diagonal", cox_diag, "keep i = j terms in the product density exponent");
  cox->add_option("--out", cox_out, "moments JSON")->capture_default_str();

  // predict
  auto* pred = app.add_subcommand("predict", "plug-in one-step spatial prediction");
  std::string pred_field, pred_theta, pred_out = "pred.bin";
  double pred_support = 1.0;
  pred->add_option("--field", pred_field, "coefficient field")->required();
  pred->add_option("--theta", pred_theta, "estimate JSON (family, n_modes, theta_hat)")->required();
  pred->add_option("--support", pred_support, "support length for CSV fields")->capture_default_str();
  pred->add_option("--out", pred_out, "predicted field, entry (i-1, j-1) predicts site (i, j)")
      ->capture_default_str();

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "run the count-data estimation pipeline");
  PipelineFlags pipe_flags;
  std::string pipe_ckpt, pipe_resume = "none";
  pipe_flags.add(pipe);
  pipe->add_option("--checkpoint-dir", pipe_ckpt, "stage checkpoint directory (not relative to --out-dir)");
  pipe->add_option("--resume-from", pipe_resume, "none | lattice | coefficients")->capture_default_str();

  // cross-validate
  auto* cv = app.add_subcommand("cross-validate", "held-out-site CVFARE of the plug-in prediction");
  PipelineFlags cv_flags;
  std::vector<std::string> cv_ids;
  int cv_stride = 4, cv_offset = 2;
  std::string cv_scheme = "joint";
  cv_flags.add(cv);
  cv->add_option("--holdout", cv_ids, "held-out site ids (default: every stride-th interior site)");
  cv->add_option("--holdout-stride", cv_stride, "holdout stride on the site grid")->capture_default_str();
  cv->add_option("--holdout-offset", cv_offset, "holdout offset on the site grid")->capture_default_str();
  cv->add_option("--scheme", cv_scheme, "joint | leave-one-out")->capture_default_str();

  // experiment
  auto* exp = app.add_subcommand("experiment", "Monte Carlo mean / SD / MSE table");
  std::string exp_family = "example1", exp_out = "experiment.csv";
  std::vector<double> exp_theta;
  std::vector<int> exp_sides{100, 150, 200};
  int exp_reps = 30, exp_modes = 10, exp_burn = 100;
  EstimateFlags exp_flags;
  exp->add_option("--family", exp_family, "example1 | example2")->capture_default_str();
  exp->add_option("--theta", exp_theta, "true theta (default: 1 or (1, 1.6, 1.5, 1.2))");
  exp->add_option("--grid-sides", exp_sides, "square lattice sides, ascending")->capture_default_str();
  exp->add_option("--replicates", exp_reps, "replicates R")->capture_default_str();
  exp->add_option("--modes", exp_modes, "modes M")->capture_default_str();
  exp->add_option("--burn-in", exp_burn, "burn-in")->capture_default_str();
  exp->add_option("--out", exp_out, "CSV table")->capture_default_str();
  exp_flags.add(exp, to_string(EstimateOptions{}.aggregate));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      Sarh1Params p{family_from_string(sim_family), sim_theta, sim_modes, sim_noise, std::nullopt};
      if (p.family == Family::custom) require(p.theta.size() == 3u * sim_modes, "custom theta needs 3 values per mode");
      std::vector<std::string> warnings;
      const CoeffField f = simulate_sarh1(p, parse_dims(sim_dims), sim_burn, g.seed, &warnings, sim_support);
      for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
      save_field(g.out_path(sim_out), f);
    } else if (*syn) {
      SyntheticScenario sc;
      sc.dims = parse_dims(syn_dims);
      sc.n_periods = syn_periods;
      sc.seed = g.seed;
      io::save_series_csv(g.out_path(syn_out), make_synthetic(sc).counts);
    } else if (*per) {
      const CoeffField f = load_field(per_field, per_support);
      const Periodogram pg = periodogram(f, per_full);
      std::ofstream os(g.out_path(per_out));
      if (!os) throw FormatError("cannot open " + per_out + " for writing");
      write_periodogram_csv(os, pg);
      if (!per_cov_out.empty()) {
        const LatticeDims l = parse_dims(per_lags);
        std::ofstream cs(g.out_path(per_cov_out));
        if (!cs) throw FormatError("cannot open " + per_cov_out + " for writing");
        write_empirical_cov_csv(cs, empirical_cov(f, l.n1, l.n2));
      }
    } else if (*est) {
      const CoeffField f = load_field(est_field, est_support);
      require(f.n_modes() >= est_modes, "field has fewer modes than --modes");
      const SpectralModel m = make_model(est_family, est_modes, est_box);
      const ThetaEstimate e = estimate(m, periodogram(f), est_flags.options(g.seed));
      write_json(g.out_path(est_out), estimate_json(e, m));
    } else if (*cox) {
      const TestFunction phi(read_phi(cox_phi));
      const BorelRect rect = parse_rect(cox_rect);
      const LatticeDims pl = parse_dims(cox_pair);
      const int l1 = std::max(pl.n1, rect.width1() - 1), l2 = std::max(pl.n2, rect.width2() - 1);
      std::optional<CoeffField> field;
      if (!cox_field.empty()) field = load_field(cox_field, cox_support);
      CovarianceTable cov = [&] {
        if (!cox_family.empty()) {
          const SpectralModel m = make_model(cox_family, cox_modes, {});
          return functional_cov(m, cox_theta, phi, l1, l2);
        }
        require(field.has_value(), "give --field or --family/--theta");
        return functional_cov(empirical_cov(*field, l1, l2), phi);
      }();
      const CoxMomentSet ms(phi, cov, cox_diag ? DiagonalTerms::include : DiagonalTerms::exclude);
      const CountMoments cm = ms.count_moments(rect);
      json pair = json::array();
      for (int z1 = 0; z1 <= pl.n1; ++z1)
        for (int z2 = -pl.n2; z2 <= pl.n2; ++z2) pair.push_back({{"z", {z1, z2}}, {"g", ms.pair_correlation(z1, z2)}});
      json j{{"route", cox_family.empty() ? "empirical" : "model"},
             {"R0", cov.at(0, 0)},
             {"intensity", ms.intensity()},
             {"pair_correlation", pair},
             {"rect", {rect.i0, rect.i1, rect.j0, rect.j1}},
             {"count_mean", cm.mean},
             {"count_variance", cm.variance}};
      if (field) {
        j["ls_predictor"] = ls_count_predictor(*field, rect, phi);
        j["sampled_count"] = sample_counts(*field, rect, phi, g.seed);
      }
      write_json(g.out_path(cox_out), j);
    } else if (*pred) {
      const CoeffField f = load_field(pred_field, pred_support);
      const json e = read_json(pred_theta);
      const int modes = e.value("n_modes", f.n_modes());
      require(modes == f.n_modes(), "estimate and field disagree on the number of modes");
      const SpectralModel m = make_model(e.at("family").get<std::string>(), modes, {});
      const auto theta = e.at("theta_hat").get<std::vector<double>>();
      save_field(g.out_path(pred_out), plug_in_predict_field(f, model_triples(m, theta)));
    } else if (*pipe) {
      PipelineConfig cfg = pipe_flags.config(g);
      cfg.checkpoint_dir = pipe_ckpt;
      const Checkpoint from = checkpoint_from_string(pipe_resume);
      const PipelineResult r =
          from == Checkpoint::none ? run_pipeline(pipe_flags.load(g), cfg) : resume_pipeline(cfg, from);
      write_json(g.out_path("pipeline.json"), pipeline_json(r, cfg));
      io::save_binary(g.out_path("coefficients.bin"), r.coefficients);
      if (r.estimated) io::save_binary(g.out_path("predicted.bin"), r.predicted);
      write_lattice_csv(g.out_path("lattice.csv"), r, cfg.lattice);
      for (const auto& d : r.diagnostics) std::cerr << "note: " << d << '\n';
    } else if (*cv) {
      const PipelineConfig cfg = cv_flags.config(g);
      const GridSeries raw = cv_flags.load(g);
      std::vector<std::size_t> holdouts;
      if (!cv_ids.empty()) {
        for (const auto& id : cv_ids) {
          const auto it = std::find(raw.ids().begin(), raw.ids().end(), id);
          if (it == raw.ids().end()) throw IndexError("unknown site id '" + id + "'");
          holdouts.push_back(static_cast<std::size_t>(it - raw.ids().begin()));
        }
      } else {
        for (std::size_t s = 0; s < raw.n_sites(); ++s) {
          const Site n = cfg.lattice.nearest(raw.sites()[s]);
          if (n.i >= 1 && n.j >= 1 && n.i < cfg.lattice.dims.n1 - 1 && n.j < cfg.lattice.dims.n2 - 1 &&
              n.i % cv_stride == cv_offset && n.j % cv_stride == cv_offset)
            holdouts.push_back(s);
        }
      }
      CvScheme scheme = CvScheme::joint;
      if (cv_scheme == "leave-one-out") scheme = CvScheme::leave_one_out;
      else require(cv_scheme == "joint", "scheme must be joint or leave-one-out");
      const CrossValidation res = cross_validate(raw, cfg, holdouts, scheme);
      std::ofstream os(g.out_path("cvfare.csv"));
      if (!os) throw FormatError("cannot open cvfare.csv for writing");
      os << "t,plug_in,baseline\n" << std::setprecision(10);
      for (std::size_t t = 0; t < res.t_grid.size(); ++t)
        os << res.t_grid[t] << ',' << res.plug_in_cvfare.values[t] << ',' << res.baseline_cvfare.values[t] << '\n';
      std::vector<std::string> ids;
      for (std::size_t h : res.holdouts) ids.push_back(raw.ids()[h]);
      write_json(g.out_path("cross_validation.json"),
                 {{"holdouts", ids},
                  {"plug_in_l1", res.plug_in_cvfare.l1},
                  {"baseline_l1", res.baseline_cvfare.l1},
                  {"fit", pipeline_json(res.fit, cfg)}});
    } else if (*exp) {
      ExperimentConfig c;
      c.family = family_from_string(exp_family);
      c.theta = !exp_theta.empty()
                    ? exp_theta
                    : (c.family == Family::example2 ? std::vector<double>{1.0, 1.6, 1.5, 1.2} : std::vector<double>{1.0});
      c.grid_sides = exp_sides;
      c.replicates = exp_reps;
      c.n_modes = exp_modes;
      c.burn_in = exp_burn;
      c.seed = g.seed;
      c.threads = g.threads;
      c.estimate = exp_flags.options(g.seed);
      c.output_path = g.out_path(exp_out);
      const ExperimentResult r = run_experiment(c);
      write_experiment_csv(std::cout, r);
      for (std::size_t gi = 0; gi < r.errors.size(); ++gi)
        for (std::size_t ri = 0; ri < r.errors[gi].size(); ++ri)
          if (!r.errors[gi][ri].empty())
            std::cerr << "replicate " << ri << " on side " << c.grid_sides[gi] << " failed: " << r.errors[gi][ri]
                      << '\n';
    }
  } catch (const StageError& e) {
    std::cerr << "error in stage " << e.stage << ": " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
