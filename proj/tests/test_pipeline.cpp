#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "sarhcox/pipeline.hpp"
#include "sarhcox/synthetic.hpp"

using namespace sarhcox;

namespace {

SyntheticScenario small_scenario() {
  SyntheticScenario sc;
  sc.dims = {12, 12};
  sc.n_periods = 60;
  sc.seed = 4;
  return sc;
}

PipelineConfig small_config(const SyntheticScenario& sc) {
  PipelineConfig cfg;
  cfg.lattice.dims = sc.dims;
  cfg.out_nodes = 241;
  cfg.n_knots = 20;
  cfg.trend.degree = 3;
  return cfg;
}

std::string temp_dir(const char* name) {
  const auto p = std::filesystem::temp_directory_path() / ("sarhcox_test_" + std::string(name));
  std::filesystem::remove_all(p);
  return p.string();
}

void expect_same(const PipelineResult& a, const PipelineResult& b) {
  ASSERT_EQ(a.estimated, b.estimated);
  ASSERT_TRUE(a.estimate && b.estimate);
  EXPECT_EQ(a.estimate->theta_hat, b.estimate->theta_hat);
  EXPECT_EQ(a.mode_scales, b.mode_scales);
  EXPECT_EQ(a.trend, b.trend);
  ASSERT_EQ(a.predicted.data().size(), b.predicted.data().size());
  for (std::size_t i = 0; i < a.predicted.data().size(); ++i) EXPECT_EQ(a.predicted.data()[i], b.predicted.data()[i]);
}

}  // namespace

TEST(Cvfare, PerfectAndDoubledPredictions) {
  const std::vector<double> t{0.0, 1.0, 2.0, 4.0};
  const std::vector<double> truth{1.0, 2.0, 3.0, 4.0, 0.5, 0.5, 0.5, 0.5};
  const auto same = cvfare(truth, truth, t);
  for (double v : same.values) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(same.l1, 0.0);
  std::vector<double> twice(truth);
  for (double& v : twice) v *= 2.0;
  const auto dbl = cvfare(truth, twice, t);
  for (double v : dbl.values) EXPECT_DOUBLE_EQ(v, 1.0);
  EXPECT_DOUBLE_EQ(dbl.l1, 1.0);
}

TEST(Cvfare, TrapezoidAverage) {
  // One site: relative errors 0, 1, 0 at t = 0, 1, 3 -> (0.5 + 1) / 3.
  const std::vector<double> t{0.0, 1.0, 3.0};
  const auto c = cvfare(std::vector<double>{1.0, 1.0, 1.0}, std::vector<double>{1.0, 2.0, 1.0}, t);
  EXPECT_DOUBLE_EQ(c.l1, 0.5);
}

TEST(Cvfare, RejectsNonPositiveTruth) {
  const std::vector<double> t{0.0, 1.0};
  EXPECT_THROW(cvfare(std::vector<double>{1.0, 0.0}, std::vector<double>{1.0, 1.0}, t), DomainError);
  EXPECT_THROW(cvfare(std::vector<double>{1.0}, std::vector<double>{1.0}, t), DomainError);
}

TEST(InnovationScales, WhiteNoiseScale) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z;
  CoeffField f({128, 128}, BasisSpec(1.0, 2));
  for (std::size_t s = 0; s < 128 * 128; ++s) {
    f.data()[2 * s] = 0.5 * z(rng);
    f.data()[2 * s + 1] = 3.0 * z(rng);
  }
  const auto s = innovation_scales(periodogram(f));
  EXPECT_NEAR(s[0], 0.5, 0.02);
  EXPECT_NEAR(s[1], 3.0, 0.1);
}

TEST(Pipeline, ClosedLoopSmoke) {
  const auto sc = small_scenario();
  const auto data = make_synthetic(sc);
  const auto r = run_pipeline(data.counts, small_config(sc));
  ASSERT_TRUE(r.estimated);
  EXPECT_EQ(r.triples.size(), 10u);
  EXPECT_EQ(r.t_grid.size(), 241u);
  EXPECT_EQ(r.coefficients.dims(), sc.dims);
  EXPECT_GT(r.residual_rms, 0.0);
  // Mode 1 is almost a cubic on the support and is left out of the loss.
  EXPECT_EQ(std::count(r.loss_modes.begin(), r.loss_modes.end(), 1), 0);
  EXPECT_FALSE(r.diagnostics.empty());
  for (const auto& t : r.triples) EXPECT_TRUE(is_stable(t));
  EXPECT_EQ(r.predicted.dims(), (LatticeDims{sc.dims.n1 - 1, sc.dims.n2 - 1}));
}

TEST(Pipeline, Deterministic) {
  const auto sc = small_scenario();
  const auto data = make_synthetic(sc);
  const auto cfg = small_config(sc);
  expect_same(run_pipeline(data.counts, cfg), run_pipeline(data.counts, cfg));
  auto threaded = cfg;
  threaded.threads = 3;
  expect_same(run_pipeline(data.counts, cfg), run_pipeline(data.counts, threaded));
}

TEST(Pipeline, NoiseFreeSkipsEstimation) {
  auto sc = small_scenario();
  sc.poisson = false;
  sc.innovation_sd = 0.0;
  const auto r = run_pipeline(make_synthetic(sc).counts, small_config(sc));
  EXPECT_FALSE(r.estimated);
  EXPECT_LT(r.residual_rms, 1e-4);
  ASSERT_FALSE(r.diagnostics.empty());
  EXPECT_NE(r.diagnostics.back().find("numerically zero"), std::string::npos);
}

TEST(Pipeline, CheckpointResumeIsBitIdentical) {
  const auto sc = small_scenario();
  const auto data = make_synthetic(sc);
  auto cfg = small_config(sc);
  cfg.checkpoint_dir = temp_dir("resume");
  const auto full = run_pipeline(data.counts, cfg);
  expect_same(full, resume_pipeline(cfg, Checkpoint::lattice));
  expect_same(full, resume_pipeline(cfg, Checkpoint::coefficients));
  std::filesystem::remove_all(cfg.checkpoint_dir);
  EXPECT_THROW(resume_pipeline(cfg, Checkpoint::lattice), StageError);
}

TEST(Pipeline, ErrorsCarryStageName) {
  const auto sc = small_scenario();
  const auto cfg = small_config(sc);
  auto stage_of = [&](const GridSeries& g, const PipelineConfig& c) {
    try {
      run_pipeline(g, c);
    } catch (const StageError& e) {
      return e.stage;
    }
    return std::string("none");
  };
  std::vector<double> times;
  for (int m = 1; m <= 60; ++m) times.push_back(m);
  std::vector<double> neg(2 * 60, 5.0);
  neg[7] = -1.0;
  EXPECT_EQ(stage_of(GridSeries({{0, 0}, {5, 5}}, times, neg), cfg), "cumulate");
  std::vector<double> clash(2 * 60, 5.0);
  clash[60] = 6.0;
  EXPECT_EQ(stage_of(GridSeries({{3, 3}, {3, 3}}, times, clash), cfg), "idw");
  const std::vector<double> short_times{1.0, 2.0, 3.0};
  EXPECT_EQ(stage_of(GridSeries({{0, 0}}, short_times, {1.0, 2.0, 3.0}), cfg), "smooth");
  auto bad = cfg;
  bad.log_floor = 0.0;
  EXPECT_EQ(stage_of(GridSeries({{0, 0}}, times, std::vector<double>(60, 1.0)), bad), "config");
}

TEST(CrossValidationTest, JointHoldouts) {
  const auto sc = small_scenario();
  const auto data = make_synthetic(sc);
  auto cfg = small_config(sc);
  cfg.idw.radius = 1.5;
  const auto holdouts = lattice_holdouts(sc.dims);
  ASSERT_EQ(holdouts.size(), 9u);
  const auto cv = cross_validate(data.counts, cfg, holdouts);
  EXPECT_EQ(cv.truth.size(), holdouts.size() * cv.t_grid.size());
  EXPECT_TRUE(cv.fit.estimated);
  EXPECT_TRUE(std::isfinite(cv.plug_in_cvfare.l1));
  EXPECT_TRUE(std::isfinite(cv.baseline_cvfare.l1));
  EXPECT_GT(cv.baseline_cvfare.l1, 0.0);
  EXPECT_EQ(cv.nodes[0].i, 2);
  EXPECT_EQ(cv.nodes[0].j, 2);
}

TEST(CrossValidationTest, BoundaryHoldoutRejected) {
  const auto sc = small_scenario();
  const auto data = make_synthetic(sc);
  EXPECT_THROW(cross_validate(data.counts, small_config(sc), {0}), BoundaryError);
  EXPECT_THROW(cross_validate(data.counts, small_config(sc), {}), DomainError);
  EXPECT_THROW(cross_validate(data.counts, small_config(sc), {100000}), IndexError);
}

TEST(CheckpointNames, RoundTrip) {
  for (auto c : {Checkpoint::none, Checkpoint::lattice, Checkpoint::coefficients})
    EXPECT_EQ(checkpoint_from_string(to_string(c)), c);
  EXPECT_THROW(checkpoint_from_string("fft"), DomainError);
}
