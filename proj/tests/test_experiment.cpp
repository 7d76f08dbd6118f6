#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "sarhcox/experiment.hpp"

using namespace sarhcox;

TEST(Summarize, SingleReplicate) {
  const auto row = summarize({1.3}, 1.0);
  EXPECT_EQ(row.sd, 0.0);
  EXPECT_DOUBLE_EQ(row.mse, 0.09);
  EXPECT_DOUBLE_EQ(row.mean, 1.3);
}

TEST(Summarize, HandValues) {
  // x = 0.8, 1.0, 1.5 around truth 1: mean 1.1, sample variance 0.13.
  const auto row = summarize({0.8, 1.0, 1.5}, 1.0);
  EXPECT_DOUBLE_EQ(row.mean, 1.1);
  EXPECT_NEAR(row.sd, std::sqrt(0.13), 1e-15);
  EXPECT_NEAR(row.mse, (0.04 + 0.0 + 0.25) / 3, 1e-15);
}

TEST(Summarize, BiasVarianceIdentity) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z(0.9, 0.2);
  for (int n : {2, 5, 30}) {
    std::vector<double> x(n);
    for (double& v : x) v = z(rng);
    const auto row = summarize(x, 1.0);
    const double bias = row.mean - 1.0;
    EXPECT_NEAR(row.mse, row.sd * row.sd * (n - 1) / n + bias * bias, 1e-12);
  }
  EXPECT_TRUE(std::isnan(summarize({}, 1.0).mean));
}

TEST(Experiment, ConfigValidation) {
  ExperimentConfig c;
  c.grid_sides = {20, 10};
  EXPECT_THROW(c.validate(), DomainError);
  c.grid_sides = {10};
  c.replicates = 0;
  EXPECT_THROW(c.validate(), DomainError);
  c.replicates = 1;
  c.family = Family::realdata_pmf;
  EXPECT_THROW(c.validate(), DomainError);
  c.family = Family::example1;
  c.theta = {5.0};
  EXPECT_THROW(c.validate(), Error);
}

TEST(Experiment, SmallRunTabulatesAndIsReproducible) {
  ExperimentConfig c;
  c.grid_sides = {16, 24};
  c.replicates = 3;
  c.n_modes = 4;
  c.burn_in = 20;
  c.seed = 7;
  const auto a = run_experiment(c);
  ASSERT_EQ(a.rows.size(), 2u);
  EXPECT_EQ(a.rows[0].n, 256);
  EXPECT_EQ(a.rows[1].n, 576);
  for (const auto& row : a.rows) {
    EXPECT_EQ(row.failures, 0);
    EXPECT_EQ(row.successes, 3);
    EXPECT_GE(row.mean, 0.7);
    EXPECT_LE(row.mean, 1.3);
  }
  c.threads = 2;
  const auto b = run_experiment(c);
  for (std::size_t g = 0; g < 2; ++g) EXPECT_EQ(a.estimates[g], b.estimates[g]);
  std::ostringstream os;
  write_experiment_csv(os, a);
  std::istringstream is(os.str());
  std::string header, line;
  std::getline(is, header);
  EXPECT_EQ(header, "N,param,mean,sd,mse,failures");
  int rows = 0;
  while (std::getline(is, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 5);
    ++rows;
  }
  EXPECT_EQ(rows, 2);
}

TEST(Experiment, ReplicateSeedsDistinct) {
  std::set<std::uint64_t> seen;
  for (std::size_t g = 0; g < 3; ++g)
    for (std::size_t r = 0; r < 100; ++r) seen.insert(replicate_seed(1, g, r));
  EXPECT_EQ(seen.size(), 300u);
}
