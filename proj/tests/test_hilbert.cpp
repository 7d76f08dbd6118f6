#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "sarhcox/field_io.hpp"
#include "sarhcox/hilbert.hpp"

using namespace sarhcox;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST(SineBasis, ClosedFormValues) {
  BasisSpec one(1.0, 3);
  EXPECT_NEAR(sine_basis_eval(one, 1, 0.5), 1.0, 1e-15);
  EXPECT_NEAR(sine_basis_eval(one, 2, 0.5), 0.0, 1e-15);
  BasisSpec two(2.0, 3);
  EXPECT_NEAR(sine_basis_eval(two, 3, 0.4), std::sin(0.6 * pi), 1e-15);
  EXPECT_NEAR(sine_basis_eval(two, 3, 0.4), 0.951057, 1e-6);
}

TEST(SineBasis, OrthonormalFlagScales) {
  BasisSpec s(2.0, 2, BasisNormalization::orthonormal);
  EXPECT_NEAR(sine_basis_eval(s, 1, 1.0), std::sqrt(2.0 / 2.0), 1e-15);
  EXPECT_DOUBLE_EQ(s.norm2(), 1.0);
}

TEST(SineBasis, RejectsOutOfRange) {
  BasisSpec s(1.0, 3);
  EXPECT_THROW(sine_basis_eval(s, 0, 0.5), DomainError);
  EXPECT_THROW(sine_basis_eval(s, 4, 0.5), DomainError);
  EXPECT_THROW(sine_basis_eval(s, 1, -0.1), DomainError);
  EXPECT_THROW(sine_basis_eval(s, 1, 1.1), DomainError);
  EXPECT_THROW(BasisSpec(0.0, 1), DomainError);
  EXPECT_THROW(BasisSpec(1.0, 0), DomainError);
}

TEST(SineBasis, DiscreteOrthogonality) {
  BasisSpec s(1.7, 6);
  const auto t = uniform_grid(s.support_length, 2000);
  const double h = s.support_length / 1999.0;
  for (int p = 1; p <= 6; ++p)
    for (int q = 1; q <= 6; ++q) {
      double acc = 0.0;
      for (std::size_t i = 0; i < t.size(); ++i) {
        const double w = (i == 0 || i + 1 == t.size()) ? 0.5 : 1.0;
        acc += w * h * sine_basis_eval(s, p, t[i]) * sine_basis_eval(s, q, t[i]);
      }
      EXPECT_NEAR(acc, p == q ? s.support_length / 2.0 : 0.0, 1e-6) << p << "," << q;
    }
}

TEST(Projection, RecoversBasisCombinations) {
  BasisSpec s(1.0, 3);
  const auto t = uniform_grid(1.0, 200);
  std::vector<double> f1(t.size()), f2(t.size()), zero(t.size(), 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    f1[i] = sine_basis_eval(s, 1, t[i]);
    f2[i] = 2.0 * sine_basis_eval(s, 1, t[i]) - 3.0 * sine_basis_eval(s, 2, t[i]);
  }
  const auto c1 = project_samples(f1, s), c2 = project_samples(f2, s), c0 = project_samples(zero, s);
  EXPECT_NEAR(c1[0], 1.0, 1e-6);
  EXPECT_NEAR(c1[1], 0.0, 1e-6);
  EXPECT_NEAR(c1[2], 0.0, 1e-6);
  EXPECT_NEAR(c2[0], 2.0, 1e-6);
  EXPECT_NEAR(c2[1], -3.0, 1e-6);
  EXPECT_NEAR(c2[2], 0.0, 1e-6);
  for (double c : c0) EXPECT_EQ(c, 0.0);
}

TEST(Projection, InvertsSynthesisOnSpan) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  for (auto norm : {BasisNormalization::sine, BasisNormalization::orthonormal}) {
    BasisSpec s(2.5, 8, norm);
    std::vector<double> c(8);
    for (double& v : c) v = n01(rng);
    const auto back = project_samples(synthesize(c, s, 4001), s);
    for (int p = 0; p < 8; ++p) EXPECT_NEAR(back[p], c[p], 1e-8);
  }
}

TEST(Projection, ResolutionGuard) {
  BasisSpec s(1.0, 5);
  std::vector<double> f(10, 1.0);
  EXPECT_THROW(project_samples(f, s), ResolutionError);
  f.resize(11);
  EXPECT_NO_THROW(project_samples(f, s));
}

TEST(CoeffFieldTest, EvaluateMatchesExplicitSum) {
  BasisSpec s(1.0, 3);
  CoeffField zero({4, 5}, s);
  EXPECT_EQ(evaluate_field(zero, {2, 3}, 0.3), 0.0);

  CoeffField e1({2, 2}, s);
  e1(1, 0, 0) = 1.0;
  EXPECT_NEAR(evaluate_field(e1, {1, 0}, 0.5), 1.0, 1e-15);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  CoeffField f({3, 4}, s);
  for (double& v : f.data()) v = u(rng);
  const double t = 0.37;
  const double expect = f(2, 1, 0) * std::sin(pi * t) + f(2, 1, 1) * std::sin(2 * pi * t) +
                        f(2, 1, 2) * std::sin(3 * pi * t);
  EXPECT_NEAR(evaluate_field(f, {2, 1}, t), expect, 1e-14);
  EXPECT_THROW(evaluate_field(f, {3, 0}, t), IndexError);
  EXPECT_THROW(evaluate_field(f, {0, -1}, t), IndexError);
}

TEST(CoeffFieldTest, RejectsBadData) {
  BasisSpec s(1.0, 2);
  EXPECT_THROW(CoeffField({2, 2}, s, std::vector<double>(7, 0.0)), DomainError);
  std::vector<double> d(8, 0.0);
  d[3] = std::nan("");
  EXPECT_THROW(CoeffField({2, 2}, s, d), DomainError);
  EXPECT_THROW(CoeffField({0, 2}, s), DomainError);
}

TEST(FrequencyGridTest, ComponentsInHalfOpenInterval) {
  for (int n : {1, 2, 5, 8}) {
    FrequencyGrid g({n, n + 1});
    EXPECT_EQ(g.size(), static_cast<std::size_t>(n * (n + 1)));
    for (int u = 0; u < n; ++u) {
      EXPECT_GT(g.omega1(u), -pi);
      EXPECT_LE(g.omega1(u), pi + 1e-15);
    }
    for (int u = 0; u < n + 1; ++u) {
      EXPECT_GT(g.omega2(u), -pi);
      EXPECT_LE(g.omega2(u), pi + 1e-15);
    }
  }
}

TEST(FieldIo, BinaryAndCsvRoundTrip) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  CoeffField f({3, 2}, BasisSpec(1.5, 4));
  for (double& v : f.data()) v = n01(rng);

  std::stringstream bin;
  io::write_binary(bin, f);
  EXPECT_EQ(bin.str().size(), 8u * (4 + 3 * 2 * 4));
  const CoeffField g = io::read_binary(bin);
  EXPECT_EQ(g.dims(), f.dims());
  EXPECT_EQ(g.n_modes(), 4);
  EXPECT_EQ(g.basis().support_length, 1.5);
  for (std::size_t i = 0; i < f.data().size(); ++i) EXPECT_EQ(g.data()[i], f.data()[i]);

  std::stringstream csv;
  io::write_csv(csv, f);
  const CoeffField h = io::read_csv(csv, 1.5);
  for (std::size_t i = 0; i < f.data().size(); ++i) EXPECT_EQ(h.data()[i], f.data()[i]);
}

TEST(FieldIo, TruncatedBinaryFails) {
  CoeffField f({2, 2}, BasisSpec(1.0, 1));
  std::stringstream bin;
  io::write_binary(bin, f);
  std::string s = bin.str();
  s.resize(s.size() - 3);
  std::stringstream cut(s);
  EXPECT_THROW(io::read_binary(cut), FormatError);
}
