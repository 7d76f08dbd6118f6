#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>
#include <sstream>
#include <string>

#include "sarhcox/model.hpp"
#include "sarhcox/spectral.hpp"

using namespace sarhcox;

namespace {

CoeffField random_field(LatticeDims d, int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  CoeffField f(d, BasisSpec(1.0, m));
  for (double& v : f.data()) v = n01(rng);
  return f;
}

// Direct evaluation of (N (2 pi)^2)^{-1/2} sum_{y=1..N} exp(-i <omega, y>) X_y.
cplx brute_dft(const CoeffField& f, int k, double w1, double w2) {
  cplx acc = 0.0;
  for (int i = 0; i < f.n1(); ++i)
    for (int j = 0; j < f.n2(); ++j) acc += std::polar(1.0, -(w1 * (i + 1) + w2 * (j + 1))) * f(i, j, k);
  return acc / std::sqrt(static_cast<double>(f.dims().size()) * two_pi_sq);
}

double brute_cov(const CoeffField& f, int z1, int z2, int k, int l) {
  double acc = 0.0;
  for (int i = 0; i < f.n1(); ++i)
    for (int j = 0; j < f.n2(); ++j) {
      const int a = i + z1, b = j + z2;
      if (a < 0 || b < 0 || a >= f.n1() || b >= f.n2()) continue;
      acc += f(i, j, k) * f(a, b, l);
    }
  return acc / static_cast<double>(f.dims().size());
}

}  // namespace

TEST(FunctionalDft, MatchesBruteForce) {
  for (LatticeDims d : {LatticeDims{4, 4}, LatticeDims{5, 5}, LatticeDims{3, 6}}) {
    const CoeffField f = random_field(d, 2, 17 + d.n1);
    const ModeSpectrum x = functional_dft(f);
    for (int u1 = 0; u1 < d.n1; ++u1)
      for (int u2 = 0; u2 < d.n2; ++u2)
        for (int k = 0; k < 2; ++k) {
          const cplx ref = brute_dft(f, k, x.grid.omega1(u1), x.grid.omega2(u2));
          EXPECT_NEAR(std::abs(x(u1, u2, k) - ref), 0.0, 1e-10);
        }
  }
}

TEST(FunctionalDft, ZeroAndConstantFields) {
  CoeffField zero({4, 4}, BasisSpec(1.0, 2));
  for (const cplx& v : functional_dft(zero).values) EXPECT_EQ(std::abs(v), 0.0);

  CoeffField c({6, 4}, BasisSpec(1.0, 1));
  for (double& v : c.data()) v = 2.5;
  const ModeSpectrum x = functional_dft(c);
  const double n = 24.0;
  EXPECT_NEAR(std::abs(x(0, 0, 0) - cplx(2.5 * std::sqrt(n / two_pi_sq))), 0.0, 1e-12);
  for (int u1 = 0; u1 < 6; ++u1)
    for (int u2 = 0; u2 < 4; ++u2)
      if (u1 || u2) {
        EXPECT_NEAR(std::abs(x(u1, u2, 0)), 0.0, 1e-12);
      }
}

TEST(FunctionalDft, ConjugateSymmetry) {
  const CoeffField f = random_field({7, 6}, 3, 4);
  const ModeSpectrum x = functional_dft(f);
  for (int u1 = 0; u1 < 7; ++u1)
    for (int u2 = 0; u2 < 6; ++u2)
      for (int k = 0; k < 3; ++k) {
        const cplx a = x(u1, u2, k), b = x(FrequencyGrid::mirror(u1, 7), FrequencyGrid::mirror(u2, 6), k);
        EXPECT_NEAR(std::abs(b - std::conj(a)), 0.0, 1e-12);
      }
}

TEST(PeriodogramTest, DiagonalIsSquaredModulusAndCrossBlockHermitian) {
  const CoeffField f = random_field({5, 4}, 3, 8);
  const ModeSpectrum x = functional_dft(f);
  const Periodogram p = Periodogram::from_dft(x, true);
  for (int u1 = 0; u1 < 5; ++u1)
    for (int u2 = 0; u2 < 4; ++u2) {
      const int v1 = FrequencyGrid::mirror(u1, 5), v2 = FrequencyGrid::mirror(u2, 4);
      for (int k = 0; k < 3; ++k) {
        EXPECT_NEAR(p.diag(u1, u2, k), std::norm(x(u1, u2, k)), 1e-14);
        EXPECT_GE(p.diag(u1, u2, k), 0.0);
        EXPECT_LT(std::abs(p.entry(u1, u2, k, k).imag()), 1e-12);
        for (int l = 0; l < 3; ++l) {
          EXPECT_NEAR(std::abs(p.entry(u1, u2, k, l) - x(u1, u2, k) * x(v1, v2, l)), 0.0, 1e-14);
          // Hermitian in (k, l) at each frequency; reflection conjugates.
          EXPECT_NEAR(std::abs(p.entry(u1, u2, l, k) - std::conj(p.entry(u1, u2, k, l))), 0.0, 1e-12);
          EXPECT_NEAR(std::abs(p.entry(v1, v2, k, l) - std::conj(p.entry(u1, u2, k, l))), 0.0, 1e-12);
        }
      }
    }
  const Periodogram d = periodogram(f);
  EXPECT_FALSE(d.has_cross());
  EXPECT_THROW(d.entry(0, 0, 0, 1), DomainError);
}

TEST(PeriodogramTest, ParsevalMatchesLagZeroCovariance) {
  for (int rep = 0; rep < 10; ++rep) {
    const CoeffField f = random_field({4 + rep % 3, 4 + rep % 2}, 3, 100 + rep);
    const Periodogram p = periodogram(f);
    const EmpiricalCov c = empirical_cov(f, 0, 0);
    const double n = static_cast<double>(f.dims().size());
    for (int k = 0; k < 3; ++k) {
      double acc = 0.0;
      for (int u1 = 0; u1 < f.n1(); ++u1)
        for (int u2 = 0; u2 < f.n2(); ++u2) acc += p.diag(u1, u2, k);
      EXPECT_NEAR(two_pi_sq / n * acc, c.at(0, 0, k, k), 1e-10);
    }
  }
}

TEST(PeriodogramTest, FourierPairWithEmpiricalCovariance) {
  const CoeffField f = random_field({6, 5}, 2, 21);
  const Periodogram p = periodogram(f);
  const EmpiricalCov c = empirical_cov(f, 5, 4);
  const FrequencyGrid& g = p.grid();
  for (int u1 = 0; u1 < 6; ++u1)
    for (int u2 = 0; u2 < 5; ++u2)
      for (int k = 0; k < 2; ++k) {
        cplx acc = 0.0;
        for (int z1 = -5; z1 <= 5; ++z1)
          for (int z2 = -4; z2 <= 4; ++z2)
            acc += c.at(z1, z2, k, k) * std::polar(1.0, -(g.omega1(u1) * z1 + g.omega2(u2) * z2));
        EXPECT_NEAR(std::abs(acc / two_pi_sq - p.diag(u1, u2, k)), 0.0, 1e-8);
      }
}

TEST(EmpiricalCovTest, MatchesNestedLoopAndSymmetry) {
  const CoeffField f = random_field({5, 5}, 2, 33);
  const EmpiricalCov c = empirical_cov(f, 2, 2);
  for (int z1 = -2; z1 <= 2; ++z1)
    for (int z2 = -2; z2 <= 2; ++z2)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
          EXPECT_NEAR(c.at(z1, z2, k, l), brute_cov(f, z1, z2, k, l), 1e-12);
          EXPECT_EQ(c.at(z1, z2, k, l), c.at(-z1, -z2, l, k));
        }
  EXPECT_EQ(c.at(5, 0, 0, 0), 0.0);
  EXPECT_EQ(c.at(0, -7, 1, 0), 0.0);
  EXPECT_THROW(c.at(3, 0, 0, 0), IndexError);
  EXPECT_THROW(empirical_cov(f, 5, 0), DomainError);
  EXPECT_THROW(empirical_cov(f, 0, -1), DomainError);
}

TEST(EmpiricalCovTest, WhiteNoiseVariance) {
  const CoeffField f = random_field({200, 200}, 1, 9);
  EXPECT_NEAR(empirical_cov(f, 0, 0).at(0, 0, 0, 0), 1.0, 0.05);
}

TEST(CovFromSpectrum, ConstantSpectrum) {
  const auto t = cov_from_spectrum([](double, double) { return 0.7; }, 3, 3, 64, 64);
  EXPECT_NEAR(t.at(0, 0), 0.7 * two_pi_sq, 1e-12);
  for (int z1 = -3; z1 <= 3; ++z1)
    for (int z2 = -3; z2 <= 3; ++z2)
      if (z1 || z2) {
        EXPECT_NEAR(t.at(z1, z2), 0.0, 1e-12);
      }
  EXPECT_LT(t.max_imag_residue, 1e-10);
  EXPECT_THROW(t.at(4, 0), IndexError);
}

TEST(CovFromSpectrum, SeparableClosedForm) {
  // c = -a b factorizes the AR polynomial into two 1-D AR(1) factors with
  // R_z = s^2 a^|z1| b^|z2| / ((1 - a^2)(1 - b^2)), s^2 = (2 pi)^2 sigma^2.
  const Eigentriple t{0.6, -0.4, 0.24};
  const double sigma2 = 0.3;
  const auto r = cov_from_spectrum([&](double w1, double w2) { return sarh1_spectral_density(t, sigma2, w1, w2); },
                                   6, 6);
  const double s2 = two_pi_sq * sigma2;
  for (int z1 = -6; z1 <= 6; ++z1)
    for (int z2 = -6; z2 <= 6; ++z2) {
      const double ref = s2 * std::pow(0.6, std::abs(z1)) * std::pow(-0.4, std::abs(z2)) / ((1 - 0.36) * (1 - 0.16));
      EXPECT_NEAR(r.at(z1, z2), ref, 1e-10);
    }
}

TEST(CovFromSpectrum, RoundTripExample1) {
  const auto model = SpectralModel::example1(1);
  const double th[] = {1.0};
  auto dens = [&](double w1, double w2) { return model.density(th, 1, w1, w2); };
  const auto r = cov_from_spectrum(dens, 64, 64, 512, 512);
  EXPECT_LT(r.max_imag_residue, 1e-10);
  for (int z1 = -64; z1 <= 64; ++z1)
    for (int z2 = -64; z2 <= 64; ++z2) EXPECT_GE(r.at(0, 0), std::abs(r.at(z1, z2)));
  double num = 0.0, den = 0.0;
  const int g = 64;
  for (int u1 = 0; u1 < g; ++u1)
    for (int u2 = 0; u2 < g; ++u2) {
      const double w1 = two_pi * u1 / g - std::numbers::pi, w2 = two_pi * u2 / g - std::numbers::pi;
      num += std::abs(spectrum_from_cov(r, w1, w2) - dens(w1, w2));
      den += std::abs(dens(w1, w2));
    }
  EXPECT_LT(num / den, 1e-4);
}

TEST(CovFromSpectrum, NyquistGuard) {
  auto one = [](double, double) { return 1.0; };
  EXPECT_THROW(cov_from_spectrum(one, 32, 2, 64, 64), ResolutionError);
  EXPECT_NO_THROW(cov_from_spectrum(one, 31, 2, 64, 64));
}

TEST(Fejer, ConstantSpectrumInvertsExactly) {
  FejerInverse q([](double, double) { return 4.0; });
  for (int m : {1, 3, 10})
    for (double w : {0.0, 1.0, -2.5}) EXPECT_NEAR(q.smoothed(m, m, w, 0.3 * w), 0.25, 1e-12);
}

TEST(Fejer, ErrorDecreasesWithOrder) {
  const auto model = SpectralModel::example1(1);
  const double th[] = {1.0};
  auto dens = [&](double w1, double w2) { return model.density(th, 1, w1, w2); };
  FejerInverse q(dens);
  double prev = std::numeric_limits<double>::infinity();
  for (int m : {4, 8, 16, 32}) {
    double sup = 0.0;
    for (int u1 = 0; u1 < 40; ++u1)
      for (int u2 = 0; u2 < 40; ++u2) {
        const double w1 = two_pi * u1 / 40 - std::numbers::pi, w2 = two_pi * u2 / 40 - std::numbers::pi;
        sup = std::max(sup, std::abs(q.smoothed(m, m, w1, w2) - 1.0 / dens(w1, w2)));
      }
    EXPECT_LT(sup, prev) << "M=" << m;
    prev = sup;
  }
}

TEST(Fejer, ConjugateSymmetricCoefficients) {
  const Eigentriple t{0.3, 0.2, 0.1};
  FejerInverse q([&](double w1, double w2) { return sarh1_spectral_density(t, 1.0, w1, w2); });
  for (int z1 = -3; z1 <= 3; ++z1)
    for (int z2 = -3; z2 <= 3; ++z2) EXPECT_NEAR(std::abs(q.g(-z1, -z2) - std::conj(q.g(z1, z2))), 0.0, 1e-12);
}

TEST(Fejer, SlowDecayIsReported) {
  const Eigentriple t{0.995, 0.0, 0.0};
  auto inv = [&](double w1, double w2) { return ar_modulus2(t, w1, w2); };
  EXPECT_THROW(FejerInverse q(inv, 64), ConvergenceError);
  auto zero = [](double, double) { return 0.0; };
  EXPECT_THROW(FejerInverse q(zero, 16), SingularityError);
}

TEST(SpectralCsv, RowCountsAndValues) {
  const CoeffField f = random_field({3, 4}, 2, 21);
  std::ostringstream diag, full, cov;
  write_periodogram_csv(diag, periodogram(f));
  write_periodogram_csv(full, periodogram(f, true));
  write_empirical_cov_csv(cov, empirical_cov(f, 1, 1));
  auto lines = [](const std::string& s) { return std::count(s.begin(), s.end(), '\n'); };
  EXPECT_EQ(lines(diag.str()), 1 + 12 * 2);
  EXPECT_EQ(lines(full.str()), 1 + 12 * 4);
  EXPECT_EQ(lines(cov.str()), 1 + 9 * 4);
  std::istringstream is(cov.str());
  std::string header, row;
  std::getline(is, header);
  EXPECT_EQ(header, "z1,z2,k,l,value");
  std::getline(is, row);
  EXPECT_EQ(row.substr(0, 9), "-1,-1,1,1");
  EXPECT_NEAR(std::stod(row.substr(10)), brute_cov(f, -1, -1, 0, 0), 1e-15);
}
