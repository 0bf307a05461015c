#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "upsi/empirical.hpp"

using namespace upsi;

namespace {

// max over representative pairs of |#disagreements - n |F(a1) - F(a2)||, uniform marginal.
double rho_brute(const std::vector<double>& z) {
  const auto reps = oracle::threshold_representatives(z);
  const double n = static_cast<double>(z.size());
  double best = 0.0;
  for (const auto& g1 : reps)
    for (const auto& g2 : reps) {
      double count = 0;
      for (double v : z) count += g1(v) != g2(v);
      const double p = std::abs(std::clamp(g1.a, 0.0, 1.0) - std::clamp(g2.a, 0.0, 1.0));
      best = std::max(best, std::abs(count - n * p));
    }
  return best;
}

DisagreementOracle uniform_pairwise() {
  DisagreementOracle o;
  o.pairwise = [](const StateFunction& g1, const StateFunction& g2) {
    const double a = std::clamp(std::get<StateFunction::Threshold>(g1.params()).a, 0.0, 1.0);
    const double b = std::clamp(std::get<StateFunction::Threshold>(g2.params()).a, 0.0, 1.0);
    return std::abs(a - b);
  };
  return o;
}

}  // namespace

TEST(Rho, SingletonClassIsZero) {
  std::mt19937_64 g(1);
  const auto z = SideInfoSample::scalar(oracle::uniform_points(g, 50));
  EXPECT_EQ(rho_gxg(FunctionClass::finite({StateFunction::threshold(0.4)}), z, uniform_pairwise()), 0.0);
}

TEST(Rho, ExtremeThresholdsAgreeEverywhere) {
  // thresholds 0 and 1 on (0, 1) data: disagreement count n, probability 1
  const auto z = SideInfoSample::scalar({0.2, 0.5, 0.9});
  const auto cls = FunctionClass::finite({StateFunction::threshold(0.0), StateFunction::threshold(1.0)});
  EXPECT_NEAR(rho_gxg(cls, z, uniform_pairwise()), 0.0, 1e-15);
}

TEST(Rho, MatchesBruteForce) {
  std::mt19937_64 g(2);
  for (int rep = 0; rep < 50; ++rep) {
    const auto zv = oracle::uniform_points(g, 10);
    const auto z = SideInfoSample::scalar(zv);
    EXPECT_NEAR(rho_gxg(FunctionClass::threshold1d(), z, uniform01_oracle()), rho_brute(zv), 1e-9);
  }
}

TEST(Rho, FastPathEqualsPairwisePath) {
  std::mt19937_64 g(3);
  for (int rep = 0; rep < 30; ++rep) {
    auto zv = oracle::uniform_points(g, 5 + rep);
    if (rep % 3 == 0) zv[1] = zv[0];  // ties
    const auto z = SideInfoSample::scalar(zv);
    EXPECT_NEAR(rho_gxg(FunctionClass::threshold1d(), z, uniform01_oracle()),
                rho_gxg(FunctionClass::threshold1d(), z, uniform_pairwise()), 1e-9);
  }
}

TEST(Rho, ConstantProcessIsZero) {
  const auto z = constant_process(0.7)(100, 1);
  EXPECT_EQ(rho_gxg(FunctionClass::threshold1d(), z, point_mass_oracle(0.7)), 0.0);
  const auto rep = rho_growth_report(constant_process(0.7), FunctionClass::threshold1d(), point_mass_oracle(0.7),
                                     {16, 64, 256}, 3, 1);
  for (const auto& r : rep.rows) EXPECT_EQ(r.mean_rho, 0.0);
  EXPECT_FALSE(rep.fitted_exponent.has_value());
}

TEST(Rho, BoundedByHorizon) {
  std::mt19937_64 g(4);
  for (std::size_t n : {1, 2, 7, 40}) {
    const auto z = SideInfoSample::scalar(oracle::uniform_points(g, n));
    const double r = rho_gxg(FunctionClass::threshold1d(), z, uniform01_oracle());
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, static_cast<double>(n));
  }
  EXPECT_EQ(rho_gxg(FunctionClass::threshold1d(), SideInfoSample::scalar({}), uniform01_oracle()), 0.0);
}

// Each part loses at most one count per side to its finite set of representatives.
TEST(Rho, SplittingTheSampleIsSubadditive) {
  std::mt19937_64 g(5);
  for (int rep = 0; rep < 20; ++rep) {
    const auto zv = oracle::uniform_points(g, 30);
    const std::vector<double> a(zv.begin(), zv.begin() + 13), b(zv.begin() + 13, zv.end());
    const auto cls = FunctionClass::threshold1d();
    const auto o = uniform01_oracle();
    EXPECT_LE(rho_gxg(cls, SideInfoSample::scalar(zv), o),
              rho_gxg(cls, SideInfoSample::scalar(a), o) + rho_gxg(cls, SideInfoSample::scalar(b), o) + 4.0 + 1e-9);
  }
}

TEST(Rho, MissingOracleThrows) {
  const auto z = SideInfoSample::scalar({0.1, 0.2});
  EXPECT_THROW(rho_gxg(FunctionClass::threshold1d(), z, DisagreementOracle{}), InputError);
  EXPECT_THROW(uniform01_oracle()(StateFunction::constant(), StateFunction::threshold(0.1)), InputError);
  EXPECT_THROW(rho_growth_report(iid_uniform_process(), FunctionClass::threshold1d(), uniform01_oracle(), {8}, 0, 1),
               InputError);
}

TEST(Rho, GrowthIsRootN) {
  const auto rep = rho_growth_report(iid_uniform_process(), FunctionClass::threshold1d(), uniform01_oracle(),
                                     {64, 128, 256, 512, 1024}, 40, 7);
  ASSERT_TRUE(rep.fitted_exponent.has_value());
  EXPECT_NEAR(*rep.fitted_exponent, 0.5, 0.1);
}

TEST(Rho, ArOracleMatchesEmpiricalFrequency) {
  // rounded AR(1) marginal: P(V < a) from the oracle against a long simulated path
  const double phi = 0.5, sigma = 1.0, grid = 0.25;
  const auto o = ar1_oracle(phi, sigma, grid);
  std::mt19937_64 g(8);
  std::normal_distribution<double> e(0.0, sigma);
  double v = 0.0;
  std::size_t below = 0, n = 400000;
  for (std::size_t t = 0; t < n + 1000; ++t) {
    v = phi * v + e(g);
    if (t >= 1000 && grid * std::round(v / grid) < 0.3) ++below;
  }
  EXPECT_NEAR(o.threshold_cdf(0.3), static_cast<double>(below) / n, 0.005);
}

TEST(Hamming, Examples) {
  const auto seg = SideInfoSample::scalar({1.2, 1.7, 0.5});
  EXPECT_EQ(epoch_hamming(StateFunction::threshold(1.0), StateFunction::threshold(1.5), seg), 1u);
  EXPECT_EQ(epoch_hamming(StateFunction::threshold(1.0), StateFunction::threshold(1.0), seg), 0u);
  EXPECT_EQ(epoch_hamming(StateFunction::threshold(1.0), StateFunction::threshold(9.0), SideInfoSample::scalar({})), 0u);
  EXPECT_EQ(epoch_hamming_count(StateFunction::threshold(1.0), StateFunction::threshold(1.5), seg, 1, 3), 0u);
  EXPECT_THROW(epoch_hamming_count(StateFunction::threshold(1.0), StateFunction::threshold(1.5), seg, 2, 4), InputError);
}

TEST(Slope, ExactPowerLaw) {
  const auto s = loglog_slope({1, 2, 4, 8}, {3, 3 * std::sqrt(2.0), 6, 6 * std::sqrt(2.0)});
  ASSERT_TRUE(s);
  EXPECT_NEAR(*s, 0.5, 1e-12);
}
