#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "upsi/montecarlo.hpp"
#include "upsi/portfolio.hpp"

using namespace upsi;

TEST(Simplex, UniformMeansAndMarginal) {
  auto rng = make_stream(1);
  const int m = 4;
  const std::size_t n = 200000;
  std::vector<double> mean(m, 0.0);
  std::size_t below = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto th = sample_uniform_simplex(m, rng);
    double s = 0.0;
    for (int j = 0; j < m; ++j) {
      ASSERT_GE(th[static_cast<std::size_t>(j)], 0.0);
      mean[static_cast<std::size_t>(j)] += th[static_cast<std::size_t>(j)];
      s += th[static_cast<std::size_t>(j)];
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
    // first coordinate of a flat Dirichlet(1,1,1,1) is Beta(1,3): P(< 0.25) = 1 - 0.75^3
    if (th[0] < 0.25) ++below;
  }
  for (double v : mean) EXPECT_NEAR(v / n, 0.25, 0.003);
  EXPECT_NEAR(static_cast<double>(below) / n, 1 - std::pow(0.75, 3), 0.004);
}

TEST(Simplex, TwoStocksIsUniformOnSegment) {
  auto rng = make_stream(2);
  std::size_t below = 0;
  const std::size_t n = 100000;
  for (std::size_t i = 0; i < n; ++i)
    if (sample_uniform_simplex(2, rng)[0] < 0.3) ++below;
  EXPECT_NEAR(static_cast<double>(below) / n, 0.3, 0.005);
}

TEST(Streams, Deterministic) {
  std::mt19937_64 g(3);
  const auto x = oracle::random_market(g, 20, 3);
  const McConfig cfg{2000, 42};
  EXPECT_EQ(mc_wealth_up(x, cfg).log_wealth, mc_wealth_up(x, cfg).log_wealth);
  const auto z = SideInfoSample::scalar(oracle::uniform_points(g, 20));
  const auto a = mc_wealth_qstar(x, z, FunctionClass::threshold1d(), cfg);
  const auto b = mc_wealth_qstar(x, z, FunctionClass::threshold1d(), cfg);
  EXPECT_EQ(a.log_wealth, b.log_wealth);
  EXPECT_NE(a.log_wealth, mc_wealth_qstar(x, z, FunctionClass::threshold1d(), {2000, 43}).log_wealth);
}

TEST(Mc, AllOnesIsExactlyZero) {
  const auto x = MarketSequence::ones(50, 3);
  const McConfig cfg{500, 1};
  EXPECT_EQ(mc_wealth_up(x, cfg).log_wealth, 0.0);
  EXPECT_EQ(mc_wealth_up(x, cfg).stderr_log, 0.0);
  EXPECT_EQ(mc_wealth_statewise(x, StateSequence(std::vector<State>(50, 2), 3), cfg).log_wealth, 0.0);
  std::mt19937_64 g(4);
  const auto z = SideInfoSample::scalar(oracle::uniform_points(g, 50));
  EXPECT_NEAR(mc_wealth_qstar(x, z, FunctionClass::threshold1d(), cfg).log_wealth, 0.0, 1e-12);
}

TEST(Mc, SingleStateMatchesUniversal) {
  std::mt19937_64 g(5);
  const auto x = oracle::random_market(g, 30, 2);
  const McConfig cfg{3000, 9};
  EXPECT_DOUBLE_EQ(mc_wealth_statewise(x, StateSequence::constant(30), cfg).log_wealth,
                   mc_wealth_up(x, cfg).log_wealth);
}

TEST(Mc, EmptyStateContributesNothing) {
  std::mt19937_64 g(6);
  const auto x = oracle::random_market(g, 12, 2);
  const McConfig cfg{3000, 9};
  // a third state that never occurs must not change the estimate
  const auto a = mc_wealth_statewise(x, StateSequence(std::vector<State>(12, 1), 1), cfg);
  const auto b = mc_wealth_statewise(x, StateSequence(std::vector<State>(12, 1), 3), cfg);
  EXPECT_DOUBLE_EQ(a.log_wealth, b.log_wealth);
}

TEST(Mc, WithinThreeStandardErrorsOfExact) {
  std::mt19937_64 g(7);
  int ok = 0, total = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const auto x = oracle::random_market(g, 6, 2, 0.3, 2.0);
    const auto z = SideInfoSample::scalar(oracle::uniform_points(g, 6));
    const McConfig cfg{20000, static_cast<std::uint64_t>(rep)};
    const auto up = mc_wealth_up(x, cfg);
    ok += std::abs(up.log_wealth - laplace_wealth_dp(x)) <= 3 * up.stderr_log + 1e-12;
    const auto cls = FunctionClass::threshold1d();
    const auto qs = mc_wealth_qstar(x, z, cls, cfg);
    ok += std::abs(qs.log_wealth - induced_wealth_exact(QStarAssignment(2, z, cls), x)) <= 3 * qs.stderr_log + 1e-12;
    total += 2;
  }
  EXPECT_GE(ok, total - 2);
}

TEST(Mc, ClosedFormAlternating) {
  // ((2,0),(0,2)): W(theta) = 4 theta (1 - theta), mean over the segment 2/3
  const auto x = MarketSequence::from_rows({{2, 0}, {0, 2}});
  const auto r = mc_wealth_up(x, {100000, 3});
  EXPECT_NEAR(r.log_wealth, std::log(2.0 / 3.0), 3 * r.stderr_log);
  EXPECT_NEAR(laplace_wealth_dp(x), std::log(2.0 / 3.0), 1e-14);
}

TEST(Mc, SingletonClassIsEpochwiseUniversal) {
  std::mt19937_64 g(8);
  const auto x = oracle::random_market(g, 16, 2);
  const auto z = SideInfoSample::scalar(oracle::uniform_points(g, 16));
  const auto cls = FunctionClass::finite({StateFunction::constant()}, 0);
  const auto r = mc_wealth_qstar(x, z, cls, {50000, 1});
  ASSERT_EQ(r.per_epoch.size(), 5u);
  EXPECT_NEAR(r.per_epoch[0].log_factor, std::log((x.at(0, 1) + x.at(0, 2)) / 2), 1e-14);
  double exact = std::log((x.at(0, 1) + x.at(0, 2)) / 2);
  for (std::size_t first = 1, len = 1; first < 16; first += len, len *= 2)
    exact += laplace_wealth_dp(x.slice(first, first + len));
  EXPECT_NEAR(r.log_wealth, exact, 4 * r.stderr_log);
}

TEST(Mc, ConvergesAsSamplesGrow) {
  std::mt19937_64 g(10);
  const auto x = oracle::random_market(g, 40, 3);
  const double exact = laplace_wealth_dp(x);
  const auto small = mc_wealth_up(x, {200, 5});
  const auto big = mc_wealth_up(x, {20000, 5});
  EXPECT_LT(big.stderr_log, small.stderr_log / 5);
  EXPECT_NEAR(big.log_wealth, exact, 4 * big.stderr_log + 1e-9);
}

TEST(Mc, ZeroWealthMarket) {
  // every CRP except the vertices survives; a day where all relatives vanish is rejected
  const auto r = mc_wealth_up(MarketSequence::from_rows({{1, 0}, {0, 1}}), {2000, 1});
  EXPECT_TRUE(std::isfinite(r.log_wealth));
  EXPECT_NEAR(r.log_wealth, std::log(1.0 / 6.0), 3 * r.stderr_log);
  EXPECT_THROW(MarketSequence::from_rows({{1, 0}, {0, 0}}), InputError);
}

TEST(Mc, SingleCoveringMode) {
  std::mt19937_64 g(11);
  const auto x = oracle::random_market(g, 8, 2);
  const auto z = SideInfoSample::scalar(oracle::uniform_points(g, 8));
  const auto cls = FunctionClass::threshold1d();
  McConfig cfg{20000, 2};
  cfg.epoch_mode = false;
  const auto r = mc_wealth_qstar(x, z, cls, cfg);
  // equal-weight mixture over the covering of the whole path of the per-labeling wealth
  const auto cover = minimal_covering(cls, z);
  std::vector<double> per;
  for (std::size_t k = 0; k < cover.size(); ++k) {
    const auto row = cover.label_matrix().row(k);
    per.push_back(statewise_wealth_dp(x, StateSequence(std::vector<State>(row.begin(), row.end()), 2)));
  }
  EXPECT_NEAR(r.log_wealth, log_mean_exp(per), 4 * r.stderr_log);
}

TEST(Mc, NaiveRequirement) { EXPECT_DOUBLE_EQ(naive_sample_requirement(3, 0.1), 1000.0); }
