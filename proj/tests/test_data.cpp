#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "upsi/data.hpp"

using namespace upsi;

namespace {

PriceTable parse(const std::string& text) {
  std::istringstream in(text);
  return ingest_csv(in, "t.csv");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Ingest, ReadsTable) {
  const auto t = parse("date,AAA,BBB\n2020-01-02,10,20\n2020-01-03,11,19\n\n# note\n2020-01-06,12.5,18\n");
  EXPECT_EQ(t.tickers, (std::vector<std::string>{"AAA", "BBB"}));
  EXPECT_EQ(t.rows(), 3u);
  EXPECT_EQ(t.dates[2], "2020-01-06");
  EXPECT_DOUBLE_EQ(t.prices[2][0], 12.5);
}

TEST(Ingest, RejectsBadRowsWithLocation) {
  EXPECT_NE(error_of("date,A,B\n2020-01-02,1,2\n2020-01-03,0,2\n").find("t.csv:3"), std::string::npos);
  EXPECT_NE(error_of("date,A\n2020-01-02,1\n2020-01-02,2\n").find("t.csv:3"), std::string::npos);
  EXPECT_NE(error_of("date,A,B\n2020-01-02,1\n").find("t.csv:2"), std::string::npos);
  EXPECT_NE(error_of("date,A\n2020-02-30,1\n").find("t.csv:2"), std::string::npos);
  EXPECT_NE(error_of("date,A\n2020-01-02,abc\n").find("t.csv:2"), std::string::npos);
  EXPECT_NE(error_of("when,A\n2020-01-02,1\n"), "");
  EXPECT_NE(error_of("date,A\n2020-01-02,-3\n"), "");
  EXPECT_THROW(ingest_csv(std::string("/nonexistent/prices.csv")), InputError);
}

TEST(Relatives, Examples) {
  const auto t = parse("date,A\n2020-01-01,1\n2020-01-02,2\n2020-01-03,4\n");
  const auto x = to_price_relatives(t);
  ASSERT_EQ(x.days(), 2u);
  EXPECT_DOUBLE_EQ(x.at(0, 1), 2.0);
  EXPECT_DOUBLE_EQ(x.at(1, 1), 2.0);
  const auto c = to_price_relatives(parse("date,A,B\n2020-01-01,3,5\n2020-01-02,3,5\n2020-01-03,3,5\n"));
  for (double v : c.data()) EXPECT_EQ(v, 1.0);
  EXPECT_THROW(to_price_relatives(parse("date,A\n2020-01-01,3\n")), InputError);
}

TEST(Relatives, TelescopeToPriceRatio) {
  const auto t = parse("date,A,B\n2021-03-01,10,7\n2021-03-02,12,6\n2021-03-03,9,8\n2021-03-04,15,8.5\n");
  const auto x = to_price_relatives(t);
  for (int j = 1; j <= 2; ++j) {
    double prod = 1.0;
    for (std::size_t i = 0; i < x.days(); ++i) prod *= x.at(i, j);
    EXPECT_NEAR(prod, t.prices.back()[static_cast<std::size_t>(j - 1)] / t.prices.front()[static_cast<std::size_t>(j - 1)],
                1e-14);
  }
}

TEST(Relatives, RoundTripThroughCsv) {
  const auto x = MarketSequence::from_rows({{1.1, 0.9}, {0.95, 1.3}, {1.0, 1.0}});
  std::ostringstream out;
  write_price_csv(out, prices_from_relatives(x, {"A", "B"}));
  const auto y = to_price_relatives(parse(out.str()));
  ASSERT_EQ(y.days(), 3u);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(y.data()[i], x.data()[i], 1e-13);
}

TEST(Generate, PointMassSupport) {
  const auto d = generate({IidDiscrete{{{1.5, 0.5}}, {1.0}}, 1}, 10);
  for (std::size_t t = 0; t < 10; ++t) {
    EXPECT_EQ(d.market.at(t, 1), 1.5);
    EXPECT_EQ(d.market.at(t, 2), 0.5);
  }
  EXPECT_FALSE(d.side.has_value());
}

TEST(Generate, DeterministicPerSeed) {
  const ProcessSpec a{IidLognormal{{0.0, 0.01}, {0.1, 0.2}}, 5};
  const auto x = generate(a, 100).market, y = generate(a, 100).market;
  EXPECT_TRUE(std::equal(x.data().begin(), x.data().end(), y.data().begin()));
  auto b = a;
  b.seed = 6;
  EXPECT_NE(generate(b, 100).market.data()[0], x.data()[0]);
}

TEST(Generate, TwoPointFrequencies) {
  const auto d = generate({IidDiscrete{{{2, 1}, {0.5, 1}}, {0.5, 0.5}}, 11}, 100000);
  double up = 0;
  for (std::size_t t = 0; t < d.market.days(); ++t) up += d.market.at(t, 1) == 2.0;
  EXPECT_NEAR(up / 100000.0, 0.5, 0.01);
}

TEST(Generate, ArMixingCarriesSideInformation) {
  ArMixing p;
  p.grid = 0.5;
  const auto d = generate({p, 3}, 500);
  ASSERT_TRUE(d.side.has_value());
  ASSERT_EQ(d.side->size(), 500u);
  for (std::size_t t = 0; t < 500; ++t) {
    const double z = d.side->point(t)[0];
    EXPECT_NEAR(z / 0.5, std::round(z / 0.5), 1e-12);
  }
}

TEST(Generate, MarkovStaysInBox) {
  MarkovMarket p;
  p.m = 3;
  p.order = 2;
  const auto d = generate({p, 4}, 2000);
  for (double v : d.market.data()) {
    EXPECT_GE(v, p.lo);
    EXPECT_LE(v, p.hi);
  }
}

TEST(Generate, RegimeSignalIsInPreviousDay) {
  const auto d = generate({RegimeSwitching{}, 9}, 400);
  // x_{t-1,1} > 1 exactly when stock 2 is disfavored today
  for (std::size_t t = 1; t < 400; ++t)
    EXPECT_EQ(d.market.at(t - 1, 1) > 1.0, d.market.at(t, 2) < 1.0);
}

TEST(Generate, InvalidSpecs) {
  EXPECT_THROW(generate({IidDiscrete{{{1, 1}}, {0.5}}, 0}, 5), InputError);
  EXPECT_THROW(generate({IidDiscrete{{{1, 1}, {1}}, {0.5, 0.5}}, 0}, 5), InputError);
  EXPECT_THROW(generate({IidLognormal{{0.0}, {-1.0}}, 0}, 5), InputError);
  MarkovMarket bad;
  bad.lo = 2.0;
  EXPECT_THROW(generate({bad, 0}, 5), InputError);
  ArMixing ar;
  ar.phi = 1.0;
  EXPECT_THROW(generate({ar, 0}, 5), InputError);
  EXPECT_THROW(generate({RegimeSwitching{}, 0}, 0), InputError);
}

TEST(SideInfo, PreviousFirstRelative) {
  const auto x = MarketSequence::from_rows({{1.3, 0.9}, {0.8, 1.1}, {1.0, 1.2}});
  const auto z = extract_side_info(x, SideInfoMode::prev_first());
  EXPECT_EQ(z.point(0)[0], 1.0);
  EXPECT_EQ(z.point(1)[0], 1.3);
  EXPECT_EQ(z.point(2)[0], 0.8);
  EXPECT_EQ(extract_side_info(x, SideInfoMode::prev_first(0.0)).point(0)[0], 0.0);
}

TEST(SideInfo, HistoryWindow) {
  std::vector<std::vector<double>> rows;
  for (int t = 1; t <= 6; ++t) rows.push_back({t * 1.0, t * 10.0});
  const auto x = MarketSequence::from_rows(rows);
  const auto z = extract_side_info(x, SideInfoMode::history(2));
  ASSERT_EQ(z.dim(), 4u);
  const auto p = z.point(4);  // day 5 sees days 3 and 4
  EXPECT_EQ(std::vector<double>(p.begin(), p.end()), (std::vector<double>{3, 30, 4, 40}));
  const auto first = z.point(0);
  EXPECT_EQ(std::vector<double>(first.begin(), first.end()), (std::vector<double>{1, 1, 1, 1}));
  EXPECT_THROW(SideInfoMode::history(0), InputError);
}

TEST(SideInfo, IsCausal) {
  // changing day t must leave z_1..z_t untouched
  std::vector<std::vector<double>> rows{{1.1, 0.9}, {0.8, 1.2}, {1.05, 0.97}, {0.9, 1.0}, {1.2, 1.1}};
  const auto base = extract_side_info(MarketSequence::from_rows(rows), SideInfoMode::history(2));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    auto mutated = rows;
    mutated[t] = {7.0, 7.0};
    const auto z = extract_side_info(MarketSequence::from_rows(mutated), SideInfoMode::history(2));
    for (std::size_t s = 0; s <= t; ++s) {
      const auto a = base.point(s), b = z.point(s);
      EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin())) << "day " << t << " leaked into z_" << s + 1;
    }
  }
}
