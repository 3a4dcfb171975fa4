#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "txtopo/error.hpp"
#include "txtopo/market.hpp"

using namespace txtopo;

TEST_CASE("price features") {
  const std::vector<std::optional<double>> p{0.5, 0.6};
  const auto f = price_features(p, 1);
  CHECK(f.price == 0.6);
  CHECK(f.price_inc == doctest::Approx(0.1).epsilon(1e-12));
  const std::vector<std::optional<double>> flat{2.0, 2.0, 2.0};
  CHECK(price_features(flat, 2).price_inc == 0.0);
  CHECK_THROWS_AS(price_features(p, 0), PreconditionError);
  const std::vector<std::optional<double>> gap{1.0, std::nullopt};
  CHECK_THROWS_AS(price_features(gap, 1), DataError);
}

TEST_CASE("trade volume") {
  CHECK(trade_volume(testutil::records({{"A", "B", 2}, {"B", "C", 3}, {"C", "A", 1}})) == 6.0);
  CHECK(trade_volume({}) == 0.0);
  CHECK(trade_volume(testutil::records({{"A", "B", 7.5}})) == 7.5);
}

TEST_CASE("top trader ranking") {
  // Increments y_s for weeks 0..9 (index 0 unused).
  std::vector<std::optional<double>> inc{std::nullopt, 1, -2, 3, 0.5, -1, 2, 4, -3, 1};
  SUBCASE("volume tracking the next increment scores 1") {
    WalletVolumes v;
    for (int s = 0; s < 8; ++s) {
      v.add_week(s, testutil::records({{"A", "X" + std::to_string(s), 10.0 + *inc[s + 1]}}));
    }
    TraderRankingOptions opt;
    opt.min_history = 8;
    const auto r = rank_top_traders(v, inc, 8, opt);
    REQUIRE_FALSE(r.scores.empty());
    CHECK(r.scores.front().first == "A");
    CHECK(r.scores.front().second == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.contains("A"));
  }
  SUBCASE("a wallet active once is not eligible") {
    WalletVolumes v;
    v.add_week(0, testutil::records({{"A", "B", 5.0}}));
    for (int s = 1; s < 8; ++s) v.add_week(s, testutil::records({{"C", "D", 1.0 + s * s}}));
    const auto r = rank_top_traders(v, inc, 8);
    for (const auto& [wallet, score] : r.scores) {
      CHECK(wallet != "A");
      CHECK(wallet != "B");
    }
  }
  SUBCASE("two eligible wallets, half selected") {
    // Counterparties appear once each and are not eligible.
    WalletVolumes v;
    for (int s = 0; s < 8; ++s) {
      const auto k = std::to_string(s);
      v.add_week(s, testutil::records({{"A", "x" + k, 10.0 + *inc[s + 1]}, {"C", "y" + k, 1.0 + (s % 3)}}));
    }
    TraderRankingOptions opt;
    opt.fraction = 0.5;
    const auto r = rank_top_traders(v, inc, 8, opt);
    CHECK(r.scores.size() == 2);
    CHECK(r.selected == std::vector<std::string>{"A"});
  }
  SUBCASE("later data is never read") {
    WalletVolumes a, b;
    for (int s = 0; s < 9; ++s) {
      const auto week = testutil::records({{"A", "B", 1.0 + s}, {"C", "D", 5.0 - s % 2}});
      a.add_week(s, week);
      b.add_week(s, week);
    }
    b.add_week(9, testutil::records({{"A", "Z", 1e6}}));
    auto longer = inc;
    longer.push_back(100.0);
    const auto ra = rank_top_traders(a, inc, 8);
    const auto rb = rank_top_traders(b, longer, 8);
    CHECK(ra.scores == rb.scores);
    CHECK(ra.selected == rb.selected);
  }
}

TEST_CASE("top trader volume counts each transfer once") {
  TraderRanking r;
  r.selected = {"A"};
  CHECK(top_trader_volume(testutil::records({{"A", "B", 2}, {"C", "D", 5}}), r) == 2.0);
  CHECK(top_trader_volume(testutil::records({{"A", "B", 2}}), TraderRanking{}) == 0.0);
  r.selected = {"A", "B"};
  CHECK(top_trader_volume(testutil::records({{"A", "B", 3}}), r) == 3.0);
}

TEST_CASE("Puell multiple") {
  const Date start = parse_date("2020-01-01");
  TimeSeries s;
  s.kind = SeriesKind::issuance;
  for (int d = 0; d < 365; ++d) s.points.emplace_back(start + std::chrono::days{d}, 3.7);
  const Date last = start + std::chrono::days{364};
  CHECK(puell_multiple(s, last) == 1.0);
  s.points.back().second = 2 * 3.7;
  // 2c / ((364c + 2c) / 365)
  CHECK(puell_multiple(s, last) == doctest::Approx(730.0 / 366.0).epsilon(1e-12));
  TimeSeries short_history = s;
  short_history.points.erase(short_history.points.begin());
  CHECK_THROWS_AS(puell_multiple(short_history, last), DataError);
}

TEST_CASE("sentiment increment") {
  const std::vector<std::vector<std::optional<double>>> flat{{5.0, 5.0}, {3.0, 3.0}};
  CHECK(sentiment_increment(flat, 1) == 0.0);
  const std::vector<std::vector<std::optional<double>>> moving{{5.0, 8.0}, {3.0, 2.0}};
  CHECK(sentiment_increment(moving, 1) == 2.0);
  CHECK_THROWS_AS(sentiment_increment(moving, 0), PreconditionError);
}

TEST_CASE("feature assembly") {
  WeeklyFeatureColumns cols;
  cols.n_weeks = 208;
  for (auto& c : cols.columns) c.assign(208, 1.0);
  for (int t = 0; t < 208; ++t) cols.prices.push_back(100.0 + t);
  for (auto& c : cols.columns) c[0].reset();
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    if (kFeatureNames[f] == "trade_volume_1%")
      for (int t = 0; t < 9; ++t) cols.columns[f][t].reset();
  }
  SUBCASE("warm-up of one week plus eight weeks of trader history") {
    const auto rows = assemble_features(cols, 1 + 8);
    CHECK(rows.size() == 199);
    CHECK(rows.front().week == 9);
    CHECK_FALSE(rows.back().target.has_value());
    CHECK(rows[rows.size() - 2].target == 1.0);
  }
  SUBCASE("a gap names its week") {
    cols.columns[feature_index("sent_inc")][50].reset();
    try {
      assemble_features(cols, 9);
      FAIL("expected an error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("week 50") != std::string::npos);
      CHECK(std::string(e.what()).find("sent_inc") != std::string::npos);
    }
  }
}

TEST_CASE("feature rows index by name") {
  FeatureRow r;
  r["delta_beta0"] = 3.0;
  CHECK(r.values[kFeatureCount - 1] == 3.0);
  CHECK_THROWS_AS(feature_index("nope"), PreconditionError);
}
