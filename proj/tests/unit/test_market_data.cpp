#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fingat/data/cache.hpp"
#include "fingat/data/features.hpp"
#include "fingat/data/instances.hpp"
#include "fingat/data/market.hpp"
#include "fingat/data/split.hpp"
#include "fingat/data/synth.hpp"
#include "fingat/errors.hpp"
#include "support/fixtures.hpp"

using namespace fingat;
using namespace fingat::data;

namespace {

PriceTable parse(const std::string& body) {
  std::istringstream in(std::string(kPriceHeader) + "\n" + body);
  return parse_prices(in, "fixture.csv");
}

std::vector<InstanceWindow> build(const PriceTable& t, std::size_t sectors = 2, BuildLog* log = nullptr) {
  return build_instances(t, test::round_robin_sectors(t, sectors), InstanceOptions{}, log);
}

}  // namespace

TEST_CASE("load_prices") {
  SUBCASE("two valid rows") {
    auto t = parse("AAA,2021-01-05,10,11,9,10.5,10.4,100\nAAA,2021-01-04,10,10.5,9.5,10,9.9,50\n");
    REQUIRE(t.size() == 1);
    REQUIRE(t["AAA"].size() == 2);
    CHECK(t["AAA"][0].date == Date::parse("2021-01-04"));
  }
  SUBCASE("high below low") {
    CHECK_THROWS_AS(parse("AAA,2021-01-05,10,9,11,10,10,100\n"), DataError);
  }
  SUBCASE("non-positive price") {
    CHECK_THROWS_AS(parse("AAA,2021-01-05,0,11,0,10,10,100\n"), DataError);
  }
  SUBCASE("duplicate bar") {
    CHECK_THROWS_AS(parse("AAA,2021-01-05,10,11,9,10,10,1\nAAA,2021-01-05,10,11,9,10,10,1\n"), DataError);
  }
  SUBCASE("malformed row reports its line") {
    try {
      parse("AAA,2021-01-05,10,11,9,10,10,1\nAAA,2021-01-06,ten,11,9,10,10,1\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse("AAA,2021-13-05,10,11,9,10,10,1\n"), ParseError);
    CHECK_THROWS_AS(parse("AAA,2021-01-05,10,11,9,10,10\n"), ParseError);
  }
  SUBCASE("wrong header") {
    std::istringstream in("stock,date\n");
    CHECK_THROWS_AS(parse_prices(in), ParseError);
  }
}

TEST_CASE("load_prices: 100-stock fixture matches a line-count oracle") {
  const auto dir = std::filesystem::temp_directory_path() / "fingat_test_prices";
  std::filesystem::create_directories(dir);
  const auto path = dir / "prices.csv";
  std::mt19937_64 rng(77);
  PriceTable src;
  for (std::size_t s = 0; s < 100; ++s) src[test::stock_name(s)] = test::random_walk(test::stock_name(s), 5 + rng() % 40, s);
  write_prices(path, src);

  std::map<std::string, std::size_t> oracle;
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) ++oracle[line.substr(0, line.find(','))];

  const auto loaded = load_prices(path);
  REQUIRE(loaded.size() == oracle.size());
  for (const auto& [stock, count] : oracle) CHECK(loaded.at(stock).size() == count);
  CHECK(loaded.at("S07")[3].close == src.at("S07")[3].close);
}

TEST_CASE("sector catalog") {
  std::istringstream in("stock_id,sector_id\nA,X\nB,Y\nC,X\n");
  auto c = parse_sectors(in);
  CHECK(c.sectors() == std::vector<std::string>{"X", "Y"});
  CHECK(c.members("X") == std::vector<std::string>{"A", "C"});
  CHECK(c.sector_of("B") == "Y");
  CHECK_THROWS_AS(c.sector_of("Z"), DataError);
  std::istringstream dup("stock_id,sector_id\nA,X\nA,Y\n");
  CHECK_THROWS_AS(parse_sectors(dup), DataError);
}

TEST_CASE("return_ratio") {
  CHECK(return_ratio(100, 105) == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(return_ratio(42.5, 42.5) == 0.0);
  CHECK_THROWS_AS(return_ratio(0, 1), DomainError);
  CHECK_THROWS_AS(return_ratio(-1, 1), DomainError);
}

TEST_CASE("price_ratio_features") {
  PriceBar flat{"A", {}, 7, 7, 7, 7, 7, 0};
  CHECK(price_ratio_features(flat) == std::array<double, 3>{0, 0, 0});
  PriceBar b{"A", {}, 102, 110, 95, 100, 100, 0};
  auto f = price_ratio_features(b);
  CHECK(f[0] == doctest::Approx(0.02).epsilon(1e-14));
  CHECK(f[1] == doctest::Approx(0.10).epsilon(1e-14));
  CHECK(f[2] == doctest::Approx(-0.05).epsilon(1e-14));
  b.close = 0;
  CHECK_THROWS_AS(price_ratio_features(b), DomainError);
}

TEST_CASE("moving_average_features") {
  std::vector<double> constant(30, 12.5);
  for (double v : moving_average_features(constant)) CHECK(v == doctest::Approx(0.0).epsilon(1e-15));
  std::vector<double> ramp{1, 2, 3, 4, 5};
  CHECK(moving_average_feature(ramp, 5) == doctest::Approx(-0.4).epsilon(1e-15));
  CHECK(moving_average_feature(ramp, 5, true) == doctest::Approx(0.75).epsilon(1e-15));  // 3 / (5 - 1)
  CHECK_THROWS_AS(moving_average_features(std::vector<double>(29, 1.0)), EligibilityError);

  SUBCASE("30-day random fixture vs prefix-sum oracle") {
    std::mt19937_64 rng(30);
    std::uniform_real_distribution<double> u(5, 50);
    std::vector<double> h(30);
    for (auto& v : h) v = u(rng);
    std::vector<double> prefix(31, 0.0);
    for (std::size_t i = 0; i < 30; ++i) prefix[i + 1] = prefix[i] + h[i];
    auto f = moving_average_features(h);
    for (std::size_t k = 0; k < 6; ++k) {
      const std::size_t w = kMovingAverageWindows[k];
      const double oracle = (prefix[30] - prefix[30 - w]) / static_cast<double>(w) / h.back() - 1.0;
      CHECK(f[k] == doctest::Approx(oracle).epsilon(1e-12));
    }
  }
}

TEST_CASE("build_instances counts") {
  // A series of N bars has N - 30 eligible days and N - 45 instances.
  CHECK(build(test::random_market(3, 45)).empty());
  auto inst = build(test::random_market(3, 50));
  CHECK(inst.size() == 5);
  for (const auto& i : inst) {
    CHECK(i.stocks.size() == 3);
    for (const auto& s : i.stocks) {
      CHECK(s.features.size() == 15 * 15);
      CHECK(s.target_move == (s.target_return > 0.0 ? 1 : 0));
    }
  }
}

TEST_CASE("build_instances: features and targets match an independent recomputation") {
  const auto market = test::random_market(2, 52, 3);
  const auto instances = build(market);
  REQUIRE(instances.size() == 7);
  for (std::size_t k = 0; k < instances.size(); ++k) {
    for (const auto& s : instances[k].stocks) {
      const auto& bars = market.at(s.stock_id);
      // Instance k uses days 30+k .. 44+k and predicts day 45+k.
      const std::size_t target = 45 + k;
      CHECK(instances[k].prediction_date == bars[target].date);
      CHECK(s.target_return == doctest::Approx((bars[target].adj_close - bars[target - 1].adj_close) /
                                               bars[target - 1].adj_close).epsilon(1e-14));
      for (std::size_t d = 0; d < 15; ++d) {
        const auto& b = bars[30 + k + d];
        const double* row = &s.features[d * 15];
        CHECK(row[0] == b.open);
        CHECK(row[4] == b.adj_close);
        CHECK(row[5] == doctest::Approx(b.adj_close / bars[29 + k + d].adj_close - 1.0).epsilon(1e-12));
        CHECK(row[7] == doctest::Approx(b.high / b.close - 1.0).epsilon(1e-14));
        double ma10 = 0.0;
        for (std::size_t j = 0; j < 10; ++j) ma10 += bars[30 + k + d - j].adj_close;
        CHECK(row[10] == doctest::Approx(ma10 / 10.0 / b.adj_close - 1.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("build_instances: a gap excludes the stock from affected windows only") {
  auto market = test::random_market(10, 60, 5);
  auto& gappy = market.at("S03");
  const Date missing = gappy[50].date;
  gappy.erase(gappy.begin() + 50);
  BuildLog log;
  const auto instances = build(market, 2, &log);
  // Prediction positions 45..59 -> 15 instances. Windows starting at 35..44
  // (predicting positions 50..59) contain the missing day.
  REQUIRE(instances.size() == 15);
  CHECK(log.calendar.size() == 60);
  CHECK(log.exclusions.size() == 10);
  for (std::size_t k = 0; k < instances.size(); ++k) {
    const bool affected = k >= 5;
    CHECK(instances[k].stocks.size() == (affected ? 9u : 10u));
  }
  for (const auto& e : log.exclusions) {
    CHECK(e.stock_id == "S03");
    CHECK(e.missing_date == missing);
  }
}

TEST_CASE("build_instances: the 90% calendar drops thinly traded dates") {
  auto market = test::random_market(3, 55, 9);
  market.at("S01").erase(market.at("S01").begin() + 40);
  BuildLog log;
  const auto instances = build(market, 1, &log);
  CHECK(log.calendar.size() == 54);
  CHECK(log.exclusions.empty());
  CHECK(instances.size() == 54 - 45);
}

TEST_CASE("build_instances: a stock without a sector is rejected") {
  auto market = test::random_market(2, 50);
  auto catalog = SectorCatalog::from_pairs({{"S00", "X"}});
  CHECK_THROWS_AS(build_instances(market, catalog, InstanceOptions{}), DataError);
}

TEST_CASE("split_chronological") {
  CHECK(split_counts(10, {0.6, 0.2, 0.2}).train == 6);
  CHECK(split_counts(10, {0.6, 0.2, 0.2}).validation == 2);
  CHECK(split_counts(10, {0.6, 0.2, 0.2}).test == 2);
  const auto tw = split_counts(965, {0.6, 0.2, 0.2});
  CHECK(tw.train == 579);
  CHECK(tw.validation == 193);
  CHECK(tw.test == 193);
  CHECK_THROWS_AS(split_counts(3, {0.6, 0.2, 0.2}), ConfigError);
  CHECK_THROWS_AS(split_counts(100, {0.6, 0.2, 0.3}), ConfigError);

  const auto market = test::random_market(4, 80, 11);
  auto raw = build(market);
  REQUIRE(raw.size() == 35);
  const auto split = split_chronological(raw, {0.6, 0.2, 0.2}, kBasicPriceDims);
  CHECK(split.train.size() == 21);
  CHECK(split.validation.size() == 7);
  CHECK(split.test.size() == 7);
  CHECK(split.train.back().prediction_date < split.validation.front().prediction_date);
  CHECK(split.validation.back().prediction_date < split.test.front().prediction_date);

  SUBCASE("statistics come from the training days only") {
    const auto refit = fit_normalization(std::span(raw).first(21), kBasicPriceDims);
    CHECK(refit.mean == split.normalization.mean);
    CHECK(refit.stddev == split.normalization.stddev);
    const auto all = fit_normalization(raw, kBasicPriceDims);
    CHECK(all.mean != split.normalization.mean);
  }
  SUBCASE("normalized training features have zero mean and unit deviation") {
    const auto post = fit_normalization(split.train, kBasicPriceDims);
    for (std::size_t c = 0; c < kBasicPriceDims; ++c) {
      CHECK(std::abs(post.mean[c]) < 1e-9);
      CHECK(post.stddev[c] == doctest::Approx(1.0).epsilon(1e-9));
    }
    // Ratio columns untouched.
    CHECK(split.train[0].stocks[0].features[5] == raw[0].stocks[0].features[5]);
  }
  SUBCASE("unsorted input is rejected") {
    std::swap(raw[0], raw[1]);
    CHECK_THROWS_AS(split_chronological(raw, {0.6, 0.2, 0.2}, kBasicPriceDims), DataError);
  }
}

TEST_CASE("instance cache") {
  const auto market = test::random_market(5, 70, 21);
  InstanceCache cache;
  cache.catalog = test::round_robin_sectors(market, 2);
  cache.prices = market;
  cache.instances = build_instances(market, cache.catalog, cache.options);
  const auto bytes = serialize_cache(cache);
  CHECK(bytes == serialize_cache(cache));

  const auto back = deserialize_cache(bytes);
  CHECK(serialize_cache(back) == bytes);
  CHECK(back.instances.size() == cache.instances.size());
  CHECK(back.catalog.pairs() == cache.catalog.pairs());

  auto rebuilt = build_instances(market, cache.catalog, cache.options);
  cache.instances = rebuilt;
  CHECK(serialize_cache(cache) == bytes);

  auto corrupt = bytes;
  corrupt[corrupt.size() / 2] ^= 0x40;
  CHECK_THROWS_AS(deserialize_cache(corrupt), CheckpointError);
  auto truncated = std::vector<char>(bytes.begin(), bytes.begin() + 20);
  CHECK_THROWS_AS(deserialize_cache(truncated), CheckpointError);
}

TEST_CASE("synthetic market") {
  const auto a = generate_synthetic_market({});
  const auto b = generate_synthetic_market({});
  REQUIRE(a.prices.size() == 12);
  CHECK(a.catalog.sectors().size() == 3);
  for (const auto& [stock, bars] : a.prices) {
    CHECK(bars.size() == 200);
    for (std::size_t i = 0; i < bars.size(); ++i) {
      CHECK(bars[i].close == b.prices.at(stock)[i].close);
      CHECK(bars[i].date.weekday() < 5);
    }
  }
  SynthOptions other;
  other.seed = 8;
  CHECK(generate_synthetic_market(other).prices.at("S00")[10].close != a.prices.at("S00")[10].close);
  const auto instances = build_instances(a.prices, a.catalog, InstanceOptions{});
  CHECK(instances.size() == 200 - 45);
}
