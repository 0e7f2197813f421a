#pragma once

#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "fingat/data/market.hpp"

namespace fingat::test {

inline std::string stock_name(std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "S%02zu", i);
  return buf;
}

// Random-walk bars on consecutive business days starting 2021-01-04.
inline std::vector<data::PriceBar> random_walk(const std::string& stock, std::size_t days, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.02);
  std::vector<data::PriceBar> bars;
  double p = 50.0 + static_cast<double>(seed % 17);
  data::Date d = data::Date::from_ymd(2021, 1, 4);
  for (std::size_t i = 0; i < days; ++i) {
    data::PriceBar b;
    b.stock_id = stock;
    b.date = d;
    b.open = p * (1.0 + 0.5 * g(rng));
    b.close = p * (1.0 + g(rng));
    b.adj_close = b.close * 0.98;
    b.high = std::max(b.open, b.close) * 1.01;
    b.low = std::min(b.open, b.close) * 0.99;
    b.volume = 1000.0 + static_cast<double>(i);
    bars.push_back(b);
    p = b.close;
    d = d.next_business_day();
  }
  return bars;
}

inline data::PriceTable random_market(std::size_t stocks, std::size_t days, std::uint64_t seed = 1) {
  data::PriceTable t;
  for (std::size_t s = 0; s < stocks; ++s) t[stock_name(s)] = random_walk(stock_name(s), days, seed * 1000 + s);
  return t;
}

inline data::SectorCatalog round_robin_sectors(const data::PriceTable& t, std::size_t sectors) {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::size_t i = 0;
  for (const auto& [stock, bars] : t) pairs.emplace_back(stock, "SEC" + std::to_string(i++ % sectors));
  return data::SectorCatalog::from_pairs(pairs);
}

}  // namespace fingat::test

#include "fingat/data/cache.hpp"
#include "fingat/data/instances.hpp"
#include "fingat/data/synth.hpp"

namespace fingat::test {

// Instance with uniform(-1, 1) features for the given stock ids.
inline data::InstanceWindow random_instance(std::mt19937_64& rng, const std::vector<std::string>& ids, std::size_t weeks,
                                            std::size_t days, std::size_t dim) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  data::InstanceWindow w;
  w.prediction_date = data::Date::from_ymd(2022, 3, 1);
  w.weeks = weeks;
  w.days_per_week = days;
  w.feature_dim = dim;
  for (const auto& id : ids) {
    data::StockWindow s;
    s.stock_id = id;
    s.features.resize(weeks * days * dim);
    for (auto& v : s.features) v = u(rng);
    s.target_return = 0.05 * u(rng);
    s.target_move = data::movement_label(s.target_return);
    w.stocks.push_back(std::move(s));
  }
  return w;
}

inline std::vector<std::string> stock_names(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(stock_name(i));
  return ids;
}

// Stock i goes to sector "SEC<i % sectors>".
inline data::SectorCatalog modulo_sectors(std::size_t n, std::size_t sectors) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 0; i < n; ++i) pairs.emplace_back(stock_name(i), "SEC" + std::to_string(i % sectors));
  return data::SectorCatalog::from_pairs(pairs);
}

// The seeded momentum market (12 stocks, 3 sectors) windowed into instances.
inline data::InstanceCache synthetic_cache(std::size_t weeks_of_data = 40, std::uint64_t seed = 7,
                                           std::size_t window_weeks = 3) {
  data::SynthOptions so;
  so.weeks = weeks_of_data;
  so.seed = seed;
  auto market = data::generate_synthetic_market(so);
  data::InstanceCache cache;
  cache.options.weeks = window_weeks;
  cache.catalog = market.catalog;
  cache.prices = std::move(market.prices);
  cache.instances = data::build_instances(cache.prices, cache.catalog, cache.options);
  return cache;
}

}  // namespace fingat::test
