#include "fingat/data/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <numeric>
#include <random>

#include "fingat/errors.hpp"

namespace fingat::data {

namespace {
std::string numbered(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%02zu", prefix, i);
  return buf;
}
}  // namespace

SyntheticMarket generate_synthetic_market(const SynthOptions& options) {
  if (options.stocks == 0 || options.sectors == 0 || options.sectors > options.stocks) {
    throw ConfigError("synthetic market needs 1 <= sectors <= stocks");
  }
  const std::size_t days = options.weeks * options.days_per_week;
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  std::vector<Date> dates;
  Date d = options.start;
  while (d.weekday() >= 5) d = d.next_business_day();
  for (std::size_t i = 0; i < days; ++i) {
    dates.push_back(d);
    d = d.next_business_day();
  }

  std::vector<std::pair<std::string, std::string>> pairs;
  std::vector<double> price(options.stocks), drift(options.stocks);
  std::vector<std::deque<double>> recent(options.stocks);
  for (std::size_t s = 0; s < options.stocks; ++s) {
    pairs.emplace_back(numbered("S", s), numbered("SEC", s % options.sectors));
    price[s] = 20.0 + 80.0 * uniform(rng);
    drift[s] = 0.002 * (2.0 * uniform(rng) - 1.0);
  }
  std::vector<double> factor(options.sectors, 0.0);

  SyntheticMarket market;
  market.catalog = SectorCatalog::from_pairs(pairs);
  for (std::size_t t = 0; t < days; ++t) {
    for (auto& f : factor) f = 0.6 * f + 0.01 * gauss(rng);
    for (std::size_t s = 0; s < options.stocks; ++s) {
      const auto& past = recent[s];
      const double trend =
          past.empty() ? 0.0 : std::accumulate(past.begin(), past.end(), 0.0) / static_cast<double>(past.size());
      double r = options.momentum * trend + options.sector_loading * factor[s % options.sectors] + drift[s] +
                 options.noise * gauss(rng);
      r = std::clamp(r, -0.2, 0.2);
      const double prev = price[s];
      const double close = prev * (1.0 + r);
      PriceBar bar;
      bar.stock_id = pairs[s].first;
      bar.date = dates[t];
      bar.open = prev * (1.0 + 0.003 * gauss(rng));
      bar.close = close;
      bar.adj_close = close;
      bar.high = std::max(bar.open, close) * (1.0 + 0.005 * std::abs(gauss(rng)));
      bar.low = std::min(bar.open, close) * (1.0 - 0.005 * std::abs(gauss(rng)));
      bar.volume = std::floor(1e5 + 9e5 * uniform(rng));
      validate_bar(bar);
      market.prices[bar.stock_id].push_back(bar);
      price[s] = close;
      recent[s].push_back(r);
      if (recent[s].size() > options.days_per_week) recent[s].pop_front();
    }
  }
  return market;
}

}  // namespace fingat::data
