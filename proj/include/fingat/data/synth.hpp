#pragma once

#include <cstdint>

#include "fingat/data/market.hpp"

namespace fingat::data {

struct SynthOptions {
  std::size_t stocks = 12;
  std::size_t sectors = 3;
  std::size_t weeks = 40;
  std::size_t days_per_week = 5;
  std::uint64_t seed = 7;
  // Weight of the trailing-week mean return in the next return.
  double momentum = 0.6;
  // Weight of the sector factor.
  double sector_loading = 0.5;
  double noise = 0.01;
  Date start = Date::from_ymd(2019, 1, 2);
};

struct SyntheticMarket {
  PriceTable prices;
  SectorCatalog catalog;
};

// Seeded momentum market: each stock's daily return is
//   momentum * mean(last 5 returns) + sector_loading * f_sector + drift + noise * eps
// with an AR(1) sector factor. Bars land on consecutive business days;
// stock i belongs to sector i % sectors.
SyntheticMarket generate_synthetic_market(const SynthOptions& options);

}  // namespace fingat::data
