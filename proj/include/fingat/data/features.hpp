#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fingat/data/market.hpp"

namespace fingat::data {

inline constexpr std::array<std::size_t, 6> kMovingAverageWindows{5, 10, 15, 20, 25, 30};
// Prior adjusted closes a day needs before it is eligible as a feature day.
inline constexpr std::size_t kMinHistory = 30;
// open, high, low, close, adj_close
inline constexpr std::size_t kBasicPriceDims = 5;

enum class FeatureSet {
  full,         // 5 basic prices + return ratio + 3 price ratios + 6 moving averages
  ratios_only,  // the 10 scale-free features only
};

std::string to_string(FeatureSet set);
FeatureSet feature_set_from_string(const std::string& name);
std::size_t feature_dim(FeatureSet set);

struct FeatureOptions {
  FeatureSet set = FeatureSet::full;
  // Divide the moving average by (adjclose - 1) as the formula is printed,
  // instead of the ratio form MA / adjclose - 1.
  bool ma_literal = false;
};

// (p_cur - p_prev) / p_prev
double return_ratio(double p_prev, double p_cur);

// mu / close - 1 for mu in {open, high, low}
std::array<double, 3> price_ratio_features(const PriceBar& bar);

// Moving-average feature over the last `window` values of adj_history, whose
// final element is the current day.
double moving_average_feature(std::span<const double> adj_history, std::size_t window, bool literal = false);

// All six moving-average features. Needs at least 30 closes ending at the
// current day; throws EligibilityError otherwise.
std::array<double, 6> moving_average_features(std::span<const double> adj_history, bool literal = false);

// Feature vector of bars[index] from the stock's own history. Requires
// index >= kMinHistory (EligibilityError otherwise).
std::vector<double> day_features(std::span<const PriceBar> bars, std::size_t index, const FeatureOptions& options);

}  // namespace fingat::data
