#include "fingat/data/features.hpp"

#include "fingat/errors.hpp"

namespace fingat::data {

std::string to_string(FeatureSet set) { return set == FeatureSet::full ? "full" : "ratios_only"; }

FeatureSet feature_set_from_string(const std::string& name) {
  if (name == "full") return FeatureSet::full;
  if (name == "ratios_only") return FeatureSet::ratios_only;
  throw ConfigError("unknown feature set '" + name + "' (expected full|ratios_only)");
}

std::size_t feature_dim(FeatureSet set) { return set == FeatureSet::full ? 15 : 10; }

double return_ratio(double p_prev, double p_cur) {
  if (!(p_prev > 0.0)) throw DomainError("return ratio needs a positive previous price, got " + std::to_string(p_prev));
  return (p_cur - p_prev) / p_prev;
}

std::array<double, 3> price_ratio_features(const PriceBar& bar) {
  if (!(bar.close > 0.0)) throw DomainError("price ratio features need close > 0");
  return {bar.open / bar.close - 1.0, bar.high / bar.close - 1.0, bar.low / bar.close - 1.0};
}

double moving_average_feature(std::span<const double> adj_history, std::size_t window, bool literal) {
  if (window == 0 || adj_history.size() < window) {
    throw EligibilityError("moving average over " + std::to_string(window) + " days needs that many closes, have " +
                           std::to_string(adj_history.size()));
  }
  double total = 0.0;
  for (std::size_t i = adj_history.size() - window; i < adj_history.size(); ++i) total += adj_history[i];
  const double mean = total / static_cast<double>(window);
  const double current = adj_history.back();
  if (literal) {
    if (current == 1.0) throw DomainError("literal moving-average form divides by adjclose - 1 = 0");
    return mean / (current - 1.0);
  }
  return mean / current - 1.0;
}

std::array<double, 6> moving_average_features(std::span<const double> adj_history, bool literal) {
  if (adj_history.size() < kMinHistory) {
    throw EligibilityError("moving-average features need " + std::to_string(kMinHistory) + " closes, have " +
                           std::to_string(adj_history.size()));
  }
  std::array<double, 6> out{};
  for (std::size_t k = 0; k < kMovingAverageWindows.size(); ++k) {
    out[k] = moving_average_feature(adj_history, kMovingAverageWindows[k], literal);
  }
  return out;
}

std::vector<double> day_features(std::span<const PriceBar> bars, std::size_t index, const FeatureOptions& options) {
  if (index < kMinHistory || index >= bars.size()) {
    throw EligibilityError("day " + std::to_string(index) + " has fewer than " + std::to_string(kMinHistory) +
                           " prior closes");
  }
  const PriceBar& bar = bars[index];
  std::vector<double> f;
  f.reserve(feature_dim(options.set));
  if (options.set == FeatureSet::full) {
    f.insert(f.end(), {bar.open, bar.high, bar.low, bar.close, bar.adj_close});
  }
  f.push_back(return_ratio(bars[index - 1].adj_close, bar.adj_close));
  for (double v : price_ratio_features(bar)) f.push_back(v);
  std::vector<double> history;
  history.reserve(kMinHistory);
  for (std::size_t i = index + 1 - kMinHistory; i <= index; ++i) history.push_back(bars[i].adj_close);
  for (double v : moving_average_features(history, options.ma_literal)) f.push_back(v);
  return f;
}

}  // namespace fingat::data
