#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fingat/data/features.hpp"
#include "fingat/data/market.hpp"

namespace fingat::data {

struct InstanceOptions {
  std::size_t weeks = 3;
  std::size_t days_per_week = 5;
  FeatureOptions features;
  // A date joins the common calendar when at least this share of stocks traded.
  double calendar_coverage = 0.9;

  std::size_t window_days() const { return weeks * days_per_week; }
};

// One stock's slice of an instance: window_days rows of feature_dim values,
// oldest day first, plus the next-day targets.
struct StockWindow {
  std::string stock_id;
  std::vector<double> features;
  double target_return = 0.0;
  int target_move = 0;
};

struct InstanceWindow {
  Date prediction_date;
  std::size_t weeks = 0;
  std::size_t days_per_week = 0;
  std::size_t feature_dim = 0;
  std::vector<StockWindow> stocks;  // ascending stock_id

  std::size_t window_days() const { return weeks * days_per_week; }
  std::vector<std::string> stock_ids() const;
  std::vector<double> target_returns() const;
  std::vector<double> target_moves() const;
};

struct Exclusion {
  Date prediction_date;
  std::string stock_id;
  Date missing_date;
};

struct BuildLog {
  std::vector<Date> calendar;
  std::vector<Exclusion> exclusions;
  std::size_t ineligible_windows = 0;
};

// Movement label: 1 iff the return is strictly positive.
inline int movement_label(double r) { return r > 0.0 ? 1 : 0; }

// Common trading calendar: sorted dates on which at least `coverage` of the
// stocks traded.
std::vector<Date> common_calendar(const PriceTable& prices, double coverage);

// One instance per calendar position with stride 1. A stock joins an
// instance when it has bars on all window_days()+1 dates and every feature
// day has the 30-close history; gaps are recorded in the log.
std::vector<InstanceWindow> build_instances(const PriceTable& prices, const SectorCatalog& catalog,
                                            const InstanceOptions& options, BuildLog* log = nullptr);

}  // namespace fingat::data
