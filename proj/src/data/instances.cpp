#include "fingat/data/instances.hpp"

#include <algorithm>
#include <map>
#include <optional>

#include <spdlog/spdlog.h>

#include "fingat/errors.hpp"

namespace fingat::data {

std::vector<std::string> InstanceWindow::stock_ids() const {
  std::vector<std::string> ids;
  for (const auto& s : stocks) ids.push_back(s.stock_id);
  return ids;
}

std::vector<double> InstanceWindow::target_returns() const {
  std::vector<double> out;
  for (const auto& s : stocks) out.push_back(s.target_return);
  return out;
}

std::vector<double> InstanceWindow::target_moves() const {
  std::vector<double> out;
  for (const auto& s : stocks) out.push_back(static_cast<double>(s.target_move));
  return out;
}

std::vector<Date> common_calendar(const PriceTable& prices, double coverage) {
  if (!(coverage > 0.0 && coverage <= 1.0)) throw ConfigError("calendar coverage must be in (0, 1]");
  std::map<Date, std::size_t> counts;
  for (const auto& [stock, bars] : prices) {
    for (const auto& b : bars) ++counts[b.date];
  }
  const double need = coverage * static_cast<double>(prices.size());
  std::vector<Date> calendar;
  for (const auto& [date, n] : counts) {
    if (static_cast<double>(n) + 1e-9 >= need) calendar.push_back(date);
  }
  return calendar;
}

namespace {

struct StockSeries {
  // Bars restricted to the common calendar.
  std::vector<PriceBar> bars;
  // Calendar position -> index into bars, or npos.
  std::vector<std::size_t> at_position;
};

constexpr std::size_t npos = static_cast<std::size_t>(-1);

}  // namespace

std::vector<InstanceWindow> build_instances(const PriceTable& prices, const SectorCatalog& catalog,
                                            const InstanceOptions& options, BuildLog* log) {
  if (options.weeks == 0 || options.days_per_week == 0) throw ConfigError("weeks and days_per_week must be >= 1");
  for (const auto& [stock, bars] : prices) {
    if (!catalog.contains(stock)) throw DataError("stock " + stock + " has prices but no sector");
  }
  const auto calendar = common_calendar(prices, options.calendar_coverage);
  const std::size_t window = options.window_days();
  const std::size_t dim = feature_dim(options.features.set);

  std::map<Date, std::size_t> position;
  for (std::size_t i = 0; i < calendar.size(); ++i) position[calendar[i]] = i;

  std::map<std::string, StockSeries> series;
  for (const auto& [stock, bars] : prices) {
    StockSeries s;
    s.at_position.assign(calendar.size(), npos);
    for (const auto& b : bars) {
      auto it = position.find(b.date);
      if (it == position.end()) continue;
      s.at_position[it->second] = s.bars.size();
      s.bars.push_back(b);
    }
    series.emplace(stock, std::move(s));
  }

  BuildLog local;
  BuildLog& out_log = log ? *log : local;
  out_log.calendar = calendar;

  std::vector<InstanceWindow> instances;
  for (std::size_t start = 0; start + window < calendar.size(); ++start) {
    InstanceWindow inst;
    inst.prediction_date = calendar[start + window];
    inst.weeks = options.weeks;
    inst.days_per_week = options.days_per_week;
    inst.feature_dim = dim;
    for (const auto& [stock, s] : series) {
      std::optional<Date> missing;
      for (std::size_t p = start; p <= start + window; ++p) {
        if (s.at_position[p] == npos) {
          missing = calendar[p];
          break;
        }
      }
      if (missing) {
        // A stock that never reached this part of the calendar is not a gap.
        const bool listed = !s.bars.empty() && s.bars.front().date <= calendar[start] &&
                            s.bars.back().date >= calendar[start + window];
        if (listed) {
          out_log.exclusions.push_back({inst.prediction_date, stock, *missing});
          spdlog::info("excluding {} from instance {}: no bar on {}", stock, inst.prediction_date.iso(),
                       missing->iso());
        }
        continue;
      }
      const std::size_t first = s.at_position[start];
      if (first < kMinHistory) {
        ++out_log.ineligible_windows;
        spdlog::debug("{} ineligible for instance {}: {} prior closes", stock, inst.prediction_date.iso(), first);
        continue;
      }
      StockWindow sw;
      sw.stock_id = stock;
      sw.features.reserve(window * dim);
      for (std::size_t d = 0; d < window; ++d) {
        const auto f = day_features(s.bars, first + d, options.features);
        sw.features.insert(sw.features.end(), f.begin(), f.end());
      }
      const std::size_t target = s.at_position[start + window];
      sw.target_return = return_ratio(s.bars[target - 1].adj_close, s.bars[target].adj_close);
      sw.target_move = movement_label(sw.target_return);
      inst.stocks.push_back(std::move(sw));
    }
    if (!inst.stocks.empty()) instances.push_back(std::move(inst));
  }
  return instances;
}

}  // namespace fingat::data
