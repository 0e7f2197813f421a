#include "fingat/train/sweep.hpp"

#include <cstdio>
#include <ostream>

#include "fingat/data/features.hpp"
#include "fingat/errors.hpp"
#include "fingat/eval/evaluate.hpp"

namespace fingat::train {

data::DatasetSplit make_split(const data::InstanceCache& cache, std::size_t weeks,
                              const std::array<double, 3>& ratios) {
  std::vector<data::InstanceWindow> instances;
  if (weeks == cache.options.weeks) {
    instances = cache.instances;
  } else {
    auto options = cache.options;
    options.weeks = weeks;
    instances = data::build_instances(cache.prices, cache.catalog, options);
  }
  const std::size_t dims = cache.options.features.set == data::FeatureSet::full ? data::kBasicPriceDims : 0;
  return data::split_chronological(std::move(instances), ratios, dims);
}

std::vector<SweepRow> sweep(const data::InstanceCache& cache, const model::ModelConfig& base_model,
                            const TrainConfig& base_train, const SweepGrid& grid,
                            const std::array<double, 3>& ratios) {
  if (grid.cells() == 0) throw ConfigError("sweep grid has no cells");
  std::vector<SweepRow> rows;
  for (std::size_t weeks : grid.weeks) {
    const auto split = make_split(cache, weeks, ratios);
    for (std::size_t hidden : grid.hidden) {
      for (double delta : grid.delta) {
        auto mc = base_model;
        mc.weeks = weeks;
        mc.hidden = hidden;
        auto tc = base_train;
        tc.delta = delta;
        tc.run_dir.clear();
        model::ModelState best;
        const auto report = train(split, cache.catalog, mc, tc, &best);
        SweepRow row;
        row.weeks = weeks;
        row.hidden = hidden;
        row.delta = delta;
        row.best_epoch = report.best_epoch;
        row.final_loss = report.epochs.back().total;
        row.validation = report.epochs[report.best_epoch - 1].validation;
        row.test = eval::evaluate(best, split.test, cache.catalog, tc.ks, nullptr, tc.parallel);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

nlohmann::json to_json(const std::vector<SweepRow>& rows) {
  auto out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"weeks", r.weeks},
                   {"hidden", r.hidden},
                   {"delta", r.delta},
                   {"best_epoch", r.best_epoch},
                   {"final_loss", r.final_loss},
                   {"validation", eval::to_json(r.validation)},
                   {"test", eval::to_json(r.test)}});
  }
  return out;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "weeks,hidden,delta,best_epoch,final_loss";
  if (!rows.empty()) {
    for (const char* part : {"val", "test"}) {
      for (const auto& [k, m] : rows.front().test.by_k) out << ',' << part << "_mrr@" << k << ',' << part << "_precision@" << k;
      out << ',' << part << "_acc";
    }
  }
  out << '\n';
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    out << r.weeks << ',' << r.hidden << ',' << num(r.delta) << ',' << r.best_epoch << ',' << num(r.final_loss);
    for (const auto* rep : {&r.validation, &r.test}) {
      for (const auto& [k, m] : rep->by_k) out << ',' << num(m.mrr) << ',' << num(m.precision);
      out << ',' << num(rep->acc);
    }
    out << '\n';
  }
}

}  // namespace fingat::train
