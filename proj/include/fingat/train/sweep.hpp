#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "fingat/data/cache.hpp"
#include "fingat/data/split.hpp"
#include "fingat/eval/metrics.hpp"
#include "fingat/train/trainer.hpp"

namespace fingat::train {

inline constexpr std::array<double, 3> kDefaultSplit{0.6, 0.2, 0.2};

// Chronological split of the cached instances. A `weeks` different from the
// cached window rebuilds the instances from the cached bars first. The raw
// price block is z-scored with training statistics.
data::DatasetSplit make_split(const data::InstanceCache& cache, std::size_t weeks,
                              const std::array<double, 3>& ratios = kDefaultSplit);

struct SweepGrid {
  std::vector<std::size_t> weeks;
  std::vector<std::size_t> hidden;
  std::vector<double> delta;

  std::size_t cells() const { return weeks.size() * hidden.size() * delta.size(); }
};

struct SweepRow {
  std::size_t weeks = 0;
  std::size_t hidden = 0;
  double delta = 0.0;
  std::size_t best_epoch = 0;
  double final_loss = 0.0;
  eval::EvalReport validation;  // at the best epoch
  eval::EvalReport test;        // of the selected model
};

// One train + evaluate run per cell, weeks outermost then hidden then delta.
// Every other setting comes from the base configs; run_dir is ignored.
std::vector<SweepRow> sweep(const data::InstanceCache& cache, const model::ModelConfig& base_model,
                            const TrainConfig& base_train, const SweepGrid& grid,
                            const std::array<double, 3>& ratios = kDefaultSplit);

nlohmann::json to_json(const std::vector<SweepRow>& rows);
// weeks,hidden,delta,best_epoch,final_loss,then val/test mrr@K and precision@K per K, then acc
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace fingat::train
