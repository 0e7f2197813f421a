#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fingat/data/split.hpp"
#include "fingat/eval/metrics.hpp"
#include "fingat/model/fingat.hpp"
#include "json.hpp"

namespace fingat::train {

struct TrainConfig {
  double learning_rate = 0.001;
  std::size_t batch_size = 128;  // prediction days per optimizer step
  double delta = 0.01;
  double lambda = 1e-4;
  std::size_t max_epochs = 500;
  std::size_t patience = 20;
  std::uint64_t seed = 1;  // day shuffling
  std::vector<std::size_t> ks{1, 5, 10};
  std::size_t select_k = 5;  // best checkpoint by validation MRR at this K
  bool parallel = true;
  // Checkpoints go to <run_dir>/epoch_<n>.ckpt and <run_dir>/best.ckpt;
  // nothing is written when empty.
  std::filesystem::path run_dir;
  bool keep_epoch_checkpoints = true;

  // Throws ConfigError on a violated invariant.
  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

// Loss components summed over every training day of the epoch; the L2 term
// is summed over optimizer steps, evaluated at the parameters each step saw.
struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double rank = 0.0;
  double move = 0.0;
  double l2 = 0.0;
  double total = 0.0;
  eval::EvalReport validation;
  bool improved = false;
};

struct TrainReport {
  model::ModelConfig model;
  TrainConfig config;
  double delta_effective = 0.0;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_score = 0.0;  // validation MRR@select_k
  std::filesystem::path best_checkpoint;
  bool stopped_early = false;
  std::size_t parameter_count = 0;
  // Wall-clock is kept out of the JSON so reports stay byte-identical.
  double wall_seconds = 0.0;
};

nlohmann::json to_json(const TrainReport& r);

// Called after each epoch; return false to stop.
using EpochCallback = std::function<bool(const EpochRecord&)>;

// Trains on split.train, selects by validation MRR@select_k with early
// stopping after `patience` epochs without improvement. The model returned
// through `best` holds the selected parameters. Throws TrainingError with
// the epoch and batch when a loss or gradient turns non-finite.
TrainReport train(const data::DatasetSplit& split, const data::SectorCatalog& catalog,
                  const model::ModelConfig& model_config, const TrainConfig& config,
                  model::ModelState* best = nullptr, const EpochCallback& on_epoch = {});

// Sum over days of the weighted objective's gradient for one batch, written
// into the parameters' grad buffers (which are zeroed first). Returns the
// summed rank and move terms. The parallel path evaluates days on separate
// tapes and adds them in day order, so it matches the serial path bit for bit.
struct BatchLoss {
  double rank = 0.0;
  double move = 0.0;
};
BatchLoss batch_gradient(model::ModelState& state, const nn::ParamList& params,
                         std::span<const data::InstanceWindow* const> days, const data::SectorCatalog& catalog,
                         double delta, bool parallel);

// Checkpoint meta for a model trained on data with the given normalization.
nlohmann::json checkpoint_meta(const model::ModelConfig& config, const data::Normalization& norm, std::size_t epoch);
data::Normalization normalization_from_meta(const nlohmann::json& meta);

}  // namespace fingat::train
