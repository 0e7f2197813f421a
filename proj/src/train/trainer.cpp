#include "fingat/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <unordered_map>

#include "fingat/ad/tape.hpp"
#include "fingat/errors.hpp"
#include "fingat/eval/evaluate.hpp"
#include "fingat/nn/checkpoint.hpp"
#include "fingat/train/adam.hpp"
#include "fingat/train/loss.hpp"
#include "spdlog/spdlog.h"

namespace fingat::train {

using nlohmann::json;

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
  if (!(delta >= 0.0 && delta <= 1.0)) throw ConfigError("delta must lie in [0, 1]");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be non-negative");
  if (max_epochs == 0) throw ConfigError("max_epochs must be at least 1");
  if (patience == 0) throw ConfigError("patience must be at least 1");
  if (ks.empty()) throw ConfigError("ks must not be empty");
  for (std::size_t k : ks)
    if (k == 0) throw ConfigError("every K must be at least 1");
  if (std::find(ks.begin(), ks.end(), select_k) == ks.end()) {
    throw ConfigError("select_k " + std::to_string(select_k) + " must be one of ks");
  }
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"learning_rate", c.learning_rate},
           {"batch_size", c.batch_size},
           {"delta", c.delta},
           {"lambda", c.lambda},
           {"max_epochs", c.max_epochs},
           {"patience", c.patience},
           {"seed", c.seed},
           {"ks", c.ks},
           {"select_k", c.select_k},
           {"parallel", c.parallel},
           {"run_dir", c.run_dir.string()},
           {"keep_epoch_checkpoints", c.keep_epoch_checkpoints}};
}

void from_json(const json& j, TrainConfig& c) {
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.delta = j.value("delta", c.delta);
  c.lambda = j.value("lambda", c.lambda);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.patience = j.value("patience", c.patience);
  c.seed = j.value("seed", c.seed);
  c.ks = j.value("ks", c.ks);
  c.select_k = j.value("select_k", c.select_k);
  c.parallel = j.value("parallel", c.parallel);
  c.run_dir = j.value("run_dir", c.run_dir.string());
  c.keep_epoch_checkpoints = j.value("keep_epoch_checkpoints", c.keep_epoch_checkpoints);
}

json to_json(const TrainReport& r) {
  json epochs = json::array();
  for (const auto& e : r.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"rank", e.rank},
                      {"move", e.move},
                      {"l2", e.l2},
                      {"total", e.total},
                      {"improved", e.improved},
                      {"validation", eval::to_json(e.validation)}});
  }
  return json{{"model", r.model},
              {"train", r.config},
              {"delta_effective", r.delta_effective},
              {"loss_averaging", "sum"},
              {"rank_pairs", "ordered"},
              {"parameter_count", r.parameter_count},
              {"select_metric", "mrr@" + std::to_string(r.config.select_k)},
              {"best_epoch", r.best_epoch},
              {"best_score", r.best_score},
              {"best_checkpoint", r.best_checkpoint.string()},
              {"stopped_early", r.stopped_early},
              {"epochs", epochs}};
}

json checkpoint_meta(const model::ModelConfig& config, const data::Normalization& norm, std::size_t epoch) {
  return json{{"model", config},
              {"normalization", {{"mean", norm.mean}, {"stddev", norm.stddev}}},
              {"epoch", epoch}};
}

data::Normalization normalization_from_meta(const json& meta) {
  data::Normalization n;
  if (!meta.contains("normalization")) throw CheckpointError("checkpoint meta has no normalization");
  try {
    n.mean = meta.at("normalization").at("mean").get<std::vector<double>>();
    n.stddev = meta.at("normalization").at("stddev").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint normalization: ") + e.what());
  }
  if (n.mean.size() != n.stddev.size()) throw CheckpointError("checkpoint normalization sizes differ");
  return n;
}

BatchLoss batch_gradient(model::ModelState& state, const nn::ParamList& params,
                         std::span<const data::InstanceWindow* const> days, const data::SectorCatalog& catalog,
                         double delta, bool parallel) {
  std::unordered_map<const ad::Tensor*, std::size_t> index;
  for (std::size_t k = 0; k < params.size(); ++k) index.emplace(params[k].tensor, k);
  // The tape only differentiates through parameters flagged here.
  for (const auto& p : params) p.tensor->set_requires_grad(true);

  struct DayResult {
    double rank = 0.0;
    double move = 0.0;
    std::vector<std::vector<double>> grads;
    std::exception_ptr error;
  };
  std::vector<DayResult> results(days.size());
  const model::ModelState& frozen = state;
  const auto n = static_cast<std::ptrdiff_t>(days.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::ptrdiff_t d = 0; d < n; ++d) {
    auto& res = results[static_cast<std::size_t>(d)];
    try {
      const auto& inst = *days[static_cast<std::size_t>(d)];
      ad::Tape tape;
      const auto graph = model::forward_graph(tape, frozen, inst, catalog, false);
      const auto obj = day_objective(graph, inst, frozen.config.variant);
      res.rank = obj.rank.value().item();
      res.move = obj.move.valid() ? obj.move.value().item() : 0.0;
      tape.compute_adjoints(weighted(obj, delta));
      res.grads.resize(params.size());
      tape.for_each_parameter_grad([&](const ad::Tensor& p, std::span<const double> g) {
        auto it = index.find(&p);
        if (it == index.end()) return;
        auto& buf = res.grads[it->second];
        if (buf.empty()) buf.assign(g.size(), 0.0);
        for (std::size_t i = 0; i < g.size(); ++i) buf[i] += g[i];
      });
    } catch (...) {
      res.error = std::current_exception();
    }
  }

  for (const auto& p : params) p.tensor->zero_grad();
  BatchLoss total;
  for (std::size_t d = 0; d < results.size(); ++d) {
    auto& res = results[d];
    if (res.error) std::rethrow_exception(res.error);
    total.rank += res.rank;
    total.move += res.move;
    for (std::size_t k = 0; k < params.size(); ++k) {
      if (res.grads[k].empty()) continue;
      auto g = params[k].tensor->grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += res.grads[k][i];
    }
  }
  return total;
}

namespace {

bool all_finite_grads(const nn::ParamList& params, std::string* which) {
  for (const auto& p : params) {
    for (double g : std::as_const(*p.tensor).grad()) {
      if (!std::isfinite(g)) {
        *which = p.name;
        return false;
      }
    }
  }
  return true;
}

void save(const std::filesystem::path& path, model::ModelState& state, const data::Normalization& norm,
          std::size_t epoch) {
  nn::write_checkpoint(path, state.checkpoint_entries(), checkpoint_meta(state.config, norm, epoch));
}

}  // namespace

TrainReport train(const data::DatasetSplit& split, const data::SectorCatalog& catalog,
                  const model::ModelConfig& model_config, const TrainConfig& config, model::ModelState* best,
                  const EpochCallback& on_epoch) {
  config.validate();
  model_config.validate();
  if (split.train.empty()) throw ConfigError("train: no training days");
  if (split.validation.empty()) throw ConfigError("train: no validation days");
  const auto started = std::chrono::steady_clock::now();

  auto state = model::ModelState::init(model_config);
  const auto params = state.parameters();
  for (const auto& p : params) p.tensor->set_requires_grad(true);
  Adam adam({config.learning_rate});
  nn::Rng rng(config.seed);
  std::vector<std::size_t> order(split.train.size());
  std::iota(order.begin(), order.end(), 0);
  const double delta = effective_delta(model_config.variant, config.delta);

  TrainReport report;
  report.model = model_config;
  report.config = config;
  report.delta_effective = delta;
  report.parameter_count = state.parameter_count();
  if (!config.run_dir.empty()) std::filesystem::create_directories(config.run_dir);

  model::ModelState best_state = state;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochRecord rec;
    rec.epoch = epoch;
    const std::size_t batches = (order.size() + config.batch_size - 1) / config.batch_size;
    for (std::size_t b = 0; b < batches; ++b) {
      const std::string where = "epoch " + std::to_string(epoch) + " batch " + std::to_string(b + 1);
      std::vector<const data::InstanceWindow*> days;
      for (std::size_t i = b * config.batch_size; i < std::min(order.size(), (b + 1) * config.batch_size); ++i) {
        days.push_back(&split.train[order[i]]);
      }
      BatchLoss bl;
      try {
        bl = batch_gradient(state, params, days, catalog, delta, config.parallel);
      } catch (const NumericError& e) {
        throw TrainingError(where + ": " + e.what());
      } catch (const DomainError& e) {
        throw TrainingError(where + ": " + e.what());
      }
      const double l2 = l2_penalty(params);
      const double total = total_loss(bl.rank, bl.move, l2, delta, config.lambda);
      if (!std::isfinite(total)) throw TrainingError(where + ": loss is not finite");
      for (const auto& p : params) {
        if (!p.decay) continue;
        auto g = p.tensor->grad();
        const auto x = std::as_const(*p.tensor).data();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += 2.0 * config.lambda * x[i];
      }
      std::string bad;
      if (!all_finite_grads(params, &bad)) throw TrainingError(where + ": gradient of " + bad + " is not finite");
      adam.step(params);
      rec.rank += bl.rank;
      rec.move += bl.move;
      rec.l2 += l2;
      rec.total += total;
    }

    try {
      rec.validation = eval::evaluate(state, split.validation, catalog, config.ks, nullptr, config.parallel);
    } catch (const NumericError& e) {
      throw TrainingError("epoch " + std::to_string(epoch) + " validation: " + e.what());
    }
    const double score = rec.validation.by_k.at(config.select_k).mrr;
    rec.improved = report.best_epoch == 0 || score > report.best_score;
    if (rec.improved) {
      report.best_epoch = epoch;
      report.best_score = score;
      best_state = state;
    }
    if (!config.run_dir.empty()) {
      if (config.keep_epoch_checkpoints) {
        save(config.run_dir / ("epoch_" + std::to_string(epoch) + ".ckpt"), state, split.normalization, epoch);
      }
      if (rec.improved) {
        report.best_checkpoint = config.run_dir / "best.ckpt";
        save(report.best_checkpoint, state, split.normalization, epoch);
      }
    }
    spdlog::debug("epoch {} loss {:.6g} (rank {:.6g}, move {:.6g}, l2 {:.6g}) val mrr@{} {:.4f}{}", epoch, rec.total,
                  rec.rank, rec.move, rec.l2, config.select_k, score, rec.improved ? " *" : "");
    report.epochs.push_back(rec);
    if (on_epoch && !on_epoch(report.epochs.back())) break;
    if (epoch - report.best_epoch >= config.patience) {
      report.stopped_early = epoch < config.max_epochs;
      break;
    }
  }
  if (best) *best = std::move(best_state);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

}  // namespace fingat::train
