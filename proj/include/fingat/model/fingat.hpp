#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fingat/data/instances.hpp"
#include "fingat/data/market.hpp"
#include "fingat/nn/attention.hpp"
#include "fingat/nn/checkpoint.hpp"
#include "fingat/nn/dense.hpp"
#include "fingat/nn/gat.hpp"
#include "fingat/nn/gru.hpp"
#include "json.hpp"

namespace fingat::model {

// full:      fuse [tau_G || tau_A || tau_pi]
// nt:        one complete graph over all stocks instead of sectors; fuse [tau_G || tau_A]
// no_intra:  no intra-sector GAT; sectors pool tau_A; fuse [tau_A || tau_pi]
// no_inter:  no sector pooling or inter-sector GAT; fuse [tau_G || tau_A]
// no_mtl:    no movement head; trained on the ranking loss alone
// mse:       second head regresses the return and is trained with squared error
enum class Variant { full, nt, no_intra, no_inter, no_mtl, mse };

std::string to_string(Variant v);
// Throws ConfigError on an unknown name.
Variant variant_from_string(const std::string& name);
const std::vector<Variant>& all_variants();

struct ModelConfig {
  std::size_t hidden = 16;
  std::size_t weeks = 3;
  std::size_t days_per_week = 5;
  std::size_t feature_dim = 15;
  Variant variant = Variant::full;
  std::uint64_t seed = 1;

  bool uses_stock_graph() const { return variant != Variant::no_intra; }
  bool uses_sectors() const { return variant != Variant::nt && variant != Variant::no_inter; }
  bool has_move_head() const { return variant != Variant::no_mtl; }
  std::size_t fusion_inputs() const;
  // Throws ConfigError on zero sizes.
  void validate() const;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

struct ModelState {
  ModelConfig config;
  nn::GruParams week_gru;
  nn::TemporalAttentionParams week_att;
  // Intra-sector GAT shared by all sectors; the all-stock GAT under nt.
  std::optional<nn::GatParams> stock_gat;
  nn::GruParams long_a_gru;
  nn::TemporalAttentionParams long_a_att;
  std::optional<nn::GruParams> long_g_gru;
  std::optional<nn::TemporalAttentionParams> long_g_att;
  std::optional<nn::GatParams> sector_gat;
  ad::Tensor fusion;  // [fusion_inputs * hidden x hidden], no bias
  nn::DenseParams head_return;
  std::optional<nn::DenseParams> head_move;

  static ModelState init(const ModelConfig& config);

  // Every trainable tensor for the configured variant, in a fixed order.
  nn::ParamList parameters();
  std::size_t parameter_count();

  nn::TensorEntries checkpoint_entries();
  // Rebuilds a state from a checkpoint whose meta carries "model"; every
  // tensor must be present with the expected shape.
  static ModelState from_checkpoint(const nn::Checkpoint& ck);
};

// Attention weights captured during one forward pass. Matrices are
// row-major; labels name the rows/columns.
struct AttentionCapture {
  std::string level;    // temporal | intra | inter
  std::string context;  // e.g. "S01/week2", "SEC00/week1", "sectors"
  std::vector<std::string> from;
  std::vector<std::string> to;
  std::vector<double> weights;  // from.size() x to.size()
};

struct PredictionBatch {
  data::Date prediction_date;
  std::vector<std::string> stock_ids;
  std::vector<std::string> sectors;  // sector of each stock; empty under nt
  std::vector<double> pred_return;
  // Probability of an up move. Under no_mtl and mse it is sigmoid of the
  // return-scale output, so thresholding at 0.5 means "predicted return > 0".
  std::vector<double> pred_move;
  std::vector<AttentionCapture> attention;
};

// Tape-level outputs for training.
struct ForwardGraph {
  ad::Var pred_return;  // [n x 1]
  // [n x 1] logits under full/nt/no_intra/no_inter; the regression output
  // under mse; invalid under no_mtl.
  ad::Var move_head;
  std::vector<std::string> stock_ids;
  std::vector<std::string> sectors;
  std::vector<AttentionCapture> attention;
};

// Builds the whole forward pass on `tape`. Throws DataError for a stock
// missing from the catalog (unless nt), ShapeError for an instance whose
// window does not match the config, and NumericError naming the first layer
// whose output is not finite. Attention is captured only when requested.
ForwardGraph forward_graph(ad::Tape& tape, const ModelState& state, const data::InstanceWindow& instance,
                           const data::SectorCatalog& catalog, bool capture = false);

// Attention is captured unless `capture` is false.
PredictionBatch forward(const ModelState& state, const data::InstanceWindow& instance,
                        const data::SectorCatalog& catalog, bool capture = true);
// For variant nt; needs no catalog.
PredictionBatch forward_nt(const ModelState& state, const data::InstanceWindow& instance, bool capture = true);

}  // namespace fingat::model
