#include "fingat/train/loss.hpp"

#include <cmath>
#include <string>

#include "fingat/ad/ops.hpp"
#include "fingat/errors.hpp"

namespace fingat::train {

namespace {

void check_aligned(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ShapeError(std::string(what) + ": " + std::to_string(a) + " predictions for " + std::to_string(b) +
                     " targets");
  }
  if (a == 0) throw ShapeError(std::string(what) + ": empty cross-section");
}

}  // namespace

double rank_loss(std::span<const double> pred, std::span<const double> truth) {
  check_aligned(pred.size(), truth.size(), "rank_loss");
  double loss = 0.0;
  for (std::size_t q = 0; q < pred.size(); ++q) {
    for (std::size_t k = 0; k < pred.size(); ++k) {
      if (q == k) continue;
      loss += std::max(0.0, -(pred[q] - pred[k]) * (truth[q] - truth[k]));
    }
  }
  return loss;
}

double move_loss(std::span<const double> probs, std::span<const double> labels) {
  check_aligned(probs.size(), labels.size(), "move_loss");
  double loss = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (!(p > 0.0 && p < 1.0)) throw DomainError("move_loss: probability " + std::to_string(p) + " outside (0, 1)");
    loss -= labels[i] * std::log(p) + (1.0 - labels[i]) * std::log(1.0 - p);
  }
  return loss;
}

double mse_loss(std::span<const double> pred, std::span<const double> truth) {
  check_aligned(pred.size(), truth.size(), "mse_loss");
  double loss = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) loss += (pred[i] - truth[i]) * (pred[i] - truth[i]);
  return loss;
}

double total_loss(double rank, double move, double l2, double delta, double lambda) {
  return (1.0 - delta) * rank + delta * move + lambda * l2;
}

double l2_penalty(const nn::ParamList& params) {
  double s = 0.0;
  for (const auto& p : params) {
    if (!p.decay) continue;
    for (double v : p.tensor->data()) s += v * v;
  }
  return s;
}

DayObjective day_objective(const model::ForwardGraph& graph, const data::InstanceWindow& instance,
                           model::Variant variant) {
  const auto truth = instance.target_returns();
  DayObjective obj;
  obj.rank = ad::pairwise_rank_hinge(graph.pred_return, truth);
  if (variant == model::Variant::mse) {
    obj.move = ad::squared_error(graph.move_head, truth);
  } else if (variant != model::Variant::no_mtl) {
    obj.move = ad::binary_cross_entropy_logits(graph.move_head, instance.target_moves());
  }
  return obj;
}

double effective_delta(model::Variant variant, double delta) {
  return variant == model::Variant::no_mtl ? 0.0 : delta;
}

ad::Var weighted(const DayObjective& obj, double delta) {
  if (!obj.move.valid()) return obj.rank;
  return ad::affine(obj.rank, 1.0 - delta, 0.0) + ad::affine(obj.move, delta, 0.0);
}

}  // namespace fingat::train
