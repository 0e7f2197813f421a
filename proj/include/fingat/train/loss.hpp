#pragma once

#include <span>

#include "fingat/ad/tape.hpp"
#include "fingat/data/instances.hpp"
#include "fingat/model/fingat.hpp"
#include "fingat/nn/params.hpp"

namespace fingat::train {

// Plain-value losses, all summed rather than averaged.

// Sum over ordered pairs (q, k), q != k, of max(0, -(p_q - p_k)(y_q - y_k)).
// Each unordered pair therefore counts twice. Throws ShapeError on a length
// mismatch or an empty list.
double rank_loss(std::span<const double> pred, std::span<const double> truth);
// -sum[y log p + (1 - y) log(1 - p)]. Throws DomainError for p outside (0, 1).
double move_loss(std::span<const double> probs, std::span<const double> labels);
// sum (p - y)^2
double mse_loss(std::span<const double> pred, std::span<const double> truth);
// (1 - delta) rank + delta move + lambda l2
double total_loss(double rank, double move, double l2, double delta, double lambda);
// Sum of squares over the parameters marked for decay (weights and
// attention vectors, not biases).
double l2_penalty(const nn::ParamList& params);

// Tape-level per-day objective terms.
struct DayObjective {
  ad::Var rank;
  ad::Var move;  // BCE on the movement logits, or squared error under mse; invalid under no_mtl
};

DayObjective day_objective(const model::ForwardGraph& graph, const data::InstanceWindow& instance,
                           model::Variant variant);

// Weight applied to the second term: 0 under no_mtl, where the term is absent.
double effective_delta(model::Variant variant, double delta);

// (1 - delta) rank + delta move. Without a movement term the rank term
// carries weight 1, matching effective_delta() == 0.
ad::Var weighted(const DayObjective& obj, double delta);

}  // namespace fingat::train
