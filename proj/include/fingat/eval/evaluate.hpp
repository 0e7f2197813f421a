#pragma once

#include <span>
#include <vector>

#include "fingat/data/instances.hpp"
#include "fingat/data/market.hpp"
#include "fingat/eval/metrics.hpp"
#include "fingat/model/fingat.hpp"

namespace fingat::eval {

// Forward pass per day, without attention capture. Days are independent, so
// the parallel path produces exactly the serial result.
std::vector<DayPredictions> predict_days(const model::ModelState& state, std::span<const data::InstanceWindow> days,
                                         const data::SectorCatalog& catalog, bool parallel = true);

// Predictions equal to the true returns and moves, for checking the harness.
std::vector<DayPredictions> oracle_days(std::span<const data::InstanceWindow> days);

// Throws DomainError on an empty test set.
EvalReport evaluate(const model::ModelState& state, std::span<const data::InstanceWindow> days,
                    const data::SectorCatalog& catalog, const std::vector<std::size_t>& ks,
                    std::vector<DetailRow>* detail = nullptr, bool parallel = true);

}  // namespace fingat::eval
