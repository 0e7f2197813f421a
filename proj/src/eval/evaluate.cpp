#include "fingat/eval/evaluate.hpp"

#include <exception>

#include "fingat/errors.hpp"

namespace fingat::eval {

namespace {

DayPredictions day_from(const data::InstanceWindow& inst) {
  DayPredictions d;
  d.date = inst.prediction_date;
  d.stock_ids = inst.stock_ids();
  d.true_return = inst.target_returns();
  d.true_move = inst.target_moves();
  return d;
}

}  // namespace

std::vector<DayPredictions> predict_days(const model::ModelState& state, std::span<const data::InstanceWindow> days,
                                         const data::SectorCatalog& catalog, bool parallel) {
  std::vector<DayPredictions> out(days.size());
  std::vector<std::exception_ptr> errors(days.size());
  const auto n = static_cast<std::ptrdiff_t>(days.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const auto& inst = days[static_cast<std::size_t>(i)];
      auto batch = state.config.variant == model::Variant::nt ? model::forward_nt(state, inst, false)
                                                              : model::forward(state, inst, catalog, false);
      auto d = day_from(inst);
      d.pred_return = std::move(batch.pred_return);
      d.pred_move = std::move(batch.pred_move);
      out[static_cast<std::size_t>(i)] = std::move(d);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::vector<DayPredictions> oracle_days(std::span<const data::InstanceWindow> days) {
  std::vector<DayPredictions> out;
  out.reserve(days.size());
  for (const auto& inst : days) {
    auto d = day_from(inst);
    d.pred_return = d.true_return;
    d.pred_move = d.true_move;
    out.push_back(std::move(d));
  }
  return out;
}

EvalReport evaluate(const model::ModelState& state, std::span<const data::InstanceWindow> days,
                    const data::SectorCatalog& catalog, const std::vector<std::size_t>& ks,
                    std::vector<DetailRow>* detail, bool parallel) {
  if (days.empty()) throw DomainError("evaluate: no test days");
  return build_report(predict_days(state, days, catalog, parallel), ks, detail);
}

}  // namespace fingat::eval
