#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fingat/ad/gradcheck.hpp"
#include "fingat/model/fingat.hpp"
#include "json.hpp"

namespace fingat::train {

inline constexpr double kGradCheckTolerance = 1e-4;
// Default seed of the suite. Full-model rows use tiny random instances whose
// piecewise-linear pieces (ReLU, LeakyReLU, max pooling, the hinge) may put a
// kink inside the finite-difference stencil for some seeds; see
// refined_error on failing rows.
inline constexpr std::uint64_t kGradCheckSeed = 1;

struct GradCheckRow {
  std::string name;
  ad::GradCheckResult result;
  bool passed = false;
  // On a failing row: the worst coordinate's error with the step shrunk 100
  // times. A small value here points at a kink rather than a wrong rule.
  std::optional<double> refined_error;
  double seconds = 0.0;
};

struct GradCheckOptions {
  std::uint64_t seed = kGradCheckSeed;
  double step = ad::kGradCheckStep;
  double tolerance = kGradCheckTolerance;
};

// Layer rows (GRU, temporal attention, GAT, dense, losses) followed by one
// full-model row per variant under the multi-task training objective.
std::vector<GradCheckRow> run_gradcheck_suite(const GradCheckOptions& options = {});

// Configuration and data of the full-model rows.
model::ModelConfig gradcheck_model_config(model::Variant variant, std::uint64_t seed);
GradCheckRow full_model_gradcheck(model::Variant variant, const GradCheckOptions& options = {});

nlohmann::json to_json(const std::vector<GradCheckRow>& rows);

}  // namespace fingat::train
