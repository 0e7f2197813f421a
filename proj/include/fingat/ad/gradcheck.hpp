#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fingat/ad/tape.hpp"

namespace fingat::ad {

inline constexpr double kGradCheckStep = 1e-3;
inline constexpr double kGradCheckFloor = 1e-8;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_name;  // parameter name, empty for single-input checks
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t coordinates = 0;
};

// |a - n| / max(|a|, floor)
double relative_error(double analytic, double numeric, double floor = kGradCheckFloor);

using ScalarFn = std::function<Var(Tape&, Var)>;

// Compares the tape gradient of f at x with central differences
// (f(x + h e_i) - f(x - h e_i)) / 2h over every coordinate.
GradCheckResult finite_diff_check(const ScalarFn& f, const Tensor& x, double step = kGradCheckStep);

struct NamedTensor {
  std::string name;
  Tensor* tensor;
};

// Same check over a set of parameter tensors bound into the function through
// Tape::parameter(). The tensors are perturbed in place and restored.
GradCheckResult finite_diff_check_params(const std::function<Var(Tape&)>& loss, const std::vector<NamedTensor>& params,
                                         double step = kGradCheckStep);

}  // namespace fingat::ad
