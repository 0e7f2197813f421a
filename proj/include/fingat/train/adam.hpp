#pragma once

#include <cstddef>
#include <vector>

#include "fingat/nn/params.hpp"

namespace fingat::train {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam. Moments are laid out in the order of the parameter
// list given to the first step(); later calls must pass the same list.
class Adam {
 public:
  explicit Adam(AdamOptions options = {}) : options_(options) {}

  // Reads each tensor's grad() and updates the tensor in place, in list
  // order. Throws TrainingError naming the first parameter without a
  // gradient buffer.
  void step(const nn::ParamList& params);

  std::size_t steps() const { return t_; }
  const AdamOptions& options() const { return options_; }

 private:
  AdamOptions options_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace fingat::train
