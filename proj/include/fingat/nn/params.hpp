#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fingat/ad/tensor.hpp"

namespace fingat::nn {

using Rng = std::mt19937_64;

// A named reference to a trainable tensor. `decay` marks weights and
// attention vectors that the L2 term covers; biases have it off.
struct ParamRef {
  std::string name;
  ad::Tensor* tensor = nullptr;
  bool decay = true;
};

using ParamList = std::vector<ParamRef>;

// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
ad::Tensor uniform_init(ad::Shape shape, std::size_t fan_in, Rng& rng);

}  // namespace fingat::nn
