#pragma once

#include <optional>

#include "fingat/ad/ops.hpp"
#include "fingat/nn/params.hpp"

namespace fingat::nn {

struct DenseParams {
  ad::Tensor w;                  // [in x out]
  std::optional<ad::Tensor> b;   // [out]

  static DenseParams init(std::size_t in_dim, std::size_t out_dim, bool bias, Rng& rng);
  void collect(const std::string& prefix, ParamList& out);
};

// act(x W + b) for x [batch x in].
ad::Var dense(ad::Var x, ad::Var w, std::optional<ad::Var> b = std::nullopt,
              ad::Activation act = ad::Activation::identity);
ad::Var dense(ad::Tape& tape, const DenseParams& p, ad::Var x, ad::Activation act = ad::Activation::identity);

}  // namespace fingat::nn
