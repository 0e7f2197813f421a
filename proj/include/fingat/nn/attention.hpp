#pragma once

#include <span>

#include "fingat/ad/ops.hpp"
#include "fingat/nn/params.hpp"

namespace fingat::nn {

// Feed-forward attention over time steps: s_j = v . tanh(h_j W0),
// alpha = softmax_j(s), out = sum_j alpha_j h_j.
struct TemporalAttentionParams {
  ad::Tensor w0;  // [hidden x hidden]
  ad::Tensor v;   // [hidden x 1]

  static TemporalAttentionParams init(std::size_t hidden, Rng& rng);
  std::size_t hidden() const { return w0.rows(); }
  void collect(const std::string& prefix, ParamList& out);
};

struct AttentionOutput {
  ad::Var out;    // [batch x hidden]
  ad::Var alpha;  // [batch x T]
};

// `states` holds T steps of [batch x hidden]. Throws ShapeError when empty.
AttentionOutput temporal_attention(ad::Tape& tape, const TemporalAttentionParams& p, std::span<const ad::Var> states);

}  // namespace fingat::nn
