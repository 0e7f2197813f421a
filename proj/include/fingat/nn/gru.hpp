#pragma once

#include <span>
#include <vector>

#include "fingat/ad/ops.hpp"
#include "fingat/nn/params.hpp"

namespace fingat::nn {

// Gated recurrent unit with row-vector inputs:
//   z  = sigmoid(x Wz + h Uz + bz)
//   r  = sigmoid(x Wr + h Ur + br)
//   h~ = tanh(x Wh + (r * h) Uh + bh)
//   h' = z * h + (1 - z) * h~
struct GruParams {
  ad::Tensor wz, uz, bz;
  ad::Tensor wr, ur, br;
  ad::Tensor wh, uh, bh;

  static GruParams init(std::size_t input_dim, std::size_t hidden, Rng& rng);
  std::size_t input_dim() const { return wz.rows(); }
  std::size_t hidden() const { return uz.rows(); }
  void collect(const std::string& prefix, ParamList& out);
};

struct GruOutput {
  std::vector<ad::Var> states;  // h_1 .. h_T, each [batch x hidden]
  ad::Var last;
};

// Runs the recurrence over `sequence` (each step [batch x input_dim]), one
// row per independent sequence. Throws ShapeError on an empty sequence or
// mismatched widths.
GruOutput gru_forward(ad::Tape& tape, const GruParams& p, std::span<const ad::Var> sequence, ad::Var h0);
// Same with h0 = 0.
GruOutput gru_forward(ad::Tape& tape, const GruParams& p, std::span<const ad::Var> sequence);

}  // namespace fingat::nn
