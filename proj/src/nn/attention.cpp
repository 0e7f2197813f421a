#include "fingat/nn/attention.hpp"

#include <vector>

#include "fingat/errors.hpp"

namespace fingat::nn {

using namespace ad;

TemporalAttentionParams TemporalAttentionParams::init(std::size_t hidden, Rng& rng) {
  return {uniform_init({hidden, hidden}, hidden, rng), uniform_init({hidden, 1}, hidden, rng)};
}

void TemporalAttentionParams::collect(const std::string& prefix, ParamList& out) {
  out.push_back({prefix + ".w0", &w0, true});
  out.push_back({prefix + ".v", &v, true});
}

AttentionOutput temporal_attention(Tape& tape, const TemporalAttentionParams& p, std::span<const Var> states) {
  if (states.empty()) throw ShapeError("temporal_attention: no hidden states");
  const std::size_t batch = states.front().value().rows();
  for (const Var& h : states) {
    if (h.value().rank() != 2 || h.value().cols() != p.hidden() || h.value().rows() != batch) {
      throw ShapeError("temporal_attention: state " + shape_string(h.shape()) + " does not match hidden size " +
                       std::to_string(p.hidden()));
    }
  }
  const Var w0 = tape.parameter(p.w0);
  const Var v = tape.parameter(p.v);
  std::vector<Var> scores;
  scores.reserve(states.size());
  for (const Var& h : states) scores.push_back(matmul(tanh(matmul(h, w0)), v));
  const Var alpha = softmax_rows(concat(scores, 1));
  Var out = scale_rows(states[0], column(alpha, 0));
  for (std::size_t j = 1; j < states.size(); ++j) out = out + scale_rows(states[j], column(alpha, j));
  return {out, alpha};
}

}  // namespace fingat::nn
