#include "fingat/nn/gru.hpp"

#include "fingat/errors.hpp"

namespace fingat::nn {

using namespace ad;

GruParams GruParams::init(std::size_t input_dim, std::size_t hidden, Rng& rng) {
  GruParams p;
  auto w = [&] { return uniform_init({input_dim, hidden}, input_dim, rng); };
  auto u = [&] { return uniform_init({hidden, hidden}, hidden, rng); };
  auto b = [&] { return uniform_init({hidden}, hidden, rng); };
  p.wz = w(), p.uz = u(), p.bz = b();
  p.wr = w(), p.ur = u(), p.br = b();
  p.wh = w(), p.uh = u(), p.bh = b();
  return p;
}

void GruParams::collect(const std::string& prefix, ParamList& out) {
  out.push_back({prefix + ".wz", &wz, true});
  out.push_back({prefix + ".uz", &uz, true});
  out.push_back({prefix + ".bz", &bz, false});
  out.push_back({prefix + ".wr", &wr, true});
  out.push_back({prefix + ".ur", &ur, true});
  out.push_back({prefix + ".br", &br, false});
  out.push_back({prefix + ".wh", &wh, true});
  out.push_back({prefix + ".uh", &uh, true});
  out.push_back({prefix + ".bh", &bh, false});
}

GruOutput gru_forward(Tape& tape, const GruParams& p, std::span<const Var> sequence, Var h0) {
  if (sequence.empty()) throw ShapeError("gru_forward: empty sequence");
  const std::size_t hidden = p.hidden();
  const std::size_t batch = sequence.front().value().rows();
  for (const Var& x : sequence) {
    if (x.value().rank() != 2 || x.value().cols() != p.input_dim() || x.value().rows() != batch) {
      throw ShapeError("gru_forward: step " + shape_string(x.shape()) + " does not match input width " +
                       std::to_string(p.input_dim()));
    }
  }
  if (h0.value().rows() != batch || h0.value().cols() != hidden) {
    throw ShapeError("gru_forward: h0 " + shape_string(h0.shape()) + " does not match hidden size " +
                     std::to_string(hidden));
  }
  const Var wz = tape.parameter(p.wz), uz = tape.parameter(p.uz), bz = tape.parameter(p.bz);
  const Var wr = tape.parameter(p.wr), ur = tape.parameter(p.ur), br = tape.parameter(p.br);
  const Var wh = tape.parameter(p.wh), uh = tape.parameter(p.uh), bh = tape.parameter(p.bh);

  GruOutput out;
  Var h = h0;
  for (const Var& x : sequence) {
    const Var z = sigmoid(add_bias(matmul(x, wz) + matmul(h, uz), bz));
    const Var r = sigmoid(add_bias(matmul(x, wr) + matmul(h, ur), br));
    const Var cand = tanh(add_bias(matmul(x, wh) + matmul(r * h, uh), bh));
    h = z * h + affine(z, -1.0, 1.0) * cand;
    out.states.push_back(h);
  }
  out.last = h;
  return out;
}

GruOutput gru_forward(Tape& tape, const GruParams& p, std::span<const Var> sequence) {
  const std::size_t batch = sequence.empty() ? 1 : sequence.front().value().rows();
  return gru_forward(tape, p, sequence, tape.constant(Tensor({batch, p.hidden()})));
}

}  // namespace fingat::nn
