#include "fingat/nn/dense.hpp"

#include "fingat/errors.hpp"

namespace fingat::nn {

using namespace ad;

DenseParams DenseParams::init(std::size_t in_dim, std::size_t out_dim, bool bias, Rng& rng) {
  DenseParams p;
  p.w = uniform_init({in_dim, out_dim}, in_dim, rng);
  if (bias) p.b = uniform_init({out_dim}, in_dim, rng);
  return p;
}

void DenseParams::collect(const std::string& prefix, ParamList& out) {
  out.push_back({prefix + ".w", &w, true});
  if (b) out.push_back({prefix + ".b", &*b, false});
}

Var dense(Var x, Var w, std::optional<Var> b, Activation act) {
  Var y = matmul(x, w);
  if (b) y = add_bias(y, *b);
  return act == Activation::identity ? y : map(y, act);
}

Var dense(Tape& tape, const DenseParams& p, Var x, Activation act) {
  std::optional<Var> b;
  if (p.b) b = tape.parameter(*p.b);
  return dense(x, tape.parameter(p.w), b, act);
}

}  // namespace fingat::nn
