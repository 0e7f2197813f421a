#include "fingat/ad/tape.hpp"

#include <algorithm>
#include <atomic>
#include <string>

#include "fingat/errors.hpp"

namespace fingat::ad {

namespace {
std::atomic<OpKind> g_corrupted{OpKind::leaf};
}

namespace testing {
void corrupt_backward(OpKind kind) { g_corrupted.store(kind); }
OpKind corrupted_backward() { return g_corrupted.load(); }
}  // namespace testing

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::leaf: return "leaf";
    case OpKind::matmul: return "matmul";
    case OpKind::add: return "add";
    case OpKind::sub: return "sub";
    case OpKind::mul: return "mul";
    case OpKind::add_bias: return "add_bias";
    case OpKind::affine: return "affine";
    case OpKind::tanh: return "tanh";
    case OpKind::sigmoid: return "sigmoid";
    case OpKind::relu: return "relu";
    case OpKind::leaky_relu: return "leaky_relu";
    case OpKind::exp: return "exp";
    case OpKind::log: return "log";
    case OpKind::softmax: return "softmax";
    case OpKind::softmax_rows: return "softmax_rows";
    case OpKind::concat: return "concat";
    case OpKind::reduce_max: return "reduce_max";
    case OpKind::max_rows: return "max_rows";
    case OpKind::gather_rows: return "gather_rows";
    case OpKind::column: return "column";
    case OpKind::scale_rows: return "scale_rows";
    case OpKind::outer_sum: return "outer_sum";
    case OpKind::sum: return "sum";
    case OpKind::sum_squares: return "sum_squares";
    case OpKind::reshape: return "reshape";
    case OpKind::rank_hinge: return "rank_hinge";
    case OpKind::bce_logits: return "bce_logits";
    case OpKind::bce: return "bce";
    case OpKind::squared_error: return "squared_error";
  }
  return "unknown";
}

const Tensor& Var::value() const { return tape->value(*this); }

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

void Tape::check_owned(Var v) const {
  if (v.tape != this || v.id >= nodes_.size()) throw Error("variable does not belong to this tape");
}

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::variable(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = true;
  return push(std::move(n));
}

Var Tape::parameter(const Tensor& param) {
  Node n;
  n.external = &param;
  n.needs_grad = param.requires_grad();
  return push(std::move(n));
}

Var Tape::record(OpKind kind, Tensor value, std::span<const Var> inputs, BackwardFn fn) {
  Node n;
  n.kind = kind;
  n.value = std::move(value);
  for (const Var& in : inputs) {
    check_owned(in);
    n.needs_grad = n.needs_grad || nodes_[in.id].needs_grad;
  }
  if (n.needs_grad) n.backward = std::move(fn);
  return push(std::move(n));
}

const Tensor& Tape::value(Var v) const {
  check_owned(v);
  const Node& n = nodes_[v.id];
  return n.external ? *n.external : n.value;
}

std::vector<double> Tape::grad(Var v) const {
  check_owned(v);
  const Node& n = nodes_[v.id];
  if (n.grad.empty()) return std::vector<double>(value(v).size(), 0.0);
  return n.grad;
}

std::span<double> Tape::grad_buffer(Var v) {
  Node& n = nodes_[v.id];
  if (n.grad.empty()) n.grad.assign(value(v).size(), 0.0);
  return n.grad;
}

void Tape::accumulate(Var v, std::span<const double> g) {
  if (!nodes_[v.id].needs_grad) return;
  auto buf = grad_buffer(v);
  for (std::size_t i = 0; i < g.size(); ++i) buf[i] += g[i];
}

void Tape::compute_adjoints(Var loss) {
  check_owned(loss);
  if (value(loss).size() != 1) {
    throw ShapeError("backward needs a scalar loss, got " + shape_string(value(loss).shape()));
  }
  for (auto& n : nodes_) n.grad.clear();
  replay_order_.clear();
  nodes_[loss.id].grad.assign(1, 1.0);

  const OpKind corrupted = testing::corrupted_backward();
  std::vector<double> scratch;
  for (std::int64_t i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.backward || n.grad.empty()) continue;
    replay_order_.push_back(static_cast<std::uint32_t>(i));
    if (corrupted != OpKind::leaf && n.kind == corrupted) {
      scratch = n.grad;
      for (auto& g : scratch) g *= 1.5;
      n.backward(*this, scratch);
    } else {
      // Rules only touch their inputs' buffers, so the span stays valid.
      n.backward(*this, std::span<const double>(n.grad));
    }
  }
}

void Tape::backward(Var loss) {
  compute_adjoints(loss);
  for (auto& n : nodes_) {
    if (!n.external || n.grad.empty() || !n.external->requires_grad()) continue;
    auto* param = const_cast<Tensor*>(n.external);
    auto dst = param->grad();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += n.grad[k];
  }
}

void Tape::for_each_parameter_grad(
    const std::function<void(const Tensor&, std::span<const double>)>& fn) const {
  for (const auto& n : nodes_) {
    if (!n.external || n.grad.empty()) continue;
    fn(*n.external, n.grad);
  }
}

}  // namespace fingat::ad
