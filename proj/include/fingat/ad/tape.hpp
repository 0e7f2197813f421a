#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "fingat/ad/tensor.hpp"

namespace fingat::ad {

enum class OpKind : std::uint8_t {
  leaf,
  matmul,
  add,
  sub,
  mul,
  add_bias,
  affine,
  tanh,
  sigmoid,
  relu,
  leaky_relu,
  exp,
  log,
  softmax,
  softmax_rows,
  concat,
  reduce_max,
  max_rows,
  gather_rows,
  column,
  scale_rows,
  outer_sum,
  sum,
  sum_squares,
  reshape,
  rank_hinge,
  bce_logits,
  bce,
  squared_error,
};

const char* op_name(OpKind kind);

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
// tape that produced it is alive.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool valid() const { return tape != nullptr; }
};

// Reverse-mode gradient tape. Operations are appended in evaluation order and
// replayed in exact reverse by compute_adjoints(). A tape and the Vars it
// hands out belong to one thread at a time.
class Tape {
 public:
  // Receives the tape and the adjoint of the node being replayed; pushes
  // contributions into inputs via accumulate()/grad_buffer().
  using BackwardFn = std::function<void(Tape&, std::span<const double>)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // Differentiable input whose adjoint is read back with grad().
  Var variable(Tensor value);
  // Binds an external tensor without copying it. backward() accumulates the
  // adjoint into param.grad() when param.requires_grad(). The tensor must
  // outlive the tape and stay unmodified while the tape is in use.
  Var parameter(const Tensor& param);

  Var record(OpKind kind, Tensor value, std::span<const Var> inputs, BackwardFn fn);
  Var record(OpKind kind, Tensor value, std::initializer_list<Var> inputs, BackwardFn fn) {
    return record(kind, std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(fn));
  }

  const Tensor& value(Var v) const;
  OpKind kind(Var v) const { return nodes_[v.id].kind; }
  bool needs_grad(Var v) const { return nodes_[v.id].needs_grad; }

  // Adjoint of v after the last compute_adjoints(); all zeros when v was
  // unreachable from the loss.
  std::vector<double> grad(Var v) const;
  std::span<double> grad_buffer(Var v);
  void accumulate(Var v, std::span<const double> g);

  // Fills node adjoints for everything reachable from loss. Adjoints from a
  // previous call are discarded.
  void compute_adjoints(Var loss);
  // compute_adjoints() followed by accumulation into every bound parameter.
  // Repeated calls without zeroing the parameters' grads accumulate.
  void backward(Var loss);

  // Calls fn(param, adjoint) for each bound parameter reached by the last
  // compute_adjoints(), in recording order.
  void for_each_parameter_grad(const std::function<void(const Tensor&, std::span<const double>)>& fn) const;

  std::size_t size() const { return nodes_.size(); }
  // Node ids whose backward rule ran during the last compute_adjoints().
  const std::vector<std::uint32_t>& last_replay_order() const { return replay_order_; }

 private:
  struct Node {
    OpKind kind = OpKind::leaf;
    Tensor value;
    const Tensor* external = nullptr;
    bool needs_grad = false;
    std::vector<double> grad;
    BackwardFn backward;
  };

  Var push(Node node);
  void check_owned(Var v) const;

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> replay_order_;
};

namespace testing {
// Corrupts the backward rule of one op kind (scales its upstream adjoint by
// 1.5) for fault-injection tests. Pass OpKind::leaf to clear.
void corrupt_backward(OpKind kind);
OpKind corrupted_backward();
}  // namespace testing

}  // namespace fingat::ad
