#pragma once

#include <vector>

#include "fingat/ad/ops.hpp"
#include "fingat/nn/params.hpp"

namespace fingat::nn {

// Directed neighbor sets as a dense row-major mask; row q lists the nodes
// that q attends to.
class Graph {
 public:
  // Every node attends to every node, itself included.
  static Graph complete(std::size_t nodes);
  // Throws GraphError when any neighbor set is empty or out of range.
  static Graph from_neighbors(const std::vector<std::vector<std::size_t>>& neighbors);

  std::size_t nodes() const { return nodes_; }
  bool has_edge(std::size_t q, std::size_t n) const { return mask_[q * nodes_ + n] != 0; }
  const std::vector<unsigned char>& mask() const { return mask_; }

 private:
  std::size_t nodes_ = 0;
  std::vector<unsigned char> mask_;
};

// Single-head graph attention:
//   beta_qn = softmax_{n in N(q)} LeakyReLU(r . [a_q W2 || a_n W2])
//   out_q   = ReLU(sum_n beta_qn a_n W1)
struct GatParams {
  ad::Tensor w1;  // [in x out], aggregation
  ad::Tensor w2;  // [in x out], attention
  ad::Tensor r;   // [2*out x 1]

  static GatParams init(std::size_t in_dim, std::size_t out_dim, Rng& rng);
  std::size_t in_dim() const { return w1.rows(); }
  std::size_t out_dim() const { return w1.cols(); }
  void collect(const std::string& prefix, ParamList& out);
};

struct GatOutput {
  ad::Var out;   // [nodes x out]
  ad::Var beta;  // [nodes x nodes], zero off the neighbor sets
};

// `features` is [nodes x in]. Throws ShapeError on width or node-count
// mismatch and GraphError on an empty neighborhood.
GatOutput gat_forward(ad::Tape& tape, const GatParams& p, const Graph& graph, ad::Var features);

}  // namespace fingat::nn
