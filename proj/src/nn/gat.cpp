#include "fingat/nn/gat.hpp"

#include <numeric>

#include "fingat/errors.hpp"

namespace fingat::nn {

using namespace ad;

Graph Graph::complete(std::size_t nodes) {
  if (nodes == 0) throw GraphError("graph has no nodes");
  Graph g;
  g.nodes_ = nodes;
  g.mask_.assign(nodes * nodes, 1);
  return g;
}

Graph Graph::from_neighbors(const std::vector<std::vector<std::size_t>>& neighbors) {
  if (neighbors.empty()) throw GraphError("graph has no nodes");
  Graph g;
  g.nodes_ = neighbors.size();
  g.mask_.assign(g.nodes_ * g.nodes_, 0);
  for (std::size_t q = 0; q < g.nodes_; ++q) {
    if (neighbors[q].empty()) throw GraphError("node " + std::to_string(q) + " has an empty neighborhood");
    for (std::size_t n : neighbors[q]) {
      if (n >= g.nodes_) throw GraphError("node " + std::to_string(q) + " lists unknown neighbor " + std::to_string(n));
      g.mask_[q * g.nodes_ + n] = 1;
    }
  }
  return g;
}

GatParams GatParams::init(std::size_t in_dim, std::size_t out_dim, Rng& rng) {
  GatParams p;
  p.w1 = uniform_init({in_dim, out_dim}, in_dim, rng);
  p.w2 = uniform_init({in_dim, out_dim}, in_dim, rng);
  p.r = uniform_init({2 * out_dim, 1}, 2 * out_dim, rng);
  return p;
}

void GatParams::collect(const std::string& prefix, ParamList& out) {
  out.push_back({prefix + ".w1", &w1, true});
  out.push_back({prefix + ".w2", &w2, true});
  out.push_back({prefix + ".r", &r, true});
}

GatOutput gat_forward(Tape& tape, const GatParams& p, const Graph& graph, Var features) {
  const Tensor& a = features.value();
  if (a.rank() != 2 || a.cols() != p.in_dim()) {
    throw ShapeError("gat_forward: features " + shape_string(a.shape()) + " do not match input width " +
                     std::to_string(p.in_dim()));
  }
  if (a.rows() != graph.nodes()) {
    throw ShapeError("gat_forward: " + std::to_string(a.rows()) + " feature rows for " +
                     std::to_string(graph.nodes()) + " nodes");
  }
  if (p.r.size() != 2 * p.out_dim()) throw ShapeError("gat_forward: attention vector must have 2*out entries");
  for (std::size_t q = 0; q < graph.nodes(); ++q) {
    bool any = false;
    for (std::size_t n = 0; n < graph.nodes() && !any; ++n) any = graph.has_edge(q, n);
    if (!any) throw GraphError("node " + std::to_string(q) + " has an empty neighborhood");
  }

  const std::size_t out = p.out_dim();
  std::vector<std::size_t> src_rows(out), dst_rows(out);
  std::iota(src_rows.begin(), src_rows.end(), 0);
  std::iota(dst_rows.begin(), dst_rows.end(), out);

  const Var w1 = tape.parameter(p.w1);
  const Var w2 = tape.parameter(p.w2);
  const Var r = tape.parameter(p.r);
  const Var msg = matmul(features, w1);
  const Var key = matmul(features, w2);
  const Var e_src = matmul(key, gather_rows(r, src_rows));
  const Var e_dst = matmul(key, gather_rows(r, dst_rows));
  const Var beta = softmax_rows(leaky_relu(outer_sum(e_src, e_dst)), graph.mask());
  return {relu(matmul(beta, msg)), beta};
}

}  // namespace fingat::nn
