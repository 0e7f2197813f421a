#include "fingat/ad/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fingat/ad/kernels.hpp"
#include "fingat/errors.hpp"

namespace fingat::ad {

namespace {

void require_same_shape(Var a, Var b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

void require_matrix(Var x, const char* op) {
  if (x.shape().size() != 2) {
    throw ShapeError(std::string(op) + ": expected a matrix, got " + shape_string(x.shape()));
  }
}

double sigmoid_scalar(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

OpKind kind_of(Activation f) {
  switch (f) {
    case Activation::tanh: return OpKind::tanh;
    case Activation::sigmoid: return OpKind::sigmoid;
    case Activation::relu: return OpKind::relu;
    case Activation::leaky_relu: return OpKind::leaky_relu;
    case Activation::exp: return OpKind::exp;
    case Activation::log: return OpKind::log;
    case Activation::identity: break;
  }
  return OpKind::leaf;
}

}  // namespace

Var matmul(Var a, Var b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) {
    throw ShapeError("matmul: inner dimensions disagree, " + shape_string(a.shape()) + " x " +
                     shape_string(b.shape()));
  }
  Tensor out({m, n});
  kernels::matmul(a.value().data(), b.value().data(), out.data(), m, k, n);
  return a.tape->record(OpKind::matmul, std::move(out), {a, b}, [a, b, m, k, n](Tape& t, std::span<const double> g) {
    if (t.needs_grad(a)) kernels::matmul_grad_lhs(g, t.value(b).data(), t.grad_buffer(a), m, k, n);
    if (t.needs_grad(b)) kernels::matmul_grad_rhs(t.value(a).data(), g, t.grad_buffer(b), m, k, n);
  });
}

Var add(Var a, Var b) {
  require_same_shape(a, b, "add");
  Tensor out = a.value();
  const auto bv = b.value().data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return a.tape->record(OpKind::add, std::move(out), {a, b}, [a, b](Tape& t, std::span<const double> g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a, b, "sub");
  Tensor out = a.value();
  const auto bv = b.value().data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return a.tape->record(OpKind::sub, std::move(out), {a, b}, [a, b](Tape& t, std::span<const double> g) {
    t.accumulate(a, g);
    if (t.needs_grad(b)) {
      auto buf = t.grad_buffer(b);
      for (std::size_t i = 0; i < g.size(); ++i) buf[i] -= g[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a, b, "mul");
  Tensor out = a.value();
  const auto bv = b.value().data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return a.tape->record(OpKind::mul, std::move(out), {a, b}, [a, b](Tape& t, std::span<const double> g) {
    if (t.needs_grad(a)) {
      auto buf = t.grad_buffer(a);
      const auto bv = t.value(b).data();
      for (std::size_t i = 0; i < g.size(); ++i) buf[i] += g[i] * bv[i];
    }
    if (t.needs_grad(b)) {
      auto buf = t.grad_buffer(b);
      const auto av = t.value(a).data();
      for (std::size_t i = 0; i < g.size(); ++i) buf[i] += g[i] * av[i];
    }
  });
}

Var add_bias(Var x, Var b) {
  const Tensor& xv = x.value();
  const std::size_t cols = xv.cols();
  if (b.value().size() != cols || b.shape().size() > 2 || (b.shape().size() == 2 && b.shape()[0] != 1)) {
    throw ShapeError("add_bias: bias " + shape_string(b.shape()) + " does not match " + shape_string(xv.shape()));
  }
  Tensor out = xv;
  const auto bv = b.value().data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i % cols];
  return x.tape->record(OpKind::add_bias, std::move(out), {x, b}, [x, b, cols](Tape& t, std::span<const double> g) {
    t.accumulate(x, g);
    if (t.needs_grad(b)) {
      auto buf = t.grad_buffer(b);
      for (std::size_t i = 0; i < g.size(); ++i) buf[i % cols] += g[i];
    }
  });
}

Var affine(Var x, double scale, double shift) {
  Tensor out = x.value();
  for (auto& v : out.data()) v = scale * v + shift;
  return x.tape->record(OpKind::affine, std::move(out), {x}, [x, scale](Tape& t, std::span<const double> g) {
    auto buf = t.grad_buffer(x);
    for (std::size_t i = 0; i < g.size(); ++i) buf[i] += scale * g[i];
  });
}

Var map(Var x, Activation f, double slope) {
  if (f == Activation::identity) return x;
  const Tensor& xv = x.value();
  Tensor out = xv;
  auto o = out.data();
  switch (f) {
    case Activation::tanh:
      for (auto& v : o) v = std::tanh(v);
      break;
    case Activation::sigmoid:
      for (auto& v : o) v = sigmoid_scalar(v);
      break;
    case Activation::relu:
      for (auto& v : o) v = v > 0.0 ? v : 0.0;
      break;
    case Activation::leaky_relu:
      for (auto& v : o) v = v > 0.0 ? v : slope * v;
      break;
    case Activation::exp:
      for (auto& v : o) v = std::exp(v);
      break;
    case Activation::log:
      for (auto& v : o) {
        if (!(v > 0.0)) throw DomainError("log of non-positive entry " + std::to_string(v));
        v = std::log(v);
      }
      break;
    case Activation::identity:
      break;
  }
  return x.tape->record(kind_of(f), std::move(out), {x}, [x, f, slope](Tape& t, std::span<const double> g) {
    auto buf = t.grad_buffer(x);
    const auto in = t.value(x).data();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = in[i];
      double d = 0.0;
      switch (f) {
        case Activation::tanh: {
          const double y = std::tanh(v);
          d = 1.0 - y * y;
          break;
        }
        case Activation::sigmoid: {
          const double y = sigmoid_scalar(v);
          d = y * (1.0 - y);
          break;
        }
        case Activation::relu: d = v > 0.0 ? 1.0 : 0.0; break;
        case Activation::leaky_relu: d = v > 0.0 ? 1.0 : slope; break;
        case Activation::exp: d = std::exp(v); break;
        case Activation::log: d = 1.0 / v; break;
        case Activation::identity: d = 1.0; break;
      }
      buf[i] += g[i] * d;
    }
  });
}

Var tanh(Var x) { return map(x, Activation::tanh); }
Var sigmoid(Var x) { return map(x, Activation::sigmoid); }
Var relu(Var x) { return map(x, Activation::relu); }
Var leaky_relu(Var x, double slope) { return map(x, Activation::leaky_relu, slope); }
Var exp(Var x) { return map(x, Activation::exp); }
Var log(Var x) { return map(x, Activation::log); }

namespace {

// y = softmax over entries [begin, begin+n) where mask allows; masked -> 0.
void softmax_segment(std::span<const double> x, std::span<double> y, const unsigned char* mask) {
  double mx = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (mask && !mask[j]) continue;
    any = true;
    // NaN wins so that it propagates to every output of the segment.
    if (std::isnan(x[j]) || x[j] > mx) mx = x[j];
    if (std::isnan(mx)) break;
  }
  if (!any) throw DomainError("softmax over an empty support");
  double z = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    y[j] = (!mask || mask[j]) ? std::exp(x[j] - mx) : 0.0;
    z += y[j];
  }
  for (auto& v : y) v /= z;
}

void softmax_segment_grad(std::span<const double> y, std::span<const double> g, std::span<double> dx) {
  double dot = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) dot += g[j] * y[j];
  for (std::size_t j = 0; j < y.size(); ++j) dx[j] += y[j] * (g[j] - dot);
}

}  // namespace

Var softmax(Var x) {
  Tensor out(x.shape());
  softmax_segment(x.value().data(), out.data(), nullptr);
  Tensor y = out;
  return x.tape->record(OpKind::softmax, std::move(out), {x},
                        [x, y = std::move(y)](Tape& t, std::span<const double> g) {
                          softmax_segment_grad(y.data(), g, t.grad_buffer(x));
                        });
}

Var softmax_rows(Var x, std::span<const unsigned char> mask) {
  require_matrix(x, "softmax_rows");
  const std::size_t m = x.shape()[0], n = x.shape()[1];
  if (!mask.empty() && mask.size() != m * n) {
    throw ShapeError("softmax_rows: mask has " + std::to_string(mask.size()) + " entries for " +
                     shape_string(x.shape()));
  }
  Tensor out(x.shape());
  const auto xv = x.value().data();
  for (std::size_t i = 0; i < m; ++i) {
    softmax_segment(xv.subspan(i * n, n), out.data().subspan(i * n, n), mask.empty() ? nullptr : &mask[i * n]);
  }
  Tensor y = out;
  return x.tape->record(OpKind::softmax_rows, std::move(out), {x},
                        [x, y = std::move(y), m, n](Tape& t, std::span<const double> g) {
                          auto buf = t.grad_buffer(x);
                          for (std::size_t i = 0; i < m; ++i) {
                            softmax_segment_grad(y.data().subspan(i * n, n), g.subspan(i * n, n),
                                                 buf.subspan(i * n, n));
                          }
                        });
}

Var concat(std::span<const Var> xs, std::size_t axis) {
  if (xs.empty()) throw ShapeError("concat of zero tensors");
  const Shape& first = xs[0].shape();
  if (axis >= first.size()) throw ShapeError("concat axis out of range for " + shape_string(first));
  Shape out_shape = first;
  out_shape[axis] = 0;
  for (const Var& v : xs) {
    const Shape& s = v.shape();
    bool ok = s.size() == first.size();
    for (std::size_t d = 0; ok && d < s.size(); ++d) ok = d == axis || s[d] == first[d];
    if (!ok) {
      throw ShapeError("concat: " + shape_string(s) + " disagrees with " + shape_string(first) + " off axis " +
                       std::to_string(axis));
    }
    out_shape[axis] += s[axis];
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= first[d];
  for (std::size_t d = axis + 1; d < first.size(); ++d) inner *= first[d];
  const std::size_t out_mid = out_shape[axis];

  Tensor out(out_shape);
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const Var& v : xs) {
    offsets.push_back(offset);
    const std::size_t mid = v.shape()[axis];
    const auto src = v.value().data();
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(src.begin() + o * mid * inner, mid * inner, out.data().begin() + (o * out_mid + offset) * inner);
    }
    offset += mid;
  }
  std::vector<Var> inputs(xs.begin(), xs.end());
  return xs[0].tape->record(
      OpKind::concat, std::move(out), xs,
      [inputs, offsets, axis, outer, inner, out_mid](Tape& t, std::span<const double> g) {
        for (std::size_t idx = 0; idx < inputs.size(); ++idx) {
          const Var v = inputs[idx];
          if (!t.needs_grad(v)) continue;
          const std::size_t mid = t.value(v).shape()[axis];
          auto buf = t.grad_buffer(v);
          for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t e = 0; e < mid * inner; ++e) {
              buf[o * mid * inner + e] += g[(o * out_mid + offsets[idx]) * inner + e];
            }
          }
        }
      });
}

Var concat(std::initializer_list<Var> xs, std::size_t axis) {
  return concat(std::span<const Var>(xs.begin(), xs.size()), axis);
}

Var reduce_max_elementwise(std::span<const Var> xs) {
  if (xs.empty()) throw DomainError("reduce_max_elementwise over an empty set");
  for (const Var& v : xs) require_same_shape(xs[0], v, "reduce_max_elementwise");
  Tensor out = xs[0].value();
  std::vector<std::size_t> argmax(out.size(), 0);
  for (std::size_t s = 1; s < xs.size(); ++s) {
    const auto v = xs[s].value().data();
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (v[i] > out[i]) {
        out[i] = v[i];
        argmax[i] = s;
      }
    }
  }
  std::vector<Var> inputs(xs.begin(), xs.end());
  return xs[0].tape->record(OpKind::reduce_max, std::move(out), xs,
                            [inputs, argmax](Tape& t, std::span<const double> g) {
                              for (std::size_t i = 0; i < g.size(); ++i) {
                                const Var src = inputs[argmax[i]];
                                if (t.needs_grad(src)) t.grad_buffer(src)[i] += g[i];
                              }
                            });
}

Var max_rows(Var x) {
  require_matrix(x, "max_rows");
  const std::size_t m = x.shape()[0], n = x.shape()[1];
  const auto xv = x.value().data();
  Tensor out({1, n});
  std::vector<std::size_t> argmax(n, 0);
  for (std::size_t j = 0; j < n; ++j) out[j] = xv[j];
  for (std::size_t i = 1; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (xv[i * n + j] > out[j]) {
        out[j] = xv[i * n + j];
        argmax[j] = i;
      }
    }
  }
  return x.tape->record(OpKind::max_rows, std::move(out), {x}, [x, argmax, n](Tape& t, std::span<const double> g) {
    auto buf = t.grad_buffer(x);
    for (std::size_t j = 0; j < n; ++j) buf[argmax[j] * n + j] += g[j];
  });
}

Var gather_rows(Var x, std::span<const std::size_t> rows) {
  require_matrix(x, "gather_rows");
  if (rows.empty()) throw ShapeError("gather_rows with no rows");
  const std::size_t m = x.shape()[0], n = x.shape()[1];
  Tensor out({rows.size(), n});
  const auto xv = x.value().data();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= m) throw ShapeError("gather_rows: row " + std::to_string(rows[r]) + " out of " + std::to_string(m));
    std::copy_n(xv.begin() + rows[r] * n, n, out.data().begin() + r * n);
  }
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return x.tape->record(OpKind::gather_rows, std::move(out), {x}, [x, idx, n](Tape& t, std::span<const double> g) {
    auto buf = t.grad_buffer(x);
    for (std::size_t r = 0; r < idx.size(); ++r) {
      for (std::size_t j = 0; j < n; ++j) buf[idx[r] * n + j] += g[r * n + j];
    }
  });
}

Var column(Var x, std::size_t j) {
  require_matrix(x, "column");
  const std::size_t m = x.shape()[0], n = x.shape()[1];
  if (j >= n) throw ShapeError("column " + std::to_string(j) + " out of " + shape_string(x.shape()));
  Tensor out({m, 1});
  for (std::size_t i = 0; i < m; ++i) out[i] = x.value()[i * n + j];
  return x.tape->record(OpKind::column, std::move(out), {x}, [x, j, m, n](Tape& t, std::span<const double> g) {
    auto buf = t.grad_buffer(x);
    for (std::size_t i = 0; i < m; ++i) buf[i * n + j] += g[i];
  });
}

Var scale_rows(Var x, Var c) {
  require_matrix(x, "scale_rows");
  const std::size_t m = x.shape()[0], n = x.shape()[1];
  if (c.value().size() != m) {
    throw ShapeError("scale_rows: scales " + shape_string(c.shape()) + " do not match " + shape_string(x.shape()));
  }
  Tensor out = x.value();
  const auto cv = c.value().data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] *= cv[i];
  }
  return x.tape->record(OpKind::scale_rows, std::move(out), {x, c}, [x, c, m, n](Tape& t, std::span<const double> g) {
    const auto xv = t.value(x).data();
    const auto cv = t.value(c).data();
    if (t.needs_grad(x)) {
      auto buf = t.grad_buffer(x);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) buf[i * n + j] += g[i * n + j] * cv[i];
      }
    }
    if (t.needs_grad(c)) {
      auto buf = t.grad_buffer(c);
      for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * xv[i * n + j];
        buf[i] += acc;
      }
    }
  });
}

Var outer_sum(Var a, Var b) {
  const std::size_t m = a.value().size(), k = b.value().size();
  Tensor out({m, k});
  const auto av = a.value().data();
  const auto bv = b.value().data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) out[i * k + j] = av[i] + bv[j];
  }
  return a.tape->record(OpKind::outer_sum, std::move(out), {a, b}, [a, b, m, k](Tape& t, std::span<const double> g) {
    if (t.needs_grad(a)) {
      auto buf = t.grad_buffer(a);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < k; ++j) buf[i] += g[i * k + j];
      }
    }
    if (t.needs_grad(b)) {
      auto buf = t.grad_buffer(b);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < k; ++j) buf[j] += g[i * k + j];
      }
    }
  });
}

Var reshape(Var x, Shape shape) {
  if (shape_size(shape) != x.value().size()) {
    throw ShapeError("reshape " + shape_string(x.shape()) + " to " + shape_string(shape));
  }
  Tensor out(std::move(shape), std::vector<double>(x.value().data().begin(), x.value().data().end()));
  return x.tape->record(OpKind::reshape, std::move(out), {x},
                        [x](Tape& t, std::span<const double> g) { t.accumulate(x, g); });
}

Var sum(Var x) {
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  return x.tape->record(OpKind::sum, Tensor::scalar(s), {x}, [x](Tape& t, std::span<const double> g) {
    auto buf = t.grad_buffer(x);
    for (auto& b : buf) b += g[0];
  });
}

Var sum_squares(Var x) {
  double s = 0.0;
  for (double v : x.value().data()) s += v * v;
  return x.tape->record(OpKind::sum_squares, Tensor::scalar(s), {x}, [x](Tape& t, std::span<const double> g) {
    auto buf = t.grad_buffer(x);
    const auto xv = t.value(x).data();
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] += 2.0 * xv[i] * g[0];
  });
}

Var pairwise_rank_hinge(Var pred, std::span<const double> truth) {
  const std::size_t n = pred.value().size();
  if (truth.size() != n) {
    throw ShapeError("rank loss: " + std::to_string(n) + " predictions vs " + std::to_string(truth.size()) +
                     " targets");
  }
  const auto p = pred.value().data();
  double loss = 0.0;
  for (std::size_t q = 0; q < n; ++q) {
    for (std::size_t k = 0; k < n; ++k) {
      if (q == k) continue;
      loss += std::max(0.0, -(p[q] - p[k]) * (truth[q] - truth[k]));
    }
  }
  std::vector<double> y(truth.begin(), truth.end());
  return pred.tape->record(OpKind::rank_hinge, Tensor::scalar(loss), {pred},
                           [pred, y = std::move(y), n](Tape& t, std::span<const double> g) {
                             auto buf = t.grad_buffer(pred);
                             const auto p = t.value(pred).data();
                             for (std::size_t q = 0; q < n; ++q) {
                               for (std::size_t k = 0; k < n; ++k) {
                                 if (q == k) continue;
                                 const double dy = y[q] - y[k];
                                 if (-(p[q] - p[k]) * dy > 0.0) {
                                   buf[q] -= g[0] * dy;
                                   buf[k] += g[0] * dy;
                                 }
                               }
                             }
                           });
}

namespace {
void check_labels(std::span<const double> labels, std::size_t n, const char* op) {
  if (labels.size() != n) {
    throw ShapeError(std::string(op) + ": " + std::to_string(n) + " outputs vs " + std::to_string(labels.size()) +
                     " labels");
  }
}
}  // namespace

Var binary_cross_entropy(Var probs, std::span<const double> labels) {
  const auto p = probs.value().data();
  check_labels(labels, p.size(), "binary_cross_entropy");
  double loss = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] > 0.0 && p[i] < 1.0)) {
      throw DomainError("binary_cross_entropy: probability " + std::to_string(p[i]) + " outside (0, 1)");
    }
    loss -= labels[i] * std::log(p[i]) + (1.0 - labels[i]) * std::log(1.0 - p[i]);
  }
  std::vector<double> y(labels.begin(), labels.end());
  return probs.tape->record(OpKind::bce, Tensor::scalar(loss), {probs},
                            [probs, y = std::move(y)](Tape& t, std::span<const double> g) {
                              auto buf = t.grad_buffer(probs);
                              const auto p = t.value(probs).data();
                              for (std::size_t i = 0; i < buf.size(); ++i) {
                                buf[i] += g[0] * (-y[i] / p[i] + (1.0 - y[i]) / (1.0 - p[i]));
                              }
                            });
}

Var binary_cross_entropy_logits(Var logits, std::span<const double> labels) {
  const auto z = logits.value().data();
  check_labels(labels, z.size(), "binary_cross_entropy_logits");
  double loss = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    // softplus(z) - y z, i.e. -[y log s(z) + (1-y) log(1-s(z))]
    loss += std::max(z[i], 0.0) - labels[i] * z[i] + std::log1p(std::exp(-std::abs(z[i])));
  }
  std::vector<double> y(labels.begin(), labels.end());
  return logits.tape->record(OpKind::bce_logits, Tensor::scalar(loss), {logits},
                             [logits, y = std::move(y)](Tape& t, std::span<const double> g) {
                               auto buf = t.grad_buffer(logits);
                               const auto z = t.value(logits).data();
                               for (std::size_t i = 0; i < buf.size(); ++i) {
                                 buf[i] += g[0] * (sigmoid_scalar(z[i]) - y[i]);
                               }
                             });
}

Var squared_error(Var pred, std::span<const double> truth) {
  const auto p = pred.value().data();
  if (truth.size() != p.size()) {
    throw ShapeError("squared_error: " + std::to_string(p.size()) + " predictions vs " +
                     std::to_string(truth.size()) + " targets");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) loss += (p[i] - truth[i]) * (p[i] - truth[i]);
  std::vector<double> y(truth.begin(), truth.end());
  return pred.tape->record(OpKind::squared_error, Tensor::scalar(loss), {pred},
                           [pred, y = std::move(y)](Tape& t, std::span<const double> g) {
                             auto buf = t.grad_buffer(pred);
                             const auto p = t.value(pred).data();
                             for (std::size_t i = 0; i < buf.size(); ++i) buf[i] += g[0] * 2.0 * (p[i] - y[i]);
                           });
}

}  // namespace fingat::ad
