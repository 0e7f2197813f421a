#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fingat/ad/tape.hpp"

namespace fingat::ad {

enum class Activation { identity, tanh, sigmoid, relu, leaky_relu, exp, log };

inline constexpr double kDefaultLeakySlope = 0.2;

// --- linear algebra -------------------------------------------------------
Var matmul(Var a, Var b);

// --- elementwise ----------------------------------------------------------
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
// x[m x n] + b broadcast over rows; b is [n] or [1 x n].
Var add_bias(Var x, Var b);
// scale * x + shift
Var affine(Var x, double scale, double shift);

Var map(Var x, Activation f, double slope = kDefaultLeakySlope);
Var tanh(Var x);
Var sigmoid(Var x);
Var relu(Var x);
Var leaky_relu(Var x, double slope = kDefaultLeakySlope);
Var exp(Var x);
// Throws DomainError on any non-positive entry.
Var log(Var x);

// --- normalization --------------------------------------------------------
// Softmax over every entry of x (used on vectors).
Var softmax(Var x);
// Row-wise softmax of x[m x n]. With a mask (row-major, m*n), entries whose
// mask is 0 get weight 0; each row needs at least one unmasked entry.
Var softmax_rows(Var x, std::span<const unsigned char> mask = {});

// --- structure ------------------------------------------------------------
Var concat(std::span<const Var> xs, std::size_t axis);
Var concat(std::initializer_list<Var> xs, std::size_t axis);
// Elementwise max across same-shaped tensors; the gradient for each
// coordinate goes to the first tensor (in caller order) holding the max.
Var reduce_max_elementwise(std::span<const Var> xs);
// Elementwise max over the rows of x[m x n] -> [1 x n], first row wins ties.
Var max_rows(Var x);
Var gather_rows(Var x, std::span<const std::size_t> rows);
// Column j of x[m x n] as [m x 1].
Var column(Var x, std::size_t j);
// x[m x n] with row i multiplied by c[i]; c is [m x 1] or [m].
Var scale_rows(Var x, Var c);
// out[i][j] = a[i] + b[j] for a[m x 1], b[k x 1] -> [m x k].
Var outer_sum(Var a, Var b);
Var reshape(Var x, Shape shape);

// --- reductions -----------------------------------------------------------
Var sum(Var x);
Var sum_squares(Var x);

// --- fused losses ---------------------------------------------------------
// sum over ordered pairs (q != k) of max(0, -(p_q - p_k) * (t_q - t_k)).
Var pairwise_rank_hinge(Var pred, std::span<const double> truth);
// -sum [y log p + (1 - y) log(1 - p)] for probabilities p in (0, 1).
Var binary_cross_entropy(Var probs, std::span<const double> labels);
// Same quantity evaluated from logits, p = sigmoid(logit), without overflow.
Var binary_cross_entropy_logits(Var logits, std::span<const double> labels);
// sum (p - t)^2
Var squared_error(Var pred, std::span<const double> truth);

// Convenience operators for readability in layer code.
inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }

}  // namespace fingat::ad
