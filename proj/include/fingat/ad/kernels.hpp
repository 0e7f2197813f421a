#pragma once

#include <cstddef>
#include <span>

namespace fingat::ad::kernels {

// All kernels compute C (+)= op(A) * op(B) over row-major buffers with a fixed
// k-inner summation order, so the serial and parallel variants agree bit for
// bit. The parallel variants split work by output row only.

// C[m x n] = A[m x k] * B[k x n]
void matmul_serial(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
                   std::size_t k, std::size_t n);
void matmul_parallel(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
                     std::size_t k, std::size_t n);

// C[m x k] += G[m x n] * B[k x n]^T   (gradient w.r.t. the left operand)
void matmul_grad_lhs_serial(std::span<const double> g, std::span<const double> b, std::span<double> c,
                            std::size_t m, std::size_t k, std::size_t n);
void matmul_grad_lhs_parallel(std::span<const double> g, std::span<const double> b, std::span<double> c,
                              std::size_t m, std::size_t k, std::size_t n);

// C[k x n] += A[m x k]^T * G[m x n]   (gradient w.r.t. the right operand)
void matmul_grad_rhs_serial(std::span<const double> a, std::span<const double> g, std::span<double> c,
                            std::size_t m, std::size_t k, std::size_t n);
void matmul_grad_rhs_parallel(std::span<const double> a, std::span<const double> g, std::span<double> c,
                              std::size_t m, std::size_t k, std::size_t n);

// Dispatchers: the parallel variant above a work threshold, serial below it.
void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
            std::size_t k, std::size_t n);
void matmul_grad_lhs(std::span<const double> g, std::span<const double> b, std::span<double> c, std::size_t m,
                     std::size_t k, std::size_t n);
void matmul_grad_rhs(std::span<const double> a, std::span<const double> g, std::span<double> c, std::size_t m,
                     std::size_t k, std::size_t n);

// Multiply-adds below which the dispatchers stay serial.
inline constexpr std::size_t kParallelWorkThreshold = 1u << 16;

int max_threads();

}  // namespace fingat::ad::kernels
