#include "fingat/ad/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fingat::ad::kernels {

namespace {

inline void matmul_row(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t i,
                       std::size_t k, std::size_t n) {
  double* out = c.data() + i * n;
  for (std::size_t j = 0; j < n; ++j) out[j] = 0.0;
  const double* arow = a.data() + i * k;
  for (std::size_t p = 0; p < k; ++p) {
    const double av = arow[p];
    const double* brow = b.data() + p * n;
    for (std::size_t j = 0; j < n; ++j) out[j] += av * brow[j];
  }
}

inline void grad_lhs_row(std::span<const double> g, std::span<const double> b, std::span<double> c, std::size_t i,
                         std::size_t k, std::size_t n) {
  const double* grow = g.data() + i * n;
  double* out = c.data() + i * k;
  for (std::size_t p = 0; p < k; ++p) {
    const double* brow = b.data() + p * n;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
    out[p] += acc;
  }
}

// Row p of A^T G: sum over i of A[i,p] * G[i,:], i ascending.
inline void grad_rhs_row(std::span<const double> a, std::span<const double> g, std::span<double> c, std::size_t p,
                         std::size_t m, std::size_t k, std::size_t n) {
  double* out = c.data() + p * n;
  for (std::size_t i = 0; i < m; ++i) {
    const double av = a[i * k + p];
    const double* grow = g.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) out[j] += av * grow[j];
  }
}

}  // namespace

void matmul_serial(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
                   std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) matmul_row(a, b, c, i, k, n);
}

void matmul_parallel(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
                     std::size_t k, std::size_t n) {
  const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) matmul_row(a, b, c, static_cast<std::size_t>(i), k, n);
}

void matmul_grad_lhs_serial(std::span<const double> g, std::span<const double> b, std::span<double> c,
                            std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) grad_lhs_row(g, b, c, i, k, n);
}

void matmul_grad_lhs_parallel(std::span<const double> g, std::span<const double> b, std::span<double> c,
                              std::size_t m, std::size_t k, std::size_t n) {
  const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) grad_lhs_row(g, b, c, static_cast<std::size_t>(i), k, n);
}

void matmul_grad_rhs_serial(std::span<const double> a, std::span<const double> g, std::span<double> c,
                            std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t p = 0; p < k; ++p) grad_rhs_row(a, g, c, p, m, k, n);
}

void matmul_grad_rhs_parallel(std::span<const double> a, std::span<const double> g, std::span<double> c,
                              std::size_t m, std::size_t k, std::size_t n) {
  const auto rows = static_cast<std::ptrdiff_t>(k);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < rows; ++p) grad_rhs_row(a, g, c, static_cast<std::size_t>(p), m, k, n);
}

namespace {
bool go_parallel(std::size_t m, std::size_t k, std::size_t n) {
#ifdef _OPENMP
  // Nested regions (e.g. inside the day-parallel trainer) stay serial.
  return m * k * n >= kParallelWorkThreshold && !omp_in_parallel();
#else
  (void)m, (void)k, (void)n;
  return false;
#endif
}
}  // namespace

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
            std::size_t k, std::size_t n) {
  go_parallel(m, k, n) ? matmul_parallel(a, b, c, m, k, n) : matmul_serial(a, b, c, m, k, n);
}

void matmul_grad_lhs(std::span<const double> g, std::span<const double> b, std::span<double> c, std::size_t m,
                     std::size_t k, std::size_t n) {
  go_parallel(m, k, n) ? matmul_grad_lhs_parallel(g, b, c, m, k, n) : matmul_grad_lhs_serial(g, b, c, m, k, n);
}

void matmul_grad_rhs(std::span<const double> a, std::span<const double> g, std::span<double> c, std::size_t m,
                     std::size_t k, std::size_t n) {
  go_parallel(m, k, n) ? matmul_grad_rhs_parallel(a, g, c, m, k, n) : matmul_grad_rhs_serial(a, g, c, m, k, n);
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace fingat::ad::kernels
