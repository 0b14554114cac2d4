#pragma once

#include <cstddef>

namespace wxbench::linalg {

// C[m x n] += A[m x k] * B[k x n]        (gemm)
// C[m x n] += A[k x m]^T * B[k x n]      (gemm_ta)
// C[m x n] += A[m x k] * B[n x k]^T      (gemm_tb)
//
// All matrices are dense row-major with no padding. Accumulating variants:
// callers zero C themselves when they want a plain product. These three
// shapes cover every matmul in the MLP/LSTM/conv forward and backward
// passes, and the kernels are tiled so the training loops stay CPU-bound on
// arithmetic rather than memory traffic.
void gemm(const double* a, const double* b, double* c, std::size_t m,
          std::size_t k, std::size_t n);
void gemm_ta(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n);
void gemm_tb(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n);

// y[n] += A[m x n]^T x[m]   and   y[m] += A[m x n] x[n]
void gemv_t(const double* a, const double* x, double* y, std::size_t m,
            std::size_t n);
void gemv(const double* a, const double* x, double* y, std::size_t m,
          std::size_t n);

double dot(const double* x, const double* y, std::size_t n);

// squared Euclidean distance
double sq_dist(const double* x, const double* y, std::size_t n);

}  // namespace wxbench::linalg
