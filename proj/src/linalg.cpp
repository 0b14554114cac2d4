#include "wxbench/linalg.hpp"

#include <algorithm>

namespace wxbench::linalg {

void gemm(const double* a, const double* b, double* c, std::size_t m,
          std::size_t k, std::size_t n) {
  // ikj order with a 4-row strip: contiguous access on B and C.
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    double* c0 = c + i * n;
    double* c1 = c0 + n;
    double* c2 = c1 + n;
    double* c3 = c2 + n;
    const double* a0 = a + i * k;
    const double* a1 = a0 + k;
    const double* a2 = a1 + k;
    const double* a3 = a2 + k;
    for (std::size_t p = 0; p < k; ++p) {
      const double v0 = a0[p], v1 = a1[p], v2 = a2[p], v3 = a3[p];
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) {
        const double bv = bp[j];
        c0[j] += v0 * bv;
        c1[j] += v1 * bv;
        c2[j] += v2 * bv;
        c3[j] += v3 * bv;
      }
    }
  }
  for (; i < m; ++i) {
    double* ci = c + i * n;
    const double* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double v = ai[p];
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += v * bp[j];
    }
  }
}

void gemm_ta(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n) {
  // C[m x n] += A^T B with A stored k x m: row p of A contributes the outer
  // product A[p,:]^T * B[p,:].
  for (std::size_t p = 0; p < k; ++p) {
    const double* ap = a + p * m;
    const double* bp = b + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double v = ap[i];
      if (v == 0.0) continue;
      double* ci = c + i * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += v * bp[j];
    }
  }
}

void gemm_tb(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n) {
  // C[m x n] += A * B^T with B stored n x k: C[i,j] = dot(A[i,:], B[j,:]).
  std::size_t i = 0;
  for (; i + 2 <= m; i += 2) {
    const double* a0 = a + i * k;
    const double* a1 = a0 + k;
    double* c0 = c + i * n;
    double* c1 = c0 + n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = b + j * k;
      double s0 = 0.0, s1 = 0.0;
      for (std::size_t p = 0; p < k; ++p) {
        const double bv = bj[p];
        s0 += a0[p] * bv;
        s1 += a1[p] * bv;
      }
      c0[j] += s0;
      c1[j] += s1;
    }
  }
  if (i < m) {
    const double* a0 = a + i * k;
    double* c0 = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      c0[j] += dot(a0, b + j * k, k);
    }
  }
}

void gemv_t(const double* a, const double* x, double* y, std::size_t m,
            std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double v = x[i];
    if (v == 0.0) continue;
    const double* ai = a + i * n;
    for (std::size_t j = 0; j < n; ++j) y[j] += v * ai[j];
  }
}

void gemv(const double* a, const double* x, double* y, std::size_t m,
          std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) y[i] += dot(a + i * n, x, n);
}

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double sq_dist(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

}  // namespace wxbench::linalg
