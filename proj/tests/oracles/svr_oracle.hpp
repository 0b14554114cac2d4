#pragma once

// Test-only dense QP reference for the epsilon-SVR dual:
//   maximize W(beta) = y.beta - eps*sum|beta_i| - 1/2 beta' K beta
//   subject to sum(beta) = 0, -C <= beta_i <= C.
// Solved exactly by enumerating every KKT activity pattern: each point is
// AT_NEG (-C), FREE_NEG, ZERO, FREE_POS or AT_POS (+C); free coefficients
// and the bias solve a small linear system and the pattern is kept only if
// all primal/dual feasibility conditions hold. Exponential in n, which is
// fine for n <= 10.

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "wxbench/matrix.hpp"

namespace wxbench::oracle {

struct SvrSolution {
  bool found = false;
  std::vector<double> beta;
  double bias = 0.0;
  double objective = -std::numeric_limits<double>::infinity();
};

inline bool solve_linear(std::vector<double> a, std::vector<double> b,
                         std::size_t n, std::vector<double>& out) {
  // Gaussian elimination with partial pivoting on an n x n system.
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r * n + col]) > std::fabs(a[pivot * n + col])) pivot = r;
    if (std::fabs(a[pivot * n + col]) < 1e-12) return false;
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c)
        std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a[r * n + col] / a[col * n + col];
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= factor * a[col * n + c];
      b[r] -= factor * b[col];
    }
  }
  out.assign(n, 0.0);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t c = r + 1; c < n; ++c) s -= a[r * n + c] * out[c];
    out[r] = s / a[r * n + r];
  }
  return true;
}

inline double svr_dual_objective(const Matrix& kernel,
                                 const std::vector<double>& y,
                                 const std::vector<double>& beta, double eps) {
  const std::size_t n = y.size();
  double obj = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    obj += y[i] * beta[i] - eps * std::fabs(beta[i]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      obj -= 0.5 * beta[i] * kernel(i, j) * beta[j];
  return obj;
}

inline SvrSolution svr_brute_force(const Matrix& kernel,
                                   const std::vector<double>& y, double c_box,
                                   double eps) {
  enum State { AT_NEG = 0, FREE_NEG, ZERO, FREE_POS, AT_POS };
  const std::size_t n = y.size();
  const double slack = 1e-7;

  SvrSolution best;
  std::vector<int> state(n, 0);
  std::vector<std::size_t> free_idx;
  std::vector<double> beta(n), a, rhs, sol;

  std::size_t patterns = 1;
  for (std::size_t i = 0; i < n; ++i) patterns *= 5;

  for (std::size_t code = 0; code < patterns; ++code) {
    std::size_t rem = code;
    for (std::size_t i = 0; i < n; ++i) {
      state[i] = static_cast<int>(rem % 5);
      rem /= 5;
    }

    free_idx.clear();
    double bound_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      switch (state[i]) {
        case AT_NEG: beta[i] = -c_box; bound_sum -= c_box; break;
        case AT_POS: beta[i] = c_box; bound_sum += c_box; break;
        case ZERO: beta[i] = 0.0; break;
        default: free_idx.push_back(i);
      }
    }

    const std::size_t f = free_idx.size();
    double b = 0.0;
    if (f > 0) {
      // unknowns: beta over the free set, then b
      a.assign((f + 1) * (f + 1), 0.0);
      rhs.assign(f + 1, 0.0);
      for (std::size_t r = 0; r < f; ++r) {
        const std::size_t i = free_idx[r];
        for (std::size_t cidx = 0; cidx < f; ++cidx)
          a[r * (f + 1) + cidx] = kernel(i, free_idx[cidx]);
        a[r * (f + 1) + f] = 1.0;  // + b
        const double sign = state[i] == FREE_POS ? 1.0 : -1.0;
        double fixed = 0.0;
        for (std::size_t j = 0; j < n; ++j)
          if (state[j] == AT_NEG || state[j] == AT_POS)
            fixed += kernel(i, j) * beta[j];
        rhs[r] = y[i] - sign * eps - fixed;
      }
      for (std::size_t cidx = 0; cidx < f; ++cidx) a[f * (f + 1) + cidx] = 1.0;
      rhs[f] = -bound_sum;
      if (!solve_linear(a, rhs, f + 1, sol)) continue;
      for (std::size_t r = 0; r < f; ++r) beta[free_idx[r]] = sol[r];
      b = sol[f];
    } else {
      // every coefficient pinned: the equality constraint must already hold
      // and b only needs to land in the KKT interval of the pinned points
      if (std::fabs(bound_sum) > slack) continue;
      double lo = -std::numeric_limits<double>::infinity();
      double hi = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        double kb = 0.0;
        for (std::size_t j = 0; j < n; ++j) kb += kernel(i, j) * beta[j];
        if (state[i] == ZERO) {
          lo = std::max(lo, y[i] - eps - kb);
          hi = std::min(hi, y[i] + eps - kb);
        } else if (state[i] == AT_POS) {
          hi = std::min(hi, y[i] - eps - kb);
        } else {  // AT_NEG
          lo = std::max(lo, y[i] + eps - kb);
        }
      }
      if (lo > hi + slack) continue;
      b = 0.5 * (std::max(lo, -1e15) + std::min(hi, 1e15));
    }

    // primal feasibility of the free coefficients
    bool ok = true;
    for (std::size_t r = 0; r < f && ok; ++r) {
      const std::size_t i = free_idx[r];
      if (state[i] == FREE_POS)
        ok = beta[i] > -slack && beta[i] < c_box + slack;
      else
        ok = beta[i] < slack && beta[i] > -c_box - slack;
    }
    if (!ok) continue;

    // dual feasibility of the bound/zero coefficients
    for (std::size_t i = 0; i < n && ok; ++i) {
      double kb = 0.0;
      for (std::size_t j = 0; j < n; ++j) kb += kernel(i, j) * beta[j];
      const double g_pos = y[i] - eps - kb - b;  // gradient moving beta up
      const double g_neg = y[i] + eps - kb - b;  // gradient moving beta down
      switch (state[i]) {
        case AT_POS: ok = g_pos >= -slack; break;
        case AT_NEG: ok = g_neg <= slack; break;
        case ZERO: ok = g_pos <= slack && g_neg >= -slack; break;
        default: break;
      }
    }
    if (!ok) continue;

    const double obj = svr_dual_objective(kernel, y, beta, eps);
    if (obj > best.objective) {
      best.found = true;
      best.objective = obj;
      best.beta = beta;
      best.bias = b;
    }
  }
  return best;
}

}  // namespace wxbench::oracle
