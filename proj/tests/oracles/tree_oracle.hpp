#pragma once

// Test-only reference fitter: greedy top-down regression tree growth with
// every (feature, threshold) candidate scanned exhaustively at each node and
// each candidate's SSE recomputed naively from scratch. Shares no code or
// numerical shortcuts with the production tree (which uses centered prefix
// sums and partition bookkeeping); agreement between the two is the oracle
// check. Tie handling mirrors the production rule: lowest feature index,
// then lowest threshold.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

#include "wxbench/matrix.hpp"

namespace wxbench::oracle {

inline double subset_sse(const Matrix& y, const std::vector<int>& rows) {
  double total = 0.0;
  for (std::size_t t = 0; t < y.cols(); ++t) {
    double mean = 0.0;
    for (int r : rows) mean += y(static_cast<std::size_t>(r), t);
    mean /= static_cast<double>(rows.size());
    for (int r : rows) {
      const double d = y(static_cast<std::size_t>(r), t) - mean;
      total += d * d;
    }
  }
  return total;
}

// Training SSE of the greedily grown tree (min_samples_leaf = 1, all
// features considered at every node, split accepted only when it strictly
// reduces the node SSE).
inline double greedy_tree_sse(const Matrix& x, const Matrix& y,
                              const std::vector<int>& rows, int depth_left) {
  const double node_sse = subset_sse(y, rows);
  if (depth_left == 0 || rows.size() < 2) return node_sse;

  double best_sse = std::numeric_limits<double>::infinity();
  std::vector<int> best_left, best_right;
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::vector<int> sorted = rows;
    std::sort(sorted.begin(), sorted.end(), [&](int a, int b) {
      return x(static_cast<std::size_t>(a), f) < x(static_cast<std::size_t>(b), f);
    });
    for (std::size_t pos = 0; pos + 1 < sorted.size(); ++pos) {
      const double xv = x(static_cast<std::size_t>(sorted[pos]), f);
      const double xn = x(static_cast<std::size_t>(sorted[pos + 1]), f);
      if (xv == xn) continue;
      std::vector<int> left(sorted.begin(),
                            sorted.begin() + static_cast<std::ptrdiff_t>(pos + 1));
      std::vector<int> right(sorted.begin() + static_cast<std::ptrdiff_t>(pos + 1),
                             sorted.end());
      const double sse = subset_sse(y, left) + subset_sse(y, right);
      if (sse < best_sse) {  // strict: ties keep the earlier candidate
        best_sse = sse;
        best_left = std::move(left);
        best_right = std::move(right);
      }
    }
  }

  if (best_left.empty() || best_sse >= node_sse) return node_sse;
  return greedy_tree_sse(x, y, best_left, depth_left - 1) +
         greedy_tree_sse(x, y, best_right, depth_left - 1);
}

inline double greedy_tree_sse(const Matrix& x, const Matrix& y, int depth) {
  std::vector<int> rows(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) rows[i] = static_cast<int>(i);
  return greedy_tree_sse(x, y, rows, depth);
}

}  // namespace wxbench::oracle
