#pragma once

#include <cstddef>
#include <vector>

#include "wxbench/matrix.hpp"

namespace wxbench {

struct CorrelationResult {
  Matrix r;                           // symmetric, unit diagonal
  std::vector<bool> degenerate_cols;  // constant columns (r forced to 0)
};

// Pearson correlation of all column pairs; needs >= 2 rows. Constant columns
// yield 0 off-diagonal and are flagged.
CorrelationResult pearson_correlation(const Matrix& columns);

struct Histogram {
  std::vector<double> edges;       // bin_count + 1 edges
  std::vector<std::size_t> counts; // sums to the number of values
};

// Equal-width bins spanning [min, max]; the last bin includes its right edge.
// A degenerate range (all values equal) is widened to span 1 unit.
Histogram histogram(const std::vector<double>& values, std::size_t bin_count);

}  // namespace wxbench
