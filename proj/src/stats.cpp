#include "wxbench/stats.hpp"

#include <algorithm>
#include <cmath>

#include "wxbench/errors.hpp"

namespace wxbench {

CorrelationResult pearson_correlation(const Matrix& columns) {
  const std::size_t n = columns.rows(), d = columns.cols();
  if (n < 2) throw TooFewRows("correlation needs at least 2 rows");

  std::vector<double> mean(d, 0.0), sd(d, 0.0);
  for (std::size_t c = 0; c < d; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < n; ++r) s += columns(r, c);
    mean[c] = s / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double dv = columns(r, c) - mean[c];
      ss += dv * dv;
    }
    sd[c] = std::sqrt(ss / static_cast<double>(n));
  }

  CorrelationResult res;
  res.r = Matrix(d, d);
  res.degenerate_cols.assign(d, false);
  for (std::size_t c = 0; c < d; ++c) {
    res.r(c, c) = 1.0;
    if (sd[c] == 0.0) res.degenerate_cols[c] = true;
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      double value = 0.0;
      if (sd[i] != 0.0 && sd[j] != 0.0) {
        double cov = 0.0;
        for (std::size_t r = 0; r < n; ++r)
          cov += (columns(r, i) - mean[i]) * (columns(r, j) - mean[j]);
        cov /= static_cast<double>(n);
        value = cov / (sd[i] * sd[j]);
        value = std::clamp(value, -1.0, 1.0);
      }
      res.r(i, j) = value;
      res.r(j, i) = value;
    }
  }
  return res;
}

Histogram histogram(const std::vector<double>& values, std::size_t bin_count) {
  if (values.empty()) throw EmptyInput("histogram of empty value list");
  if (bin_count < 1) throw InvalidParams("bin count must be >= 1");

  const auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
  double lo = *mn_it, hi = *mx_it;
  if (lo == hi) hi = lo + 1.0;  // degenerate range

  Histogram h;
  h.edges.resize(bin_count + 1);
  h.counts.assign(bin_count, 0);
  const double width = (hi - lo) / static_cast<double>(bin_count);
  for (std::size_t i = 0; i <= bin_count; ++i)
    h.edges[i] = lo + width * static_cast<double>(i);
  h.edges.back() = hi;

  for (double v : values) {
    auto idx = static_cast<std::size_t>((v - lo) / width);
    if (idx >= bin_count) idx = bin_count - 1;  // right edge inclusive
    ++h.counts[idx];
  }
  return h;
}

}  // namespace wxbench
