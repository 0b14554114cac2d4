#include "wxbench/features.hpp"

#include <algorithm>
#include <cmath>

#include "wxbench/errors.hpp"

namespace wxbench {

void FeatureSpec::validate() const {
  if (targets.empty() || lag_hours.empty() || roll_windows.empty())
    throw InvalidParams("feature spec sets must be non-empty");
  for (auto k : lag_hours)
    if (k < 1) throw NonPositiveLag("lag must be >= 1");
  for (auto w : roll_windows)
    if (w < 2) throw WindowTooSmall("rolling window must be >= 2");
}

std::size_t FeatureSpec::feature_count() const {
  return covariates.size() +
         targets.size() * (lag_hours.size() + 2 * roll_windows.size());
}

std::vector<std::string> FeatureSpec::feature_names() const {
  std::vector<std::string> names;
  names.reserve(feature_count());
  for (Var c : covariates) names.push_back(var_name(c));
  for (Var t : targets)
    for (auto k : lag_hours)
      names.push_back("lag_" + std::to_string(k) + "_" + var_name(t));
  for (Var t : targets)
    for (auto w : roll_windows) {
      names.push_back("rollmean_" + std::to_string(w) + "_" + var_name(t));
      names.push_back("rollstd_" + std::to_string(w) + "_" + var_name(t));
    }
  return names;
}

std::size_t FeatureSpec::first_complete_row() const {
  std::size_t max_lag = *std::max_element(lag_hours.begin(), lag_hours.end());
  std::size_t max_win = *std::max_element(roll_windows.begin(), roll_windows.end());
  return std::max(max_lag, max_win + 1);
}

std::vector<DerivedColumn> make_lag_features(
    const ObservationSeries& series, Var target,
    const std::vector<std::size_t>& lags) {
  const auto& col = series.column(target);
  const std::size_t n = col.size();
  std::vector<DerivedColumn> out;
  out.reserve(lags.size());
  for (auto k : lags) {
    if (k < 1) throw NonPositiveLag("lag must be >= 1, got " + std::to_string(k));
    if (k >= n)
      throw LagOutOfRange("lag " + std::to_string(k) +
                          " >= series length " + std::to_string(n));
    DerivedColumn c;
    c.name = "lag_" + std::to_string(k) + "_" + var_name(target);
    c.valid_from = k;
    c.values.assign(n, 0.0);
    for (std::size_t t = k; t < n; ++t) c.values[t] = col[t - k];
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<DerivedColumn> make_rolling_features(
    const ObservationSeries& series, Var target,
    const std::vector<std::size_t>& windows) {
  const auto& col = series.column(target);
  const std::size_t n = col.size();
  std::vector<DerivedColumn> out;
  out.reserve(2 * windows.size());
  for (auto w : windows) {
    if (w < 2)
      throw WindowTooSmall("rolling window must be >= 2, got " + std::to_string(w));
    DerivedColumn mean_col, std_col;
    mean_col.name = "rollmean_" + std::to_string(w) + "_" + var_name(target);
    std_col.name = "rollstd_" + std::to_string(w) + "_" + var_name(target);
    mean_col.valid_from = std_col.valid_from = w;
    mean_col.values.assign(n, 0.0);
    std_col.values.assign(n, 0.0);
    // window covers col[t-w .. t-1]
    for (std::size_t t = w; t < n; ++t) {
      double sum = 0.0;
      for (std::size_t i = t - w; i < t; ++i) sum += col[i];
      const double mean = sum / static_cast<double>(w);
      double ss = 0.0;
      for (std::size_t i = t - w; i < t; ++i) {
        const double d = col[i] - mean;
        ss += d * d;
      }
      mean_col.values[t] = mean;
      std_col.values[t] = std::sqrt(ss / static_cast<double>(w - 1));
    }
    out.push_back(std::move(mean_col));
    out.push_back(std::move(std_col));
  }
  return out;
}

FeatureMatrix assemble_matrix(const ObservationSeries& series,
                              const FeatureSpec& spec) {
  spec.validate();
  const std::size_t n = series.size();
  const std::size_t start = spec.first_complete_row();
  if (start >= n)
    throw InsufficientHistory(
        "series of length " + std::to_string(n) +
        " has no complete row (features need " + std::to_string(start) +
        " rows of history)");
  for (auto k : spec.lag_hours)
    if (k >= n)
      throw LagOutOfRange("lag " + std::to_string(k) + " >= series length " +
                          std::to_string(n));

  const std::size_t rows = n - start;
  FeatureMatrix fm;
  fm.feature_names = spec.feature_names();
  fm.row_timestamps.assign(series.timestamps.begin() +
                               static_cast<std::ptrdiff_t>(start),
                           series.timestamps.end());
  fm.x = Matrix(rows, spec.feature_count());
  fm.y = Matrix(rows, spec.targets.size());

  std::size_t col = 0;
  for (Var c : spec.covariates) {
    const auto& v = series.column(c);
    for (std::size_t r = 0; r < rows; ++r) fm.x(r, col) = v[start + r];
    ++col;
  }
  for (Var t : spec.targets) {
    auto lag_cols = make_lag_features(series, t, spec.lag_hours);
    for (const auto& lc : lag_cols) {
      for (std::size_t r = 0; r < rows; ++r) fm.x(r, col) = lc.values[start + r];
      ++col;
    }
  }
  for (Var t : spec.targets) {
    auto roll_cols = make_rolling_features(series, t, spec.roll_windows);
    for (const auto& rc : roll_cols) {
      for (std::size_t r = 0; r < rows; ++r) fm.x(r, col) = rc.values[start + r];
      ++col;
    }
  }
  for (std::size_t ti = 0; ti < spec.targets.size(); ++ti) {
    const auto& v = series.column(spec.targets[ti]);
    for (std::size_t r = 0; r < rows; ++r) fm.y(r, ti) = v[start + r];
  }
  return fm;
}

std::pair<FeatureMatrix, FeatureMatrix> chronological_split(
    const FeatureMatrix& m, double ratio) {
  const auto [ntr, nte] = split_sizes(m.rows(), ratio);
  (void)nte;
  FeatureMatrix a, b;
  a.feature_names = b.feature_names = m.feature_names;
  a.row_timestamps.assign(m.row_timestamps.begin(),
                          m.row_timestamps.begin() + static_cast<std::ptrdiff_t>(ntr));
  b.row_timestamps.assign(m.row_timestamps.begin() + static_cast<std::ptrdiff_t>(ntr),
                          m.row_timestamps.end());
  a.x = m.x.slice_rows(0, ntr);
  b.x = m.x.slice_rows(ntr, m.rows());
  a.y = m.y.slice_rows(0, ntr);
  b.y = m.y.slice_rows(ntr, m.rows());
  return {std::move(a), std::move(b)};
}

Standardizer Standardizer::fit(const Matrix& train_x) {
  if (train_x.rows() == 0 || train_x.cols() == 0)
    throw EmptyMatrix("cannot fit standardizer on an empty matrix");
  const std::size_t n = train_x.rows(), d = train_x.cols();
  Standardizer s;
  s.mean_.assign(d, 0.0);
  s.stddev_.assign(d, 1.0);
  for (std::size_t c = 0; c < d; ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) sum += train_x(r, c);
    const double mu = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double dv = train_x(r, c) - mu;
      ss += dv * dv;
    }
    const double sigma = std::sqrt(ss / static_cast<double>(n));
    if (sigma == 0.0) {
      // degenerate column: identity transform
      s.mean_[c] = 0.0;
      s.stddev_[c] = 1.0;
    } else {
      s.mean_[c] = mu;
      s.stddev_[c] = sigma;
    }
  }
  return s;
}

Matrix Standardizer::transform(const Matrix& x) const {
  if (x.cols() != cols())
    throw DimensionMismatch("standardizer fitted on " + std::to_string(cols()) +
                            " columns, got " + std::to_string(x.cols()));
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c)
      out(r, c) = (x(r, c) - mean_[c]) / stddev_[c];
  return out;
}

Matrix Standardizer::inverse_transform(const Matrix& x) const {
  if (x.cols() != cols())
    throw DimensionMismatch("standardizer fitted on " + std::to_string(cols()) +
                            " columns, got " + std::to_string(x.cols()));
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c)
      out(r, c) = x(r, c) * stddev_[c] + mean_[c];
  return out;
}

Standardizer Standardizer::from_params(std::vector<double> mean,
                                       std::vector<double> stddev) {
  if (mean.size() != stddev.size())
    throw DimensionMismatch("mean/stddev size mismatch");
  Standardizer s;
  s.mean_ = std::move(mean);
  s.stddev_ = std::move(stddev);
  return s;
}

}  // namespace wxbench
