#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "wxbench/matrix.hpp"
#include "wxbench/timeseries.hpp"

namespace wxbench {

// Declarative description of the engineered feature set. Column order in the
// assembled matrix is a pure function of this struct.
struct FeatureSpec {
  std::vector<Var> targets = {Var::temp, Var::humidity};
  std::vector<std::size_t> lag_hours = {2, 3, 6, 12, 24};
  std::vector<std::size_t> roll_windows = {3, 6, 12, 24};
  std::vector<Var> covariates = {Var::precip, Var::windspeed,
                                 Var::sealevelpressure, Var::cloudcover,
                                 Var::solarradiation};

  void validate() const;
  std::size_t feature_count() const;
  std::vector<std::string> feature_names() const;

  // first row index with every derived column complete:
  // max(max lag, max window + 1)
  std::size_t first_complete_row() const;
};

// Aligned design matrix. X rows correspond one-to-one to row_timestamps;
// Y holds the targets at the same hour.
struct FeatureMatrix {
  std::vector<Timestamp> row_timestamps;
  std::vector<std::string> feature_names;
  Matrix x;  // n x d
  Matrix y;  // n x |targets|

  std::size_t rows() const { return x.rows(); }
};

// A derived column before row trimming: first `valid_from` entries are
// incomplete (value unspecified there).
struct DerivedColumn {
  std::string name;
  std::vector<double> values;
  std::size_t valid_from = 0;
};

// lag_k(target)[t] = target[t-k]
std::vector<DerivedColumn> make_lag_features(const ObservationSeries& series,
                                             Var target,
                                             const std::vector<std::size_t>& lags);

// rollmean_w / rollstd_w over target[t-w .. t-1] (window excludes the
// current hour; std uses the sample divisor w-1).
std::vector<DerivedColumn> make_rolling_features(
    const ObservationSeries& series, Var target,
    const std::vector<std::size_t>& windows);

FeatureMatrix assemble_matrix(const ObservationSeries& series,
                              const FeatureSpec& spec);

std::pair<FeatureMatrix, FeatureMatrix> chronological_split(
    const FeatureMatrix& m, double ratio);

// Per-column z-scoring with statistics from training rows only. Zero-variance
// columns pass through unchanged (mu forced to 0, sigma to 1).
class Standardizer {
 public:
  Standardizer() = default;

  static Standardizer fit(const Matrix& train_x);

  Matrix transform(const Matrix& x) const;
  Matrix inverse_transform(const Matrix& x) const;

  double transform_value(std::size_t col, double v) const {
    return (v - mean_[col]) / stddev_[col];
  }
  double inverse_value(std::size_t col, double v) const {
    return v * stddev_[col] + mean_[col];
  }

  std::size_t cols() const { return mean_.size(); }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& stddev() const { return stddev_; }

  static Standardizer from_params(std::vector<double> mean,
                                  std::vector<double> stddev);

 private:
  std::vector<double> mean_;
  std::vector<double> stddev_;  // population sigma, 1 where degenerate
};

}  // namespace wxbench
