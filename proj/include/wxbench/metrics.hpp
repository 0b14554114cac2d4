#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wxbench {

// MAPE denominator guard: smallest value |y| may take before being clamped.
// Matches the machine epsilon of 64-bit floats.
struct MetricConfig {
  double eps = 2.220446049250313e-16;
};

struct MetricSet {
  double mae = 0.0;
  double rmse = 0.0;
  double r2 = 0.0;
  double mape = 0.0;  // percent
};

double mae(std::span<const double> y, std::span<const double> yhat);
double rmse(std::span<const double> y, std::span<const double> yhat);

// 1 - SS_res/SS_tot. Degenerate rule: when Var(y) = 0 the result is 1 for a
// perfect fit and 0 otherwise, with `degenerate` (if given) set to true.
double r2(std::span<const double> y, std::span<const double> yhat,
          bool* degenerate = nullptr);

// 100 * mean(|y - yhat| / max(|y|, eps)); always finite.
double mape(std::span<const double> y, std::span<const double> yhat,
            const MetricConfig& cfg = {});

MetricSet compute_metrics(std::span<const double> y, std::span<const double> yhat,
                          const MetricConfig& cfg = {});

MetricSet average_two_targets(const MetricSet& a, const MetricSet& b);

// Per-split, per-target scores of one model run, ready to render.
struct EvalReport {
  std::string model;
  MetricSet train_temp, train_humidity, train_avg;
  MetricSet test_temp, test_humidity, test_avg;
};

// CSV rows `model,split,target,mae,rmse,r2,mape` (3 decimals, mape carries a
// trailing '%'); `header_row` emits the column names.
std::string report_csv_header();
std::vector<std::string> report_csv_rows(const EvalReport& r);

// Aligned fixed-width table block for one model.
std::string report_text_block(const EvalReport& r);
std::string report_text_header();

}  // namespace wxbench
