#include "wxbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "wxbench/errors.hpp"

namespace wxbench {

namespace {

void check_pair(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size())
    throw LengthMismatch("y has " + std::to_string(y.size()) +
                         " entries, yhat has " + std::to_string(yhat.size()));
  if (y.empty()) throw EmptyInput("metric of empty vectors");
}

}  // namespace

double mae(std::span<const double> y, std::span<const double> yhat) {
  check_pair(y, yhat);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += std::fabs(y[i] - yhat[i]);
  return s / static_cast<double>(y.size());
}

double rmse(std::span<const double> y, std::span<const double> yhat) {
  check_pair(y, yhat);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - yhat[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(y.size()));
}

double r2(std::span<const double> y, std::span<const double> yhat,
          bool* degenerate) {
  check_pair(y, yhat);
  if (degenerate) *degenerate = false;
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = y[i] - yhat[i];
    const double t = y[i] - mean;
    ss_res += r * r;
    ss_tot += t * t;
  }
  if (ss_tot == 0.0) {
    if (degenerate) *degenerate = true;
    return ss_res == 0.0 ? 1.0 : 0.0;
  }
  return 1.0 - ss_res / ss_tot;
}

double mape(std::span<const double> y, std::span<const double> yhat,
            const MetricConfig& cfg) {
  check_pair(y, yhat);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    s += std::fabs(y[i] - yhat[i]) / std::max(std::fabs(y[i]), cfg.eps);
  return 100.0 * s / static_cast<double>(y.size());
}

MetricSet compute_metrics(std::span<const double> y, std::span<const double> yhat,
                          const MetricConfig& cfg) {
  MetricSet m;
  m.mae = mae(y, yhat);
  m.rmse = rmse(y, yhat);
  m.r2 = r2(y, yhat);
  m.mape = mape(y, yhat, cfg);
  return m;
}

MetricSet average_two_targets(const MetricSet& a, const MetricSet& b) {
  MetricSet m;
  m.mae = (a.mae + b.mae) / 2.0;
  m.rmse = (a.rmse + b.rmse) / 2.0;
  m.r2 = (a.r2 + b.r2) / 2.0;
  m.mape = (a.mape + b.mape) / 2.0;
  return m;
}

namespace {

std::string fmt3(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string csv_row(const std::string& model, const char* split,
                    const char* target, const MetricSet& m) {
  return model + "," + split + "," + target + "," + fmt3(m.mae) + "," +
         fmt3(m.rmse) + "," + fmt3(m.r2) + "," + fmt3(m.mape) + "%";
}

std::string text_row(const std::string& model, const char* split,
                     const char* target, const MetricSet& m) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-10s %-6s %-9s %9.3f %9.3f %9.3f %9.3f%%",
                model.c_str(), split, target, m.mae, m.rmse, m.r2, m.mape);
  return buf;
}

}  // namespace

std::string report_csv_header() { return "model,split,target,mae,rmse,r2,mape"; }

std::vector<std::string> report_csv_rows(const EvalReport& r) {
  return {
      csv_row(r.model, "train", "temp", r.train_temp),
      csv_row(r.model, "train", "humidity", r.train_humidity),
      csv_row(r.model, "train", "avg", r.train_avg),
      csv_row(r.model, "test", "temp", r.test_temp),
      csv_row(r.model, "test", "humidity", r.test_humidity),
      csv_row(r.model, "test", "avg", r.test_avg),
  };
}

std::string report_text_header() {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-10s %-6s %-9s %9s %9s %9s %10s", "model",
                "split", "target", "mae", "rmse", "r2", "mape");
  std::string s = buf;
  s += "\n";
  s += std::string(68, '-');
  return s;
}

std::string report_text_block(const EvalReport& r) {
  std::string out;
  out += text_row(r.model, "train", "temp", r.train_temp) + "\n";
  out += text_row(r.model, "train", "humidity", r.train_humidity) + "\n";
  out += text_row(r.model, "train", "avg", r.train_avg) + "\n";
  out += text_row(r.model, "test", "temp", r.test_temp) + "\n";
  out += text_row(r.model, "test", "humidity", r.test_humidity) + "\n";
  out += text_row(r.model, "test", "avg", r.test_avg) + "\n";
  return out;
}

}  // namespace wxbench
