#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wxbench/datetime.hpp"
#include "wxbench/matrix.hpp"

namespace wxbench {

// The eight raw CSV columns minus the timestamp.
enum class Var : int {
  temp = 0,
  humidity,
  precip,
  windspeed,
  sealevelpressure,
  cloudcover,
  solarradiation,
};

inline constexpr std::size_t kNumVars = 7;
inline constexpr std::array<Var, kNumVars> kAllVars = {
    Var::temp,          Var::humidity,   Var::precip,        Var::windspeed,
    Var::sealevelpressure, Var::cloudcover, Var::solarradiation,
};

const std::string& var_name(Var v);
Var var_from_name(const std::string& name);  // throws InvalidParams

inline double missing_value() { return std::numeric_limits<double>::quiet_NaN(); }
bool is_missing(double v);

// Hourly observations stored column-wise: values[v][i] is variable v at
// timestamps[i]. Construction functions guarantee strictly increasing
// timestamps with no duplicates.
struct ObservationSeries {
  std::vector<Timestamp> timestamps;
  std::array<std::vector<double>, kNumVars> values;

  std::size_t size() const { return timestamps.size(); }
  std::vector<double>& column(Var v) { return values[static_cast<int>(v)]; }
  const std::vector<double>& column(Var v) const {
    return values[static_cast<int>(v)];
  }

  // n x 7 matrix in kAllVars order
  Matrix to_matrix() const;
};

// Closed physical plausibility interval per variable; cells outside are
// treated as sensor faults.
struct PhysicalBounds {
  std::array<std::pair<double, double>, kNumVars> limits;

  static PhysicalBounds defaults();
  std::pair<double, double>& limit(Var v) { return limits[static_cast<int>(v)]; }
  const std::pair<double, double>& limit(Var v) const {
    return limits[static_cast<int>(v)];
  }
  void validate() const;  // lower < upper everywhere
};

// One raw CSV row as parsed text, keyed by column name.
using RawRow = std::map<std::string, std::string>;

// Parses, sorts by timestamp and drops duplicate timestamps keeping the first
// occurrence in input order. Empty numeric cells become missing markers.
ObservationSeries parse_and_sort(const std::vector<RawRow>& raw_rows);

// Forward fill, then backward fill for leading gaps.
ObservationSeries fill_missing(const ObservationSeries& series);

// Marks out-of-bounds cells missing, re-fills, and reports how many cells
// were flagged.
std::pair<ObservationSeries, std::size_t> remove_outliers(
    const ObservationSeries& series, const PhysicalBounds& bounds);

// Number of consecutive-timestamp steps that are not exactly one hour.
std::size_t count_non_hourly_steps(const ObservationSeries& series);

// First ⌊ratio*n⌋ rows vs the rest. Throws InvalidRatio / TooFewSamples.
std::pair<std::size_t, std::size_t> split_sizes(std::size_t n, double ratio);
std::pair<ObservationSeries, ObservationSeries> chronological_split(
    const ObservationSeries& series, double ratio);
std::pair<Matrix, Matrix> chronological_split(const Matrix& m, double ratio);

// CSV ingestion: reads the schema
// datetime,temp,humidity,precip,windspeed,sealevelpressure,cloudcover,solarradiation
// (extra columns ignored with a warning pushed to `warnings`).
std::vector<RawRow> load_weather_csv(const std::string& path,
                                     std::vector<std::string>* warnings);

}  // namespace wxbench
