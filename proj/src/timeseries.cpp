#include "wxbench/timeseries.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "wxbench/csv.hpp"
#include "wxbench/errors.hpp"

namespace wxbench {

namespace {
const std::array<std::string, kNumVars> kVarNames = {
    "temp",       "humidity",   "precip",        "windspeed",
    "sealevelpressure", "cloudcover", "solarradiation"};
}

const std::string& var_name(Var v) { return kVarNames[static_cast<int>(v)]; }

Var var_from_name(const std::string& name) {
  for (std::size_t i = 0; i < kNumVars; ++i)
    if (kVarNames[i] == name) return static_cast<Var>(i);
  throw InvalidParams("unknown variable name: " + name);
}

bool is_missing(double v) { return std::isnan(v); }

Matrix ObservationSeries::to_matrix() const {
  Matrix m(size(), kNumVars);
  for (std::size_t c = 0; c < kNumVars; ++c)
    for (std::size_t r = 0; r < size(); ++r) m(r, c) = values[c][r];
  return m;
}

PhysicalBounds PhysicalBounds::defaults() {
  constexpr double inf = std::numeric_limits<double>::infinity();
  PhysicalBounds b;
  b.limit(Var::temp) = {-30.0, 55.0};
  b.limit(Var::humidity) = {0.0, 100.0};
  b.limit(Var::precip) = {0.0, inf};
  b.limit(Var::windspeed) = {0.0, inf};
  b.limit(Var::sealevelpressure) = {850.0, 1100.0};
  b.limit(Var::cloudcover) = {0.0, 100.0};
  b.limit(Var::solarradiation) = {0.0, inf};
  return b;
}

void PhysicalBounds::validate() const {
  for (Var v : kAllVars) {
    const auto& [lo, hi] = limit(v);
    if (!(lo < hi))
      throw InvalidParams("physical bounds for " + var_name(v) +
                          " must satisfy lower < upper");
  }
}

namespace {

double parse_numeric_cell(const std::string& text) {
  // trimmed empty cell means missing
  std::size_t b = 0, e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  if (b == e) return missing_value();
  try {
    std::size_t used = 0;
    double v = std::stod(text.substr(b, e - b), &used);
    if (used != e - b) return missing_value();
    return v;
  } catch (const std::exception&) {
    return missing_value();
  }
}

}  // namespace

ObservationSeries parse_and_sort(const std::vector<RawRow>& raw_rows) {
  if (raw_rows.empty()) throw EmptyDataset("no data rows");

  struct Parsed {
    Timestamp ts;
    std::size_t input_index;
    std::array<double, kNumVars> vals;
  };
  std::vector<Parsed> parsed;
  parsed.reserve(raw_rows.size());

  for (std::size_t i = 0; i < raw_rows.size(); ++i) {
    const RawRow& row = raw_rows[i];
    auto it = row.find("datetime");
    if (it == row.end())
      throw MalformedTimestamp("row " + std::to_string(i) +
                               ": missing datetime field");
    auto ts = parse_datetime(it->second);
    if (!ts)
      throw MalformedTimestamp("row " + std::to_string(i) +
                               ": unparseable datetime '" + it->second + "'");
    Parsed p;
    p.ts = *ts;
    p.input_index = i;
    for (Var v : kAllVars) {
      auto cell = row.find(var_name(v));
      p.vals[static_cast<int>(v)] =
          cell == row.end() ? missing_value() : parse_numeric_cell(cell->second);
    }
    parsed.push_back(p);
  }

  std::stable_sort(parsed.begin(), parsed.end(),
                   [](const Parsed& a, const Parsed& b) { return a.ts < b.ts; });

  ObservationSeries out;
  out.timestamps.reserve(parsed.size());
  for (auto& col : out.values) col.reserve(parsed.size());
  for (const Parsed& p : parsed) {
    if (!out.timestamps.empty() && out.timestamps.back() == p.ts)
      continue;  // duplicate timestamp: keep first arrival (stable sort)
    out.timestamps.push_back(p.ts);
    for (std::size_t c = 0; c < kNumVars; ++c) out.values[c].push_back(p.vals[c]);
  }
  return out;
}

ObservationSeries fill_missing(const ObservationSeries& series) {
  ObservationSeries out = series;
  for (Var v : kAllVars) {
    auto& col = out.column(v);
    double last = missing_value();
    for (double& x : col) {
      if (is_missing(x))
        x = last;
      else
        last = x;
    }
    // leading gap: backward fill from the first observed value
    double next = missing_value();
    for (auto it = col.rbegin(); it != col.rend(); ++it) {
      if (is_missing(*it))
        *it = next;
      else
        next = *it;
    }
    if (!col.empty() && is_missing(col.front()))
      throw AllMissingColumn("variable " + var_name(v) +
                             " has no observed value");
  }
  return out;
}

std::pair<ObservationSeries, std::size_t> remove_outliers(
    const ObservationSeries& series, const PhysicalBounds& bounds) {
  bounds.validate();
  ObservationSeries flagged = series;
  std::size_t count = 0;
  for (Var v : kAllVars) {
    const auto& [lo, hi] = bounds.limit(v);
    for (double& x : flagged.column(v)) {
      if (!is_missing(x) && (x < lo || x > hi)) {
        x = missing_value();
        ++count;
      }
    }
  }
  ObservationSeries repaired;
  try {
    repaired = fill_missing(flagged);
  } catch (const AllMissingColumn& e) {
    throw AllMissingColumn(std::string(e.what()) + " after outlier removal");
  }
  return {std::move(repaired), count};
}

std::size_t count_non_hourly_steps(const ObservationSeries& series) {
  std::size_t n = 0;
  for (std::size_t i = 1; i < series.size(); ++i)
    if (series.timestamps[i] - series.timestamps[i - 1] != kSecondsPerHour) ++n;
  return n;
}

std::pair<std::size_t, std::size_t> split_sizes(std::size_t n, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw InvalidRatio("split ratio must lie in (0,1), got " +
                       std::to_string(ratio));
  const auto train = static_cast<std::size_t>(
      std::floor(ratio * static_cast<double>(n)));
  if (train == 0 || train >= n)
    throw TooFewSamples("split of " + std::to_string(n) +
                        " rows at ratio " + std::to_string(ratio) +
                        " leaves an empty part");
  return {train, n - train};
}

std::pair<ObservationSeries, ObservationSeries> chronological_split(
    const ObservationSeries& series, double ratio) {
  const auto [ntr, nte] = split_sizes(series.size(), ratio);
  ObservationSeries a, b;
  a.timestamps.assign(series.timestamps.begin(),
                      series.timestamps.begin() + static_cast<std::ptrdiff_t>(ntr));
  b.timestamps.assign(series.timestamps.begin() + static_cast<std::ptrdiff_t>(ntr),
                      series.timestamps.end());
  for (std::size_t c = 0; c < kNumVars; ++c) {
    const auto& col = series.values[c];
    a.values[c].assign(col.begin(), col.begin() + static_cast<std::ptrdiff_t>(ntr));
    b.values[c].assign(col.begin() + static_cast<std::ptrdiff_t>(ntr), col.end());
  }
  (void)nte;
  return {std::move(a), std::move(b)};
}

std::pair<Matrix, Matrix> chronological_split(const Matrix& m, double ratio) {
  const auto [ntr, nte] = split_sizes(m.rows(), ratio);
  (void)nte;
  return {m.slice_rows(0, ntr), m.slice_rows(ntr, m.rows())};
}

std::vector<RawRow> load_weather_csv(const std::string& path,
                                     std::vector<std::string>* warnings) {
  csv::Table table = csv::read_file(path);
  if (table.header.empty()) throw EmptyDataset("file has no header: " + path);

  std::vector<std::string> known = {"datetime"};
  for (Var v : kAllVars) known.push_back(var_name(v));

  for (const auto& col : table.header) {
    if (std::find(known.begin(), known.end(), col) == known.end() && warnings)
      warnings->push_back("ignoring unknown column '" + col + "'");
  }
  if (table.column_index("datetime") < 0)
    throw MalformedTimestamp("required column 'datetime' not found in " + path);

  std::vector<RawRow> rows;
  rows.reserve(table.rows.size());
  for (const auto& fields : table.rows) {
    RawRow row;
    for (std::size_t c = 0; c < table.header.size() && c < fields.size(); ++c) {
      if (std::find(known.begin(), known.end(), table.header[c]) != known.end())
        row[table.header[c]] = fields[c];
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace wxbench
