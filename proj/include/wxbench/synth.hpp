#pragma once

#include <cstdint>
#include <string>

#include "wxbench/timeseries.hpp"

namespace wxbench {

// Synthetic hourly weather: diurnal sinusoid plus a slow warming trend and
// noise on temperature, humidity anti-correlated with temperature, pressure
// anti-correlated too, plus plausible auxiliary channels. Deterministic for
// a given seed.
struct SynthSpec {
  std::size_t hours = 2000;
  std::uint64_t seed = 7;
  Timestamp start = 1725840000;  // 2024-09-09T00:00:00
  double temp_noise = 0.4;
  double humidity_noise = 1.5;
};

ObservationSeries synth_series(const SynthSpec& spec);
std::string synth_csv(const SynthSpec& spec);

}  // namespace wxbench
