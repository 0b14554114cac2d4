#include "wxbench/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "wxbench/rng.hpp"

namespace wxbench {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

ObservationSeries synth_series(const SynthSpec& spec) {
  Rng rng(derive_seed(spec.seed, fnv1a64("synth")));
  ObservationSeries s;
  s.timestamps.reserve(spec.hours);
  for (auto& col : s.values) col.reserve(spec.hours);

  for (std::size_t h = 0; h < spec.hours; ++h) {
    const double hd = static_cast<double>(h);
    const double hour_of_day = static_cast<double>(h % 24);

    const double diurnal = 7.0 * std::sin(kTwoPi * (hd - 9.0) / 24.0);
    const double trend = 0.0015 * hd;
    const double temp = 16.0 + trend + diurnal + spec.temp_noise * rng.normal();

    double humidity = 115.0 - 2.2 * temp + spec.humidity_noise * rng.normal();
    humidity = std::clamp(humidity, 2.0, 100.0);

    const double precip =
        rng.uniform() < 0.08 ? -2.0 * std::log(1.0 - rng.uniform() * 0.95) : 0.0;

    double windspeed =
        8.0 + 3.0 * std::sin(kTwoPi * hd / 24.0 + 1.0) + rng.normal();
    windspeed = std::max(0.0, windspeed);

    const double pressure = 1014.0 - 0.6 * (temp - 16.0) + 0.8 * rng.normal();

    double cloud = 50.0 + 0.8 * (humidity - 75.0) + 10.0 * rng.normal();
    cloud = std::clamp(cloud, 0.0, 100.0);

    double solar = 0.0;
    if (hour_of_day >= 6.0 && hour_of_day <= 18.0) {
      solar = 800.0 * std::sin(3.141592653589793 * (hour_of_day - 6.0) / 12.0);
      solar *= 1.0 - 0.006 * cloud;
      solar = std::max(0.0, solar + 5.0 * rng.normal());
    }

    s.timestamps.push_back(spec.start +
                           static_cast<Timestamp>(h) * kSecondsPerHour);
    s.column(Var::temp).push_back(temp);
    s.column(Var::humidity).push_back(humidity);
    s.column(Var::precip).push_back(precip);
    s.column(Var::windspeed).push_back(windspeed);
    s.column(Var::sealevelpressure).push_back(pressure);
    s.column(Var::cloudcover).push_back(cloud);
    s.column(Var::solarradiation).push_back(solar);
  }
  return s;
}

std::string synth_csv(const SynthSpec& spec) {
  const ObservationSeries s = synth_series(spec);
  std::string out =
      "datetime,temp,humidity,precip,windspeed,sealevelpressure,cloudcover,"
      "solarradiation\n";
  char buf[256];
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%s,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f\n",
                  format_datetime(s.timestamps[i]).c_str(),
                  s.column(Var::temp)[i], s.column(Var::humidity)[i],
                  s.column(Var::precip)[i], s.column(Var::windspeed)[i],
                  s.column(Var::sealevelpressure)[i],
                  s.column(Var::cloudcover)[i],
                  s.column(Var::solarradiation)[i]);
    out += buf;
  }
  return out;
}

}  // namespace wxbench
