#include "voimpc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "voimpc/error.hpp"

namespace voimpc {
namespace {

// Integral of the day profile from sunrise to hour-of-day h, in W*h/m^2.
double cumulative_daylight(double h, const ScenarioSpec& s) {
  const double day = s.sunset_h - s.sunrise_h;
  const double t = std::clamp(h, s.sunrise_h, s.sunset_h) - s.sunrise_h;
  return s.irradiance_peak * day / std::numbers::pi * (1.0 - std::cos(std::numbers::pi * t / day));
}

}  // namespace

Dataset generate_scenario(const ScenarioSpec& spec) {
  if (spec.days < 1) throw InputError("scenario needs at least one day");
  if (!(spec.sunset_h > spec.sunrise_h) || spec.sunrise_h < 0.0 || spec.sunset_h > 24.0) {
    throw InputError("scenario sunrise/sunset must satisfy 0 <= sunrise < sunset <= 24");
  }
  if (!(spec.pulse_half_width_h > 0.0)) throw InputError("pulse half width must be > 0");
  if (!(spec.irradiance_scale >= 0.0) || !(spec.irradiance_peak >= 0.0)) {
    throw InputError("irradiance peak and scale must be >= 0");
  }
  if (!(spec.level_noise >= 0.0)) throw InputError("level noise must be >= 0");

  std::mt19937_64 rng(spec.seed);
  Dataset ds;
  ds.window_delta = 1.0;
  const int n = spec.days * 24;
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i);
    ds.timestamps.push_back(spec.start + std::chrono::hours(i));

    double level = spec.base_level;
    for (double peak : spec.pulse_peaks_h) {
      const double shape = std::max(0.0, 1.0 - std::abs(t - peak) / spec.pulse_half_width_h);
      level = std::max(level, spec.base_level + (spec.peak_level - spec.base_level) * shape);
    }
    if (spec.level_noise > 0.0) {
      // 53-bit uniform in [0, 1) straight from the engine for portable output.
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      level += spec.level_noise * (2.0 * u - 1.0);
    }
    ds.process.push_back(std::max(level, 0.0));

    const double hod = std::fmod(t, 24.0);
    const double mean = cumulative_daylight(hod + 1.0, spec) - cumulative_daylight(hod, spec);
    ds.irradiance.push_back(spec.irradiance_scale * mean);
  }
  return ds;
}

std::vector<bool> flood_mask(const Dataset& dataset, double threshold) {
  std::vector<bool> mask(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) mask[i] = dataset.process[i] >= threshold;
  return mask;
}

}  // namespace voimpc
