#pragma once

// Synthetic flood scenario used in place of a recorded stream-gauge dataset:
// a flat baseline stream level with triangular flood pulses, and a clear-sky
// diurnal irradiance profile on an hourly grid.

#include <cstdint>
#include <vector>

#include "voimpc/sim.hpp"

namespace voimpc {

struct ScenarioSpec {
  TimePoint start = TimePoint{std::chrono::sys_days{std::chrono::year{2021} /
                                                     std::chrono::July / 19}};
  int days = 5;
  double base_level = 0.5;   // m
  double peak_level = 3.5;   // m
  std::vector<double> pulse_peaks_h = {36.0, 85.0};  // hours from start
  double pulse_half_width_h = 12.0;
  double irradiance_peak = 900.0;  // W/m^2 at solar noon
  double sunrise_h = 6.0;
  double sunset_h = 18.0;
  double irradiance_scale = 1.0;
  double level_noise = 0.0;  // uniform +/- amplitude, m
  std::uint64_t seed = 0;
};

// Hourly windows; process values are levels at the window start, irradiance
// is the exact mean of the sinusoidal day profile over each window.
Dataset generate_scenario(const ScenarioSpec& spec = {});

// Windows whose process value reaches the threshold.
std::vector<bool> flood_mask(const Dataset& dataset, double threshold);

}  // namespace voimpc
