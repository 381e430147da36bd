#pragma once

// Ingestion and output: time-series CSVs (generic ISO-8601 or NASA POWER
// hourly exports), OCV tables, JSON run configuration, trace and VoI-curve CSVs.
//
// Everything is validated at load; nothing partially checked is returned.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "voimpc/scenario.hpp"
#include "voimpc/sim.hpp"

namespace voimpc {

struct TimeSeries {
  std::vector<TimePoint> timestamps;
  std::vector<double> values;
};

enum class Aggregation { max, mean };

struct ColumnSpec {
  std::string timestamp_column = "timestamp";
  std::string value_column;  // empty: the only non-timestamp column
  Aggregation aggregation = Aggregation::mean;
  double window_hours = 1.0;
};

TimePoint parse_timestamp(std::string_view text);
std::string format_timestamp(TimePoint t);

// Raw samples onto the window grid (windows aligned to multiples of the window
// length since the epoch). Gaps longer than one window and non-increasing
// timestamps are errors.
TimeSeries resample_to_windows(const std::vector<TimePoint>& t, const std::vector<double>& v,
                               Aggregation aggregation, double window_hours,
                               const std::string& source = "series");

TimeSeries load_timeseries(const std::filesystem::path& path, const ColumnSpec& spec);
void write_timeseries(const TimeSeries& series, const std::string& value_name,
                      const std::filesystem::path& path);

// Both series cropped to their common window range.
Dataset align_dataset(const TimeSeries& process, const TimeSeries& irradiance,
                      double window_hours);

OcvCurve load_ocv_table(const std::filesystem::path& path);
void write_ocv_table(const OcvCurve& curve, const std::filesystem::path& path);

// Header `timestamp,x,f_s,f_t,z,soe,voi,utility,state`, 9 significant digits.
std::string format_trace(const Trace& trace);
void write_trace(const Trace& trace, const std::filesystem::path& path);
// Reads back the CSV columns only; charge flows are not part of the file.
Trace read_trace(const std::filesystem::path& path);

struct VoiCurveRow {
  TimePoint timestamp{};
  double level = 0.0;
  double v_c_a = 0.0;
  double voi_a = 0.0;
  double v_c_b = 0.0;
  double voi_b = 0.0;
};

std::vector<VoiCurveRow> emit_voi_curve(const VoiParams& a, const VoiParams& b,
                                        const TimeSeries& levels, const Decision& fixed);
void write_voi_curve(const std::vector<VoiCurveRow>& rows, const std::filesystem::path& path);

struct DatasetSource {
  bool synthetic = true;
  ScenarioSpec scenario;
  std::filesystem::path process_csv;
  std::filesystem::path irradiance_csv;
  std::string timestamp_column = "timestamp";
  std::string process_column;
  std::string irradiance_column;
};

struct RunConfig {
  VoiParams voi;
  EnergyProfile profile;
  HarvestModel harvest;
  double capacity_ah = 2.75;
  double z_min = 0.015;
  double v_nom = 3.6;
  std::string ocv_table = "builtin:li-ion";  // or builtin:flat, or a CSV path
  MpcConfig mpc;
  SimOptions sim;
  std::optional<double> z_initial;
  std::optional<double> soe_initial;
  DatasetSource dataset;
  std::filesystem::path output = "trace.csv";

  void validate() const;
  NodeModel node_model() const;
  Dataset load_dataset() const;
  double initial_z(const BatteryModel& battery) const;
};

// (dotted key, JSON value text), e.g. {"mpc.w_e", "0.9"}; applied before
// validation so every key can be swept.
using ConfigOverrides = std::vector<std::pair<std::string, std::string>>;

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir,
                           const ConfigOverrides& overrides = {});
RunConfig load_run_config(const std::filesystem::path& path,
                          const ConfigOverrides& overrides = {});

// Human-readable list of every config key with its default.
std::string config_reference();

}  // namespace voimpc
