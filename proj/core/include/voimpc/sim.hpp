#pragma once

// Hindcast driver: replays a recorded dataset through the planner one window
// at a time, applying the first decision of each plan and advancing the
// battery with the recorded (not the believed) irradiance.

#include <chrono>
#include <cstddef>
#include <string>
#include <vector>

#include "voimpc/mpc.hpp"

namespace voimpc {

using TimePoint = std::chrono::sys_seconds;

struct Dataset {
  std::vector<TimePoint> timestamps;  // window starts, uniform spacing
  std::vector<double> process;        // per-window process value (max)
  std::vector<double> irradiance;     // per-window mean irradiance, W/m^2
  double window_delta = 1.0;          // hours

  std::size_t size() const { return timestamps.size(); }
  void validate() const;
};

enum class NodeState { active, depleted };

struct TraceRecord {
  TimePoint timestamp{};
  double x_observed = 0.0;
  double f_s_applied = 0.0;
  double f_t_applied = 0.0;
  double z = 0.0;    // SoC at the end of the window
  double soe = 0.0;  // soe_from_soc(z)
  double voi = 0.0;  // realised V_i at the observed process value
  double utility = 0.0;
  double planned_objective = 0.0;
  NodeState node_state = NodeState::active;

  // Charge flows of the window in A*s (see SocTransition).
  double drained = 0.0;
  double harvested = 0.0;
  double overflow = 0.0;
  double underflow = 0.0;
};

struct Trace {
  double z_initial = 0.0;
  std::vector<TraceRecord> records;
  std::vector<std::string> warnings;
};

struct SimOptions {
  double restart_hysteresis = 0.02;  // restart once z >= z_min + this
  int belief_lookback = 1;           // preceding windows used for the process belief
};

// Process belief: max over the `lookback` windows before current_index, held
// constant over the horizon. Harvest belief: the recorded irradiance of the
// next H_p + 1 windows, zero-padded past the end of the dataset.
Beliefs build_beliefs(const Dataset& dataset, std::size_t current_index,
                      const MpcConfig& config, int lookback = 1);

// Nearest integer pair that keeps every constraint, including a SoC strictly
// above the floor after the window. Ties go to the lower frequency; falls back
// to (0, 0).
Decision round_to_feasible(const Decision& continuous, double z, double believed_irradiance,
                           const MpcConfig& config, const NodeModel& model);

Trace run_hindcast(const Dataset& dataset, const NodeModel& model, const MpcConfig& config,
                   double z_initial, const SimOptions& options = {});

Trace run_static_baseline(const Dataset& dataset, const Decision& fixed, const NodeModel& model,
                          const MpcConfig& config, double z_initial,
                          const SimOptions& options = {});

struct TraceSummary {
  std::size_t windows = 0;
  double cumulative_voi = 0.0;
  double terminal_soe = 0.0;
  std::size_t depleted_windows = 0;
  double mean_f_s = 0.0;
  double mean_f_t = 0.0;
};

struct TraceComparison {
  TraceSummary a;
  TraceSummary b;
  // a - b
  double cumulative_voi_delta = 0.0;
  double terminal_soe_delta = 0.0;
  long depleted_windows_delta = 0;
  double mean_f_s_delta = 0.0;
  double mean_f_t_delta = 0.0;
};

TraceSummary summarize(const Trace& trace);
TraceComparison compare_traces(const Trace& a, const Trace& b);

// |z_final - (z_initial + net charge / capacity)| including logged clamp events.
double energy_balance_residual(const Trace& trace, const BatteryModel& battery);

}  // namespace voimpc
