#pragma once

// Receding-horizon planner: chooses (f_s, f_t) for windows k = 0..H_p to
// maximise the discounted sum of w_i * normalized VoI + w_e * SoE(z(k+1))
// subject to the SoC floor, duty cycle, f_t <= f_s and hardware bounds.

#include <cstddef>
#include <string>
#include <vector>

#include "voimpc/energy.hpp"
#include "voimpc/voi.hpp"

namespace voimpc {

struct Decision {
  double f_s = 0.0;
  double f_t = 0.0;

  bool operator==(const Decision&) const = default;
};

struct UtilityWeights {
  double w_i = 0.5;
  double w_e = 0.5;
};

struct MpcConfig {
  int horizon = 11;  // H_p; the plan covers H_p + 1 windows
  double discount = 0.0;
  double w_i = 0.5;
  double w_e = 0.5;
  double f_s_max = 120.0;
  double f_t_max = 120.0;
  double delta = 1.0;  // hours

  void validate() const;
  std::size_t windows() const { return static_cast<std::size_t>(horizon) + 1; }
  UtilityWeights weights() const { return {w_i, w_e}; }
};

// Everything the planner knows about the node itself.
struct NodeModel {
  VoiParams voi;
  EnergyProfile profile;
  HarvestModel harvest;
  BatteryModel battery;

  void validate() const;
};

struct Beliefs {
  std::vector<double> process_forecast;  // one per window
  std::vector<double> harvest_forecast;  // mean irradiance, W/m^2
  std::size_t padded_windows = 0;        // trailing zero-filled harvest entries

  void validate(std::size_t windows) const;
};

struct Plan {
  std::vector<Decision> decisions;     // H_p + 1
  std::vector<double> projected_soc;   // H_p + 2, starting at z0
  double objective_value = 0.0;
  int solver_iterations = 0;
  bool converged = false;
  bool infeasible_idle = false;
  double stationarity = 0.0;  // Newton decrement of the last barrier subproblem
};

// Signed slack of every constraint in one window; >= 0 means satisfied.
struct WindowResiduals {
  double soe_floor = 0.0;   // z(k+1) - z_min
  double duty_cycle = 0.0;  // seconds of sleep left per hour
  double order = 0.0;       // f_s - f_t
  double fs_max = 0.0;      // f_s_max - f_s
  double ft_max = 0.0;      // f_t_max - f_t
  double nonneg = 0.0;      // min(f_s, f_t)

  double min() const;
};

double window_utility(double x, const Decision& d, double z_next, const VoiParams& voi,
                      const BatteryModel& battery, const UtilityWeights& weights);

// Throws InfeasibleDecision naming the window and the violated constraint.
// SoC-floor violations are not errors here; see constraint_residuals.
double horizon_objective(const std::vector<Decision>& decisions, double z0,
                         const Beliefs& beliefs, const MpcConfig& config,
                         const NodeModel& model);

std::vector<WindowResiduals> constraint_residuals(const std::vector<Decision>& decisions,
                                                  double z0, const Beliefs& beliefs,
                                                  const MpcConfig& config,
                                                  const NodeModel& model);

// SoC trajectory (H_p + 2 entries) under the believed harvest.
std::vector<double> project_soc(const std::vector<Decision>& decisions, double z0,
                                const Beliefs& beliefs, const MpcConfig& config,
                                const NodeModel& model);

Plan solve(double z0, const Beliefs& beliefs, const MpcConfig& config, const NodeModel& model);

// Exhaustive search over the integer grid {0, step, 2 step, ...}; exact
// dominance pruning keeps it tractable for H_p <= 2 at step 1.
Plan brute_force_plan(double z0, const Beliefs& beliefs, const MpcConfig& config,
                      const NodeModel& model, double grid_step);

// Lipschitz-style bound on how much the objective can change when every
// decision moves by at most grid_step.
double grid_resolution_bound(const Beliefs& beliefs, const MpcConfig& config,
                             const NodeModel& model, double grid_step);

// Throws InfeasibleDecision if d breaks a per-window constraint.
void check_decision(const Decision& d, const MpcConfig& config, const EnergyProfile& profile,
                    const std::string& where = {});

}  // namespace voimpc
