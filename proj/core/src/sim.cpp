#include "voimpc/sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "voimpc/error.hpp"

namespace voimpc {

void Dataset::validate() const {
  const std::size_t n = timestamps.size();
  if (process.size() != n || irradiance.size() != n) {
    throw InputError("dataset series lengths differ");
  }
  if (!std::isfinite(window_delta) || window_delta <= 0.0) {
    throw InputError("dataset window_delta must be > 0");
  }
  const auto step = std::chrono::seconds(static_cast<long long>(
      std::llround(window_delta * kSecondsPerHour)));
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(process[i])) {
      throw InputError("process value at window " + std::to_string(i) + " is not finite");
    }
    if (!std::isfinite(irradiance[i]) || irradiance[i] < 0.0) {
      throw InputError("irradiance at window " + std::to_string(i) + " must be >= 0");
    }
    if (i > 0 && timestamps[i] - timestamps[i - 1] != step) {
      throw InputError("dataset timestamps are not on a uniform window grid at window " +
                       std::to_string(i));
    }
  }
}

Beliefs build_beliefs(const Dataset& dataset, std::size_t current_index,
                      const MpcConfig& config, int lookback) {
  if (lookback < 1) throw InputError("belief lookback must be >= 1");
  const auto back = static_cast<std::size_t>(lookback);
  if (current_index < back || current_index >= dataset.size()) {
    throw InputError("belief index " + std::to_string(current_index) +
                     " out of range: need " + std::to_string(back) +
                     " preceding window(s) within a dataset of " +
                     std::to_string(dataset.size()));
  }
  const double x_belief = *std::max_element(
      dataset.process.begin() + static_cast<std::ptrdiff_t>(current_index - back),
      dataset.process.begin() + static_cast<std::ptrdiff_t>(current_index));
  Beliefs b;
  const std::size_t n = config.windows();
  b.process_forecast.assign(n, x_belief);
  b.harvest_forecast.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t idx = current_index + k;
    if (idx < dataset.size()) {
      b.harvest_forecast[k] = dataset.irradiance[idx];
    } else {
      ++b.padded_windows;
    }
  }
  return b;
}

Decision round_to_feasible(const Decision& continuous, double z, double believed_irradiance,
                           const MpcConfig& config, const NodeModel& model) {
  const double fs_lo = std::floor(continuous.f_s), fs_hi = std::ceil(continuous.f_s);
  const double ft_lo = std::floor(continuous.f_t), ft_hi = std::ceil(continuous.f_t);
  std::array<Decision, 4> candidates{
      Decision{fs_lo, ft_lo}, Decision{fs_lo, ft_hi}, Decision{fs_hi, ft_lo},
      Decision{fs_hi, ft_hi}};
  auto distance = [&](const Decision& d) {
    return std::hypot(d.f_s - continuous.f_s, d.f_t - continuous.f_t);
  };
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](const Decision& a, const Decision& b) {
                     const double da = distance(a), db = distance(b);
                     if (da != db) return da < db;
                     return a.f_s + a.f_t < b.f_s + b.f_t;
                   });
  for (const auto& d : candidates) {
    if (d.f_s < 0.0 || d.f_t < 0.0 || d.f_s < d.f_t || d.f_s > config.f_s_max ||
        d.f_t > config.f_t_max || duty_cycle_slack(d.f_s, d.f_t, model.profile) < 0.0) {
      continue;
    }
    const double z_next = soc_step({z}, d.f_s, d.f_t, model.profile, model.harvest,
                                   model.battery, believed_irradiance, config.delta)
                              .z;
    if (z_next > model.battery.z_min()) return d;
  }
  return {};
}

namespace {

struct Stepper {
  const Dataset& dataset;
  const NodeModel& model;
  const MpcConfig& config;
  const SimOptions& options;

  void check(double z_initial) const {
    dataset.validate();
    config.validate();
    model.validate();
    if (dataset.window_delta != config.delta || model.voi.delta != config.delta) {
      throw InputError("dataset window, VoI delta and MPC delta must agree");
    }
    if (!(z_initial >= 0.0 && z_initial <= 1.0)) throw InputError("z_initial must lie in [0, 1]");
    if (options.belief_lookback < 1) throw InputError("belief lookback must be >= 1");
    if (!(options.restart_hysteresis >= 0.0)) {
      throw InputError("restart hysteresis must be >= 0");
    }
    if (dataset.size() < static_cast<std::size_t>(options.belief_lookback) + 1) {
      throw InputError("dataset must cover at least " +
                       std::to_string(options.belief_lookback + 1) + " windows");
    }
  }

  // Runs the shared stepping loop; `choose` returns the decision and planned
  // objective for an active window.
  template <typename Choose>
  Trace run(double z_initial, Choose&& choose) const {
    check(z_initial);
    Trace trace;
    trace.z_initial = z_initial;
    double z = z_initial;
    NodeState state = NodeState::active;
    const double z_min = model.battery.z_min();
    for (std::size_t i = static_cast<std::size_t>(options.belief_lookback); i < dataset.size();
         ++i) {
      if (state == NodeState::active && z <= z_min) {
        state = NodeState::depleted;
      } else if (state == NodeState::depleted && z >= z_min + options.restart_hysteresis) {
        state = NodeState::active;
      }
      Decision d{};
      double planned = 0.0;
      if (state == NodeState::active) choose(i, z, d, planned, trace);
      const auto t = soc_transition({z}, d.f_s, d.f_t, model.profile, model.harvest,
                                    model.battery, dataset.irradiance[i], config.delta);
      TraceRecord r;
      r.timestamp = dataset.timestamps[i];
      r.x_observed = dataset.process[i];
      r.f_s_applied = d.f_s;
      r.f_t_applied = d.f_t;
      r.z = t.next.z;
      r.soe = soe_from_soc(r.z, model.battery);
      r.voi = value_of_information(r.x_observed, d.f_s, d.f_t, model.voi);
      r.utility = window_utility(r.x_observed, d, r.z, model.voi, model.battery, config.weights());
      r.planned_objective = planned;
      r.node_state = state;
      r.drained = t.drained;
      r.harvested = t.harvested;
      r.overflow = t.overflow;
      r.underflow = t.underflow;
      trace.records.push_back(r);
      z = t.next.z;
    }
    return trace;
  }
};

}  // namespace

Trace run_hindcast(const Dataset& dataset, const NodeModel& model, const MpcConfig& config,
                   double z_initial, const SimOptions& options) {
  Stepper stepper{dataset, model, config, options};
  return stepper.run(z_initial, [&](std::size_t i, double z, Decision& d, double& planned,
                                    Trace& trace) {
    const Beliefs beliefs = build_beliefs(dataset, i, config, options.belief_lookback);
    if (beliefs.padded_windows > 0) {
      trace.warnings.push_back("window " + std::to_string(i) + ": harvest belief zero-padded for " +
                               std::to_string(beliefs.padded_windows) + " window(s)");
    }
    const Plan plan = solve(z, beliefs, config, model);
    if (plan.infeasible_idle) {
      trace.warnings.push_back("window " + std::to_string(i) +
                               ": idle plan breaks the SoC floor; holding at zero");
    }
    d = round_to_feasible(plan.decisions.front(), z, beliefs.harvest_forecast.front(), config,
                          model);
    planned = plan.objective_value;
  });
}

Trace run_static_baseline(const Dataset& dataset, const Decision& fixed, const NodeModel& model,
                          const MpcConfig& config, double z_initial, const SimOptions& options) {
  check_decision(fixed, config, model.profile, "static baseline");
  Stepper stepper{dataset, model, config, options};
  return stepper.run(z_initial, [&](std::size_t, double, Decision& d, double&, Trace&) {
    d = fixed;
  });
}

TraceSummary summarize(const Trace& trace) {
  TraceSummary s;
  s.windows = trace.records.size();
  for (const auto& r : trace.records) {
    s.cumulative_voi += r.voi;
    s.mean_f_s += r.f_s_applied;
    s.mean_f_t += r.f_t_applied;
    if (r.node_state == NodeState::depleted) ++s.depleted_windows;
  }
  if (s.windows > 0) {
    s.mean_f_s /= static_cast<double>(s.windows);
    s.mean_f_t /= static_cast<double>(s.windows);
    s.terminal_soe = trace.records.back().soe;
  }
  return s;
}

TraceComparison compare_traces(const Trace& a, const Trace& b) {
  if (a.records.size() != b.records.size()) {
    throw InputError("traces cover different numbers of windows");
  }
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    if (a.records[i].timestamp != b.records[i].timestamp) {
      throw InputError("trace timelines differ at window " + std::to_string(i));
    }
  }
  TraceComparison c;
  c.a = summarize(a);
  c.b = summarize(b);
  c.cumulative_voi_delta = c.a.cumulative_voi - c.b.cumulative_voi;
  c.terminal_soe_delta = c.a.terminal_soe - c.b.terminal_soe;
  c.depleted_windows_delta =
      static_cast<long>(c.a.depleted_windows) - static_cast<long>(c.b.depleted_windows);
  c.mean_f_s_delta = c.a.mean_f_s - c.b.mean_f_s;
  c.mean_f_t_delta = c.a.mean_f_t - c.b.mean_f_t;
  return c;
}

double energy_balance_residual(const Trace& trace, const BatteryModel& battery) {
  if (trace.records.empty()) return 0.0;
  double net = 0.0;
  for (const auto& r : trace.records) net += r.harvested - r.drained - r.overflow + r.underflow;
  const double expected = trace.z_initial + net / battery.capacity_as();
  return std::abs(trace.records.back().z - expected);
}

}  // namespace voimpc
