#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "voimpc/error.hpp"
#include "voimpc/mpc.hpp"

namespace voimpc {
namespace {

struct Candidate {
  Decision d;
  double drain;    // A*s over the window
  double utility;  // discounted w_i * normalized VoI
};

// Integer-grid decisions of one window, reduced to the (drain, VoI) Pareto
// front. A candidate with more drain and no more VoI can never be better:
// SoC, SoE and floor feasibility are all monotone in the charge left over.
std::vector<Candidate> window_front(double x, double beta, double grid_step,
                                    const MpcConfig& config, const NodeModel& model) {
  std::vector<Candidate> all;
  const auto steps_s = static_cast<long>(std::floor(config.f_s_max / grid_step + 1e-9));
  const auto steps_t = static_cast<long>(std::floor(config.f_t_max / grid_step + 1e-9));
  for (long i = 0; i <= steps_s; ++i) {
    const double f_s = static_cast<double>(i) * grid_step;
    for (long j = 0; j <= std::min(i, steps_t); ++j) {
      const double f_t = static_cast<double>(j) * grid_step;
      if (duty_cycle_slack(f_s, f_t, model.profile) < 0.0) break;
      const double v = value_of_information(x, f_s, f_t, model.voi);
      all.push_back({{f_s, f_t},
                     drain_charge(f_s, f_t, model.profile, config.delta),
                     beta * config.w_i * normalize_voi(v, model.voi)});
    }
  }
  std::sort(all.begin(), all.end(), [](const Candidate& a, const Candidate& b) {
    if (a.drain != b.drain) return a.drain < b.drain;
    return a.utility > b.utility;
  });
  std::vector<Candidate> front;
  for (const auto& c : all) {
    if (front.empty() || c.utility > front.back().utility) front.push_back(c);
  }
  return front;
}

// Layered exhaustive search. After each window the partial sequences are
// reduced to the (SoC, value) Pareto front: the best completion is
// nondecreasing in SoC, so a sequence with less charge and no more value
// cannot lead to a better plan. Every integer sequence is still accounted for.
class Search {
 public:
  Search(double z0, const Beliefs& beliefs, const MpcConfig& config, const NodeModel& model,
         double grid_step)
      : z0_(z0), config_(config), model_(model), n_(config.windows()) {
    double w = 1.0;
    for (std::size_t k = 0; k < n_; ++k) {
      beta_.push_back(w);
      fronts_.push_back(window_front(beliefs.process_forecast[k], w, grid_step, config, model));
      harvest_.push_back(harvest_charge(beliefs.harvest_forecast[k], model.harvest,
                                        model.battery, config.delta));
      w /= 1.0 + config.discount;
    }
  }

  double leaf_estimate() const {
    double count = 1.0;
    for (const auto& f : fronts_) count *= static_cast<double>(f.size());
    return count;
  }

  bool run() {
    const double q = model_.battery.capacity_as();
    const double floor = model_.battery.z_min();
    std::vector<State> states{{z0_, 0.0, 0, 0}};
    for (std::size_t k = 0; k < n_; ++k) {
      std::vector<State> next;
      for (std::size_t s = 0; s < states.size(); ++s) {
        const auto& st = states[s];
        for (std::size_t c = 0; c < fronts_[k].size(); ++c) {
          const auto& cand = fronts_[k][c];
          ++nodes_;
          const double z = std::clamp(st.z + (harvest_[k] - cand.drain) / q, 0.0, 1.0);
          // Fronts are sorted by drain, so every later candidate also breaks the floor.
          if (z < floor) break;
          next.push_back({z,
                          st.value + cand.utility +
                              beta_[k] * config_.w_e * soe_from_soc(z, model_.battery),
                          s, c});
        }
      }
      if (next.empty()) return false;
      std::sort(next.begin(), next.end(), [](const State& a, const State& b) {
        if (a.z != b.z) return a.z > b.z;
        return a.value > b.value;
      });
      states.clear();
      for (const auto& st : next) {
        if (states.empty() || st.value > states.back().value) states.push_back(st);
      }
      layers_.push_back(states);
    }
    return true;
  }

  std::vector<Decision> best() const {
    const auto& last = layers_.back();
    std::size_t idx = 0;
    for (std::size_t i = 1; i < last.size(); ++i) {
      if (last[i].value > last[idx].value) idx = i;
    }
    std::vector<Decision> out(n_);
    for (std::size_t k = n_; k-- > 0;) {
      const auto& st = layers_[k][idx];
      out[k] = fronts_[k][st.candidate].d;
      idx = st.parent;
    }
    return out;
  }

  std::int64_t nodes() const { return nodes_; }

 private:
  struct State {
    double z;
    double value;
    std::size_t parent;     // index into the previous layer
    std::size_t candidate;  // index into this window's front
  };

  double z0_;
  const MpcConfig& config_;
  const NodeModel& model_;
  std::size_t n_;
  std::vector<double> beta_;
  std::vector<std::vector<Candidate>> fronts_;
  std::vector<double> harvest_;
  std::vector<std::vector<State>> layers_;
  std::int64_t nodes_ = 0;
};

}  // namespace

Plan brute_force_plan(double z0, const Beliefs& beliefs, const MpcConfig& config,
                      const NodeModel& model, double grid_step) {
  config.validate();
  model.validate();
  beliefs.validate(config.windows());
  if (!(z0 >= 0.0 && z0 <= 1.0)) throw InputError("z0 must lie in [0, 1]");
  if (!std::isfinite(grid_step) || grid_step <= 0.0) {
    throw InputError("grid step must be finite and > 0");
  }
  const double per_axis = std::floor(config.f_s_max / grid_step) + 1.0;
  const double guard = per_axis * per_axis * static_cast<double>(config.windows());
  if (guard > 1e8) {
    throw SearchTooLarge("brute-force grid of " + std::to_string(guard) +
                         " nodes exceeds the 1e8 guard");
  }

  Search search(z0, beliefs, config, model, grid_step);
  if (search.leaf_estimate() > 1e10) {
    throw SearchTooLarge("brute-force search over " + std::to_string(search.leaf_estimate()) +
                         " Pareto-front sequences is too large");
  }

  Plan plan;
  if (search.run()) {
    plan.decisions = search.best();
    plan.converged = true;
  } else {
    plan.decisions.assign(config.windows(), Decision{});
    plan.infeasible_idle = true;
  }
  plan.solver_iterations = static_cast<int>(std::min<std::int64_t>(search.nodes(), INT32_MAX));
  plan.projected_soc = project_soc(plan.decisions, z0, beliefs, config, model);
  plan.objective_value = horizon_objective(plan.decisions, z0, beliefs, config, model);
  return plan;
}

}  // namespace voimpc
