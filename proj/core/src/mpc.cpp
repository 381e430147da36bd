#include "voimpc/mpc.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "voimpc/error.hpp"

namespace voimpc {

void MpcConfig::validate() const {
  if (horizon < 0) throw InputError("MpcConfig.horizon must be >= 0");
  if (!std::isfinite(discount) || discount < 0.0) {
    throw InputError("MpcConfig.discount must be finite and >= 0");
  }
  if (!std::isfinite(w_i) || !std::isfinite(w_e) || w_i < 0.0 || w_e < 0.0 ||
      w_i + w_e <= 0.0) {
    throw InputError("MpcConfig weights must be >= 0 and not both zero");
  }
  if (!(f_t_max > 0.0) || !(f_s_max >= f_t_max) || !std::isfinite(f_s_max)) {
    throw InputError("MpcConfig requires f_s_max >= f_t_max > 0");
  }
  if (!std::isfinite(delta) || delta <= 0.0) throw InputError("MpcConfig.delta must be > 0");
}

void NodeModel::validate() const {
  voi.validate();
  profile.validate();
  harvest.validate();
}

void Beliefs::validate(std::size_t windows) const {
  if (process_forecast.size() != windows || harvest_forecast.size() != windows) {
    throw InputError("beliefs must cover " + std::to_string(windows) + " windows, got " +
                     std::to_string(process_forecast.size()) + " process and " +
                     std::to_string(harvest_forecast.size()) + " harvest entries");
  }
  for (std::size_t k = 0; k < windows; ++k) {
    if (!std::isfinite(process_forecast[k])) {
      throw InputError("process belief at window " + std::to_string(k) + " is not finite");
    }
    if (!std::isfinite(harvest_forecast[k]) || harvest_forecast[k] < 0.0) {
      throw InputError("harvest belief at window " + std::to_string(k) +
                       " must be finite and >= 0");
    }
  }
}

double WindowResiduals::min() const {
  return std::min({soe_floor, duty_cycle, order, fs_max, ft_max, nonneg});
}

void check_decision(const Decision& d, const MpcConfig& config, const EnergyProfile& profile,
                    const std::string& where) {
  auto fail = [&](const std::string& what) {
    throw InfeasibleDecision((where.empty() ? std::string{} : where + ": ") + what +
                             " (f_s=" + std::to_string(d.f_s) + ", f_t=" + std::to_string(d.f_t) +
                             ")");
  };
  if (!std::isfinite(d.f_s) || !std::isfinite(d.f_t)) fail("non-finite frequency");
  if (d.f_s < 0.0 || d.f_t < 0.0) fail("negative frequency");
  if (d.f_s < d.f_t) fail("f_s >= f_t violated");
  if (d.f_s > config.f_s_max) fail("f_s <= f_s_max violated");
  if (d.f_t > config.f_t_max) fail("f_t <= f_t_max violated");
  if (duty_cycle_slack(d.f_s, d.f_t, profile) < 0.0) fail("duty cycle violated");
}

double window_utility(double x, const Decision& d, double z_next, const VoiParams& voi,
                      const BatteryModel& battery, const UtilityWeights& weights) {
  const double v_i = value_of_information(x, d.f_s, d.f_t, voi);
  return weights.w_i * normalize_voi(v_i, voi) + weights.w_e * soe_from_soc(z_next, battery);
}

namespace {

void check_inputs(std::size_t n_decisions, double z0, const Beliefs& beliefs,
                  const MpcConfig& config, const NodeModel& model) {
  config.validate();
  model.validate();
  if (model.voi.delta != config.delta) {
    throw InputError("VoiParams.delta and MpcConfig.delta disagree");
  }
  beliefs.validate(config.windows());
  if (n_decisions != config.windows()) {
    throw InputError("decision sequence must have " + std::to_string(config.windows()) +
                     " entries, got " + std::to_string(n_decisions));
  }
  if (!(z0 >= 0.0 && z0 <= 1.0)) throw InputError("z0 must lie in [0, 1]");
}

}  // namespace

std::vector<double> project_soc(const std::vector<Decision>& decisions, double z0,
                                const Beliefs& beliefs, const MpcConfig& config,
                                const NodeModel& model) {
  std::vector<double> z(decisions.size() + 1);
  z[0] = z0;
  for (std::size_t k = 0; k < decisions.size(); ++k) {
    z[k + 1] = soc_step({z[k]}, decisions[k].f_s, decisions[k].f_t, model.profile,
                        model.harvest, model.battery, beliefs.harvest_forecast[k], config.delta)
                   .z;
  }
  return z;
}

double horizon_objective(const std::vector<Decision>& decisions, double z0,
                         const Beliefs& beliefs, const MpcConfig& config,
                         const NodeModel& model) {
  check_inputs(decisions.size(), z0, beliefs, config, model);
  for (std::size_t k = 0; k < decisions.size(); ++k) {
    check_decision(decisions[k], config, model.profile, "window " + std::to_string(k));
  }
  const auto z = project_soc(decisions, z0, beliefs, config, model);
  double total = 0.0;
  double weight = 1.0;
  for (std::size_t k = 0; k < decisions.size(); ++k) {
    total += weight * window_utility(beliefs.process_forecast[k], decisions[k], z[k + 1],
                                     model.voi, model.battery, config.weights());
    weight /= 1.0 + config.discount;
  }
  return total;
}

std::vector<WindowResiduals> constraint_residuals(const std::vector<Decision>& decisions,
                                                  double z0, const Beliefs& beliefs,
                                                  const MpcConfig& config,
                                                  const NodeModel& model) {
  check_inputs(decisions.size(), z0, beliefs, config, model);
  std::vector<WindowResiduals> out(decisions.size());
  double z = z0;
  for (std::size_t k = 0; k < decisions.size(); ++k) {
    const auto& d = decisions[k];
    auto& r = out[k];
    r.duty_cycle = duty_cycle_slack(d.f_s, d.f_t, model.profile);
    r.order = d.f_s - d.f_t;
    r.fs_max = config.f_s_max - d.f_s;
    r.ft_max = config.f_t_max - d.f_t;
    r.nonneg = std::min(d.f_s, d.f_t);
    // Evaluate the SoC with unclipped physics so violations stay visible.
    const double q = model.battery.capacity_as();
    const double drain =
        config.delta * (std::max(d.f_s, 0.0) * model.profile.i_sense * model.profile.d_sense +
                        std::max(d.f_t, 0.0) * model.profile.i_transmit * model.profile.d_transmit +
                        model.profile.i_sleep * r.duty_cycle);
    const double harvest =
        harvest_charge(beliefs.harvest_forecast[k], model.harvest, model.battery, config.delta);
    z = std::clamp(z + (harvest - drain) / q, 0.0, 1.0);
    r.soe_floor = z - model.battery.z_min();
  }
  return out;
}

namespace {

// Log-barrier interior-point solver on a spill-variable reformulation.
//
// Variables per window k: (f_s, f_t, s) where s >= 0 is harvest discarded at a
// full battery. With spill the SoC is affine in the variables,
//   z(k+1) = z0 + sum_{j<=k} (h_j - c - a f_s,j - b f_t,j - s_j),
// and the cap z <= 1 becomes a linear constraint. Maximising over s recovers
// the clamped dynamics, since SoE is nondecreasing in z.
class BarrierSolver {
 public:
  BarrierSolver(double z0, const Beliefs& beliefs, const MpcConfig& config,
                const NodeModel& model)
      : config_(config), model_(model), z0_(z0), n_win_(config.windows()) {
    const auto& p = model.profile;
    const double q = model.battery.capacity_as();
    a_ = config.delta * (p.i_sense - p.i_sleep) * p.d_sense / q;
    b_ = config.delta * (p.i_transmit - p.i_sleep) * p.d_transmit / q;
    c_ = config.delta * p.i_sleep * kSecondsPerHour / q;
    h_.resize(n_win_);
    v_c_.resize(n_win_);
    beta_.resize(n_win_);
    double w = 1.0;
    for (std::size_t k = 0; k < n_win_; ++k) {
      h_[k] = harvest_charge(beliefs.harvest_forecast[k], model.harvest, model.battery,
                             config.delta) /
              q;
      v_c_[k] = threat_rating(beliefs.process_forecast[k], model.voi);
      beta_[k] = w;
      w /= 1.0 + config.discount;
    }
    build_constraints();
  }

  // Margin of the idle trajectory above the floor; negative means even
  // sleeping violates the floor somewhere in the horizon.
  double idle_margin() const {
    double z = z0_;
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n_win_; ++k) {
      z = std::min(1.0, z + h_[k] - c_);
      margin = std::min(margin, z - model_.battery.z_min());
    }
    return margin;
  }

  Plan run(double margin) {
    Eigen::VectorXd x = initial_point(margin);
    const int max_iterations = 10000;
    const double gap_target = 1e-8;
    const double m = static_cast<double>(A_.rows());
    double mu = 1e-3;
    int iterations = 0;
    double residual = std::numeric_limits<double>::infinity();
    bool converged = false;

    while (iterations < max_iterations) {
      // Centering by damped Newton with the concave part of the Hessian.
      for (; iterations < max_iterations; ++iterations) {
        Eigen::VectorXd slack = slacks(x);
        Eigen::VectorXd g = gradient(x, slack, mu);
        // Exact Newton when the barrier keeps the Hessian definite; otherwise
        // drop the (convex) SoE curvature, which always leaves it definite.
        Eigen::MatrixXd neg_h = negative_hessian(x, slack, mu);
        Eigen::LLT<Eigen::MatrixXd> llt(neg_h - soe_curvature(x));
        if (llt.info() != Eigen::Success) llt.compute(neg_h);
        Eigen::VectorXd dx;
        if (llt.info() == Eigen::Success) {
          dx = llt.solve(g);
        } else {
          neg_h.diagonal().array() += 1e-12 * (1.0 + neg_h.diagonal().cwiseAbs().maxCoeff());
          dx = neg_h.ldlt().solve(g);
        }
        const double decrement = g.dot(dx);
        residual = std::sqrt(std::max(decrement, 0.0));
        if (!(decrement > 1e-14)) break;

        // Largest step that keeps every slack strictly positive.
        Eigen::VectorXd rate = A_ * dx;
        double t = 1.0;
        for (Eigen::Index i = 0; i < rate.size(); ++i) {
          if (rate[i] < 0.0) t = std::min(t, -0.99 * slack[i] / rate[i]);
        }
        const double phi0 = barrier_objective(x, slack, mu);
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
          Eigen::VectorXd trial = x + t * dx;
          Eigen::VectorXd s_trial = slacks(trial);
          if ((s_trial.array() > 0.0).all() &&
              barrier_objective(trial, s_trial, mu) >= phi0 + 0.25 * t * decrement) {
            x = std::move(trial);
            accepted = true;
            break;
          }
          t *= 0.5;
        }
        if (!accepted) break;
      }
      if (m * mu <= gap_target) {
        converged = residual < 1e-6;
        break;
      }
      mu = std::max(mu * 0.1, gap_target / m);
    }

    Plan plan;
    plan.decisions.resize(n_win_);
    for (std::size_t k = 0; k < n_win_; ++k) {
      Decision d{x[3 * k], x[3 * k + 1]};
      d.f_t = std::clamp(d.f_t, 0.0, config_.f_t_max);
      d.f_s = std::clamp(d.f_s, d.f_t, config_.f_s_max);
      plan.decisions[k] = d;
    }
    plan.solver_iterations = iterations;
    plan.converged = converged;
    plan.stationarity = residual;
    return plan;
  }

 private:
  std::size_t fs(std::size_t k) const { return 3 * k; }
  std::size_t ft(std::size_t k) const { return 3 * k + 1; }
  std::size_t sp(std::size_t k) const { return 3 * k + 2; }

  // Rows of A x + offset > 0.
  void build_constraints() {
    const std::size_t n = 3 * n_win_;
    const double floor = model_.battery.z_min();
    std::vector<std::pair<Eigen::VectorXd, double>> rows;
    auto row = [&]() { return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)).eval(); };
    double harvest_sum = 0.0;
    for (std::size_t k = 0; k < n_win_; ++k) {
      {
        auto r = row();  // f_t >= 0
        r[ft(k)] = 1.0;
        rows.emplace_back(r, 0.0);
      }
      {
        auto r = row();  // f_s - f_t >= 0
        r[fs(k)] = 1.0;
        r[ft(k)] = -1.0;
        rows.emplace_back(r, 0.0);
      }
      {
        auto r = row();  // f_s_max - f_s >= 0
        r[fs(k)] = -1.0;
        rows.emplace_back(r, config_.f_s_max);
      }
      {
        auto r = row();  // f_t_max - f_t >= 0
        r[ft(k)] = -1.0;
        rows.emplace_back(r, config_.f_t_max);
      }
      {
        auto r = row();  // duty cycle
        r[fs(k)] = -model_.profile.d_sense;
        r[ft(k)] = -model_.profile.d_transmit;
        rows.emplace_back(r, kSecondsPerHour);
      }
      {
        auto r = row();  // spill >= 0
        r[sp(k)] = 1.0;
        rows.emplace_back(r, 0.0);
      }
      harvest_sum += h_[k] - c_;
      auto soc = row();  // z(k+1) as a linear function of the variables
      for (std::size_t j = 0; j <= k; ++j) {
        soc[fs(j)] = -a_;
        soc[ft(j)] = -b_;
        soc[sp(j)] = -1.0;
      }
      const double z_offset = z0_ + harvest_sum;
      rows.emplace_back(soc, z_offset - floor);  // z(k+1) >= z_min
      rows.emplace_back(-soc, 1.0 - z_offset);   // z(k+1) <= 1
    }
    A_.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n));
    offset_.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      A_.row(static_cast<Eigen::Index>(i)) = rows[i].first.transpose();
      offset_[static_cast<Eigen::Index>(i)] = rows[i].second;
    }
  }

  Eigen::VectorXd initial_point(double margin) const {
    // Small activity and spill that stay within a quarter of the idle margin.
    const double budget = 0.25 * margin / static_cast<double>(n_win_);
    const double f_t = std::min({budget / (2.0 * a_ + b_), 0.25 * config_.f_t_max,
                                 0.25 * kSecondsPerHour /
                                     (2.0 * model_.profile.d_sense + model_.profile.d_transmit)});
    Eigen::VectorXd x(static_cast<Eigen::Index>(3 * n_win_));
    double z = z0_;
    for (std::size_t k = 0; k < n_win_; ++k) {
      x[fs(k)] = 2.0 * f_t;
      x[ft(k)] = f_t;
      const double before = z + h_[k] - c_ - (2.0 * a_ + b_) * f_t;
      const double next = std::min(1.0 - budget, before - budget);
      x[sp(k)] = before - next;
      z = next;
    }
    return x;
  }

  Eigen::VectorXd slacks(const Eigen::VectorXd& x) const { return A_ * x + offset_; }

  // Post-decision SoC per window from the spill model.
  std::vector<double> soc_path(const Eigen::VectorXd& x) const {
    std::vector<double> z(n_win_);
    double cur = z0_;
    for (std::size_t k = 0; k < n_win_; ++k) {
      cur += h_[k] - c_ - a_ * x[fs(k)] - b_ * x[ft(k)] - x[sp(k)];
      z[k] = std::clamp(cur, 0.0, 1.0);
    }
    return z;
  }

  double objective(const Eigen::VectorXd& x) const {
    const auto z = soc_path(x);
    const double scale = 1.0 / (1.0 + model_.voi.d_o);
    double total = 0.0;
    for (std::size_t k = 0; k < n_win_; ++k) {
      const double f_s = std::max(x[fs(k)], 0.0);
      const double f_t = std::max(x[ft(k)], 0.0);
      const double vc = v_c_[k];
      const double v_i = vc * process_fidelity(f_s, vc, model_.voi) -
                         vc * update_delay_cost(f_t, vc, model_.voi);
      total += beta_[k] * (config_.w_i * (v_i + model_.voi.d_o) * scale +
                           config_.w_e * soe_from_soc(z[k], model_.battery));
    }
    return total;
  }

  double barrier_objective(const Eigen::VectorXd& x, const Eigen::VectorXd& slack,
                           double mu) const {
    return objective(x) + mu * slack.array().log().sum();
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& slack,
                           double mu) const {
    const auto z = soc_path(x);
    const double scale = 1.0 / (1.0 + model_.voi.d_o);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
    // Suffix sums of discounted SoE sensitivities: d/dz(k+1) affects all later windows.
    double tail = 0.0;
    for (std::size_t kk = n_win_; kk-- > 0;) {
      tail += beta_[kk] * config_.w_e * soe_slope(z[kk], model_.battery);
      const auto vg = voi_gradient(v_c_[kk], std::max(x[fs(kk)], 0.0),
                                   std::max(x[ft(kk)], 0.0), model_.voi);
      g[fs(kk)] = beta_[kk] * config_.w_i * scale * vg.d_fs - a_ * tail;
      g[ft(kk)] = beta_[kk] * config_.w_i * scale * vg.d_ft - b_ * tail;
      g[sp(kk)] = -tail;
    }
    g += mu * (A_.transpose() * slack.cwiseInverse());
    return g;
  }

  Eigen::MatrixXd negative_hessian(const Eigen::VectorXd& x, const Eigen::VectorXd& slack,
                                   double mu) const {
    const double scale = 1.0 / (1.0 + model_.voi.d_o);
    Eigen::VectorXd inv_sq = slack.array().square().inverse();
    Eigen::MatrixXd h = mu * (A_.transpose() * inv_sq.asDiagonal() * A_);
    for (std::size_t k = 0; k < n_win_; ++k) {
      const auto vg = voi_gradient(v_c_[k], std::max(x[fs(k)], 0.0), std::max(x[ft(k)], 0.0),
                                   model_.voi);
      h(fs(k), fs(k)) -= beta_[k] * config_.w_i * scale * vg.d2_fs;
      h(ft(k), ft(k)) -= beta_[k] * config_.w_i * scale * vg.d2_ft;
    }
    return h;
  }

  // Hessian of the discounted SoE terms: sum_k beta_k w_e S''(z_k) e_k e_k^T
  // with e_k the gradient of z(k+1). Positive semidefinite.
  Eigen::MatrixXd soe_curvature(const Eigen::VectorXd& x) const {
    const auto z = soc_path(x);
    const Eigen::Index n = x.size();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < n_win_; ++k) {
      e[fs(k)] = -a_;
      e[ft(k)] = -b_;
      e[sp(k)] = -1.0;
      const double c = beta_[k] * config_.w_e * soe_second_derivative(z[k]);
      if (c > 0.0) h.noalias() += c * e * e.transpose();
    }
    return h;
  }

  double soe_second_derivative(double z) const {
    const auto& battery = model_.battery;
    if (z < battery.z_min()) return 0.0;
    const auto& knots = battery.ocv_curve().knots();
    for (std::size_t i = 1; i < knots.size(); ++i) {
      if (z < knots[i].soc || i + 1 == knots.size()) {
        return (knots[i].voltage - knots[i - 1].voltage) /
               (knots[i].soc - knots[i - 1].soc) / battery.denominator_energy();
      }
    }
    return 0.0;
  }

  const MpcConfig& config_;
  const NodeModel& model_;
  double z0_;
  std::size_t n_win_;
  double a_ = 0.0, b_ = 0.0, c_ = 0.0;
  std::vector<double> h_, v_c_, beta_;
  Eigen::MatrixXd A_;
  Eigen::VectorXd offset_;
};

}  // namespace

Plan solve(double z0, const Beliefs& beliefs, const MpcConfig& config, const NodeModel& model) {
  check_inputs(config.windows(), z0, beliefs, config, model);

  BarrierSolver solver(z0, beliefs, config, model);
  const double margin = solver.idle_margin();

  Plan plan;
  if (margin <= 1e-12) {
    plan.decisions.assign(config.windows(), Decision{});
    plan.infeasible_idle = margin < 0.0;
    plan.converged = !plan.infeasible_idle;
  } else {
    plan = solver.run(margin);
  }
  plan.projected_soc = project_soc(plan.decisions, z0, beliefs, config, model);
  plan.objective_value = horizon_objective(plan.decisions, z0, beliefs, config, model);
  return plan;
}

double grid_resolution_bound(const Beliefs& /*beliefs*/, const MpcConfig& config,
                             const NodeModel& model, double grid_step) {
  const auto& p = model.profile;
  const auto& v = model.voi;
  const double q = model.battery.capacity_as();
  const double soe_lip = model.battery.ocv_curve().max_voltage() / model.battery.denominator_energy();
  const double per_fs = config.delta * (p.i_sense - p.i_sleep) * p.d_sense / q;
  const double per_ft = config.delta * (p.i_transmit - p.i_sleep) * p.d_transmit / q;
  const std::size_t n = config.windows();
  std::vector<double> beta(n);
  double w = 1.0;
  for (auto& b : beta) {
    b = w;
    w /= 1.0 + config.discount;
  }
  double bound = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double tail = 0.0;
    for (std::size_t m = k; m < n; ++m) tail += beta[m];
    const double voi_fs = beta[k] * config.w_i * v.alpha_r * v.delta / (1.0 + v.d_o);
    const double voi_ft = beta[k] * config.w_i * v.d_o * v.alpha_d / (1.0 + v.d_o);
    bound += grid_step * (voi_fs + voi_ft + config.w_e * soe_lip * tail * (per_fs + per_ft));
  }
  return bound;
}

}  // namespace voimpc
