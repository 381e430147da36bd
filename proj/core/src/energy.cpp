#include "voimpc/energy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "voimpc/error.hpp"

namespace voimpc {
namespace {

void require_positive(double v, const std::string& name) {
  if (!std::isfinite(v) || v <= 0.0) {
    throw InputError(name + " must be finite and > 0, got " + std::to_string(v));
  }
}

void require_frequencies(double f_s, double f_t) {
  if (!std::isfinite(f_s) || f_s < 0.0) {
    throw InputError("sampling frequency must be finite and >= 0, got " + std::to_string(f_s));
  }
  if (!std::isfinite(f_t) || f_t < 0.0) {
    throw InputError("transmission frequency must be finite and >= 0, got " +
                     std::to_string(f_t));
  }
}

void require_soc(double z) {
  if (!(z >= 0.0 && z <= 1.0)) {
    throw InputError("state of charge must lie in [0, 1], got " + std::to_string(z));
  }
}

}  // namespace

void EnergyProfile::validate() const {
  require_positive(i_sleep, "EnergyProfile.i_sleep");
  require_positive(i_sense, "EnergyProfile.i_sense");
  require_positive(i_transmit, "EnergyProfile.i_transmit");
  require_positive(d_sense, "EnergyProfile.d_sense");
  require_positive(d_transmit, "EnergyProfile.d_transmit");
  if (!(i_sleep < i_sense && i_sleep < i_transmit)) {
    throw InputError("EnergyProfile.i_sleep must be below i_sense and i_transmit");
  }
}

void HarvestModel::validate() const {
  if (!(efficiency > 0.0 && efficiency <= 1.0)) {
    throw InputError("HarvestModel.efficiency must lie in (0, 1], got " +
                     std::to_string(efficiency));
  }
  require_positive(panel_area, "HarvestModel.panel_area");
}

OcvCurve::OcvCurve(std::vector<Knot> knots) : knots_(std::move(knots)) {
  if (knots_.size() < 2) throw InputError("OCV curve needs at least 2 knots");
  if (knots_.front().soc != 0.0 || knots_.back().soc != 1.0) {
    throw InputError("OCV curve must start at soc 0.0 and end at soc 1.0");
  }
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    const auto& k = knots_[i];
    if (!std::isfinite(k.voltage) || k.voltage <= 0.0) {
      throw InputError("OCV curve voltage at knot " + std::to_string(i) + " must be > 0");
    }
    if (i > 0 && !(k.soc > knots_[i - 1].soc)) {
      throw InputError("OCV curve soc not strictly increasing at knot " + std::to_string(i));
    }
  }
  // A flat curve is allowed (analytic reference); otherwise voltage must rise.
  const bool flat = std::all_of(knots_.begin(), knots_.end(),
                                [&](const Knot& k) { return k.voltage == knots_[0].voltage; });
  if (!flat) {
    for (std::size_t i = 1; i < knots_.size(); ++i) {
      if (!(knots_[i].voltage > knots_[i - 1].voltage)) {
        throw InputError("OCV curve voltage not strictly increasing at knot " +
                         std::to_string(i));
      }
    }
  }
  prefix_.resize(knots_.size(), 0.0);
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    prefix_[i] = prefix_[i - 1] + 0.5 * (knots_[i].soc - knots_[i - 1].soc) *
                                      (knots_[i].voltage + knots_[i - 1].voltage);
  }
}

OcvCurve OcvCurve::constant(double voltage) {
  return OcvCurve({{0.0, voltage}, {1.0, voltage}});
}

OcvCurve OcvCurve::li_ion_default() {
  static constexpr double kVolts[21] = {3.00, 3.30, 3.42, 3.50, 3.55, 3.59, 3.62,
                                        3.65, 3.68, 3.71, 3.74, 3.77, 3.80, 3.84,
                                        3.88, 3.92, 3.97, 4.02, 4.08, 4.14, 4.20};
  std::vector<Knot> knots;
  knots.reserve(21);
  for (int i = 0; i <= 20; ++i) knots.push_back({i / 20.0, kVolts[i]});
  return OcvCurve(std::move(knots));
}

double OcvCurve::voltage(double z) const {
  require_soc(z);
  auto it = std::upper_bound(knots_.begin(), knots_.end(), z,
                             [](double v, const Knot& k) { return v < k.soc; });
  if (it == knots_.end()) return knots_.back().voltage;
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double t = (z - lo.soc) / (hi.soc - lo.soc);
  return lo.voltage + t * (hi.voltage - lo.voltage);
}

double OcvCurve::integral_from_zero(double z) const {
  auto it = std::upper_bound(knots_.begin(), knots_.end(), z,
                             [](double v, const Knot& k) { return v < k.soc; });
  if (it == knots_.end()) return prefix_.back();
  const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
  return prefix_[i] + 0.5 * (z - knots_[i].soc) * (knots_[i].voltage + voltage(z));
}

double OcvCurve::integral(double a, double b) const {
  require_soc(a);
  require_soc(b);
  if (a > b) throw InputError("OCV integral bounds reversed");
  return integral_from_zero(b) - integral_from_zero(a);
}

BatteryModel::BatteryModel(double capacity_ah, double z_min, double v_nom, OcvCurve curve)
    : capacity_ah_(capacity_ah), z_min_(z_min), v_nom_(v_nom), curve_(std::move(curve)) {
  require_positive(capacity_ah_, "BatteryModel.capacity_ah");
  require_positive(v_nom_, "BatteryModel.v_nom");
  if (!(z_min_ >= 0.0 && z_min_ < 1.0)) {
    throw InputError("BatteryModel.z_min must lie in [0, 1), got " + std::to_string(z_min_));
  }
  denominator_ = curve_.integral(z_min_, 1.0);
}

double duty_cycle_slack(double f_s, double f_t, const EnergyProfile& profile) {
  return kSecondsPerHour - f_s * profile.d_sense - f_t * profile.d_transmit;
}

double drain_charge(double f_s, double f_t, const EnergyProfile& profile, double delta) {
  require_frequencies(f_s, f_t);
  require_positive(delta, "window length");
  const double sleep_seconds = duty_cycle_slack(f_s, f_t, profile);
  if (sleep_seconds < 0.0) {
    throw InfeasibleDecision("duty cycle exceeded: f_s=" + std::to_string(f_s) +
                             " f_t=" + std::to_string(f_t) + " leaves " +
                             std::to_string(sleep_seconds) + " s of sleep per hour");
  }
  return delta * (f_s * profile.i_sense * profile.d_sense +
                  f_t * profile.i_transmit * profile.d_transmit + profile.i_sleep * sleep_seconds);
}

double harvest_charge(double mean_irradiance, const HarvestModel& hm,
                      const BatteryModel& battery, double delta) {
  if (!std::isfinite(mean_irradiance) || mean_irradiance < 0.0) {
    throw InputError("irradiance must be finite and >= 0, got " + std::to_string(mean_irradiance));
  }
  return hm.efficiency * mean_irradiance * hm.panel_area * kSecondsPerHour * delta /
         battery.v_nom();
}

SocTransition soc_transition(SocState z, double f_s, double f_t, const EnergyProfile& profile,
                             const HarvestModel& hm, const BatteryModel& battery,
                             double mean_irradiance, double delta) {
  require_soc(z.z);
  SocTransition t;
  t.drained = drain_charge(f_s, f_t, profile, delta);
  t.harvested = harvest_charge(mean_irradiance, hm, battery, delta);
  const double q = battery.capacity_as();
  const double raw = z.z + (t.harvested - t.drained) / q;
  if (raw > 1.0) {
    t.overflow = (raw - 1.0) * q;
    t.next.z = 1.0;
  } else if (raw < 0.0) {
    t.underflow = -raw * q;
    t.next.z = 0.0;
  } else {
    t.next.z = raw;
  }
  return t;
}

SocState soc_step(SocState z, double f_s, double f_t, const EnergyProfile& profile,
                  const HarvestModel& hm, const BatteryModel& battery, double mean_irradiance,
                  double delta) {
  return soc_transition(z, f_s, f_t, profile, hm, battery, mean_irradiance, delta).next;
}

double ocv(double z, const BatteryModel& battery) {
  return battery.ocv_curve().voltage(z);
}

double soe_from_soc(double z, const BatteryModel& battery) {
  require_soc(z);
  if (z <= battery.z_min()) return 0.0;
  if (z >= 1.0) return 1.0;
  return std::clamp(battery.ocv_curve().integral(battery.z_min(), z) /
                        battery.denominator_energy(),
                    0.0, 1.0);
}

double soe_slope(double z, const BatteryModel& battery) {
  require_soc(z);
  if (z < battery.z_min()) return 0.0;
  return battery.ocv_curve().voltage(z) / battery.denominator_energy();
}

double soc_from_soe(double soe, const BatteryModel& battery) {
  if (!(soe >= 0.0 && soe <= 1.0)) {
    throw InputError("state of energy must lie in [0, 1], got " + std::to_string(soe));
  }
  if (soe == 0.0) return battery.z_min();
  if (soe == 1.0) return 1.0;
  double lo = battery.z_min();
  double hi = 1.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (soe_from_soc(mid, battery) < soe ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double shutdown_time(const EnergyProfile& profile, double capacity_ah, double z_min, double f_s,
                     double f_t) {
  require_positive(capacity_ah, "battery capacity");
  if (!(z_min >= 0.0 && z_min <= 1.0)) {
    throw InputError("z_min must lie in [0, 1], got " + std::to_string(z_min));
  }
  const double per_hour = drain_charge(f_s, f_t, profile, 1.0);
  if (!(per_hour > 0.0)) throw UnboundedError("zero drain: the battery never empties");
  return (1.0 - z_min) * capacity_ah * kSecondsPerHour / per_hour;
}

double shutdown_time(const EnergyProfile& profile, const BatteryModel& battery, double f_s,
                     double f_t) {
  return shutdown_time(profile, battery.capacity_ah(), battery.z_min(), f_s, f_t);
}

}  // namespace voimpc
