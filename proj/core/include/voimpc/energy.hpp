#pragma once

// Coulomb-counting battery, OCV-SoC curve, per-phase consumption profile
// and solar harvest. Charge bookkeeping is in ampere-seconds throughout.

#include <span>
#include <utility>
#include <vector>

namespace voimpc {

inline constexpr double kSecondsPerHour = 3600.0;

// Currents in amperes, task durations in seconds.
struct EnergyProfile {
  double i_sleep = 1.43e-3;
  double i_sense = 0.105;
  double i_transmit = 0.127;
  double d_sense = 13.0;
  double d_transmit = 4.1;

  void validate() const;
};

struct HarvestModel {
  double efficiency = 0.05;
  double panel_area = 0.01;  // m^2

  void validate() const;
};

// Piecewise-linear open-circuit voltage as a function of SoC on [0, 1].
class OcvCurve {
 public:
  struct Knot {
    double soc;
    double voltage;
    bool operator==(const Knot&) const = default;
  };

  // Throws InputError unless soc is strictly increasing from 0 to 1 and all
  // voltages are positive and strictly increasing.
  explicit OcvCurve(std::vector<Knot> knots);

  static OcvCurve constant(double voltage);
  // 21-knot Li-ion shaped curve spanning 3.0 V .. 4.2 V.
  static OcvCurve li_ion_default();

  double voltage(double z) const;
  // Exact integral of the interpolant over [a, b], 0 <= a <= b <= 1.
  double integral(double a, double b) const;

  std::span<const Knot> knots() const { return knots_; }
  double max_voltage() const { return knots_.back().voltage; }

  bool operator==(const OcvCurve&) const = default;

 private:
  double integral_from_zero(double z) const;

  std::vector<Knot> knots_;
  std::vector<double> prefix_;  // integral from 0 to each knot
};

class BatteryModel {
 public:
  BatteryModel(double capacity_ah, double z_min, double v_nom, OcvCurve curve);

  double capacity_ah() const { return capacity_ah_; }
  double capacity_as() const { return capacity_ah_ * kSecondsPerHour; }
  double z_min() const { return z_min_; }
  double v_nom() const { return v_nom_; }
  const OcvCurve& ocv_curve() const { return curve_; }
  // Integral of OCV over [z_min, 1]; SoE denominator.
  double denominator_energy() const { return denominator_; }

 private:
  double capacity_ah_;
  double z_min_;
  double v_nom_;
  OcvCurve curve_;
  double denominator_;
};

struct SocState {
  double z = 1.0;
};

// Charge flows of one window, all in ampere-seconds. `overflow` is harvest
// discarded at a full battery, `underflow` is drain that could not be taken
// below z = 0. Both are logged so traces can be reconciled exactly.
struct SocTransition {
  SocState next;
  double drained = 0.0;
  double harvested = 0.0;
  double overflow = 0.0;
  double underflow = 0.0;
};

// Seconds left over for sleep in one hour; negative means infeasible.
double duty_cycle_slack(double f_s, double f_t, const EnergyProfile& profile);

double drain_charge(double f_s, double f_t, const EnergyProfile& profile, double delta);
double harvest_charge(double mean_irradiance, const HarvestModel& hm,
                      const BatteryModel& battery, double delta);

SocTransition soc_transition(SocState z, double f_s, double f_t, const EnergyProfile& profile,
                             const HarvestModel& hm, const BatteryModel& battery,
                             double mean_irradiance, double delta);
SocState soc_step(SocState z, double f_s, double f_t, const EnergyProfile& profile,
                  const HarvestModel& hm, const BatteryModel& battery, double mean_irradiance,
                  double delta);

double ocv(double z, const BatteryModel& battery);
double soe_from_soc(double z, const BatteryModel& battery);
// dSoE/dz; zero below the floor.
double soe_slope(double z, const BatteryModel& battery);
// Inverse of soe_from_soc by bisection, to 1e-9 in z.
double soc_from_soe(double soe, const BatteryModel& battery);

// Hours from a full battery to z_min at constant frequencies, no harvest.
double shutdown_time(const EnergyProfile& profile, const BatteryModel& battery, double f_s,
                     double f_t);
double shutdown_time(const EnergyProfile& profile, double capacity_ah, double z_min, double f_s,
                     double f_t);

}  // namespace voimpc
