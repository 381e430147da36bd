#pragma once

// Context-weighted Value of Information for a single decision window.
//
// Frequencies are per hour and the window length `delta` is in hours.
// The threat rating v_c scales both exponents, so a node near the critical
// threshold needs proportionally more samples/transmissions to reach the same
// fidelity and delay cost.

namespace voimpc {

struct VoiParams {
  double lambda_c = 1.4;   // per unit of process value
  double x_c = 3.0;        // critical threshold, process units
  double alpha_r = 0.018;  // per sample
  double alpha_d = 0.025;  // per transmission
  double d_o = 0.5;        // maximum delay cost
  double delta = 1.0;      // window length, hours

  // Throws InputError naming the offending field.
  void validate() const;

  static VoiParams risk_inclined();
  static VoiParams risk_averse();
};

// Lower bound applied to v_c before it is divided into an exponent.
inline constexpr double kThreatFloor = 1e-6;

struct VoiBreakdown {
  double v_c = 1.0;
  double v_r = 0.0;
  double v_d = 0.0;
  double v_i = 0.0;
};

struct VoiGradient {
  double d_fs = 0.0;
  double d_ft = 0.0;
  double d2_fs = 0.0;  // diagonal Hessian terms; V_i is separable in (f_s, f_t)
  double d2_ft = 0.0;
};

double threat_rating(double x, const VoiParams& p);
double process_fidelity(double f_s, double v_c, const VoiParams& p);
double update_delay_cost(double f_t, double v_c, const VoiParams& p);
double value_of_information(double x, double f_s, double f_t, const VoiParams& p);
VoiBreakdown voi_breakdown(double x, double f_s, double f_t, const VoiParams& p);

// V_i derivatives with respect to the frequencies at a given threat rating.
VoiGradient voi_gradient(double v_c, double f_s, double f_t, const VoiParams& p);

// Affine map of [-d_o, 1] onto [0, 1]; values just outside are clamped.
double normalize_voi(double v_i, const VoiParams& p);

}  // namespace voimpc
