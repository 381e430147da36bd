#include "voimpc/voi.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "voimpc/error.hpp"

namespace voimpc {
namespace {

void require_positive(double v, const char* name) {
  if (!std::isfinite(v) || v <= 0.0) {
    throw InputError(std::string("VoiParams.") + name + " must be finite and > 0, got " +
                     std::to_string(v));
  }
}

void require_frequency(double f, const char* name) {
  if (!std::isfinite(f) || f < 0.0) {
    throw InputError(std::string(name) + " must be finite and >= 0, got " + std::to_string(f));
  }
}

double floored(double v_c) {
  if (!(v_c > 0.0) || v_c > 1.0 || !std::isfinite(v_c)) {
    throw InputError("threat rating must lie in (0, 1], got " + std::to_string(v_c));
  }
  return std::max(v_c, kThreatFloor);
}

}  // namespace

void VoiParams::validate() const {
  require_positive(lambda_c, "lambda_c");
  require_positive(alpha_r, "alpha_r");
  require_positive(alpha_d, "alpha_d");
  require_positive(d_o, "d_o");
  require_positive(delta, "delta");
  if (!std::isfinite(x_c)) throw InputError("VoiParams.x_c must be finite");
}

VoiParams VoiParams::risk_inclined() {
  VoiParams p;
  p.lambda_c = 1.0;
  p.alpha_r = 0.009;
  p.alpha_d = 0.025;
  p.d_o = 0.5;
  return p;
}

VoiParams VoiParams::risk_averse() {
  VoiParams p;
  p.lambda_c = 0.5;
  p.alpha_r = 0.02;
  p.alpha_d = 0.25;
  p.d_o = 0.25;
  return p;
}

double threat_rating(double x, const VoiParams& p) {
  if (!std::isfinite(x)) throw InputError("process value must be finite");
  if (x >= p.x_c) return 1.0;
  return std::max(std::exp(-p.lambda_c * (p.x_c - x)), kThreatFloor);
}

double process_fidelity(double f_s, double v_c, const VoiParams& p) {
  require_frequency(f_s, "sampling frequency");
  return -std::expm1(-p.alpha_r * p.delta * f_s / floored(v_c));
}

double update_delay_cost(double f_t, double v_c, const VoiParams& p) {
  require_frequency(f_t, "transmission frequency");
  return p.d_o * std::exp(-p.alpha_d * f_t / floored(v_c));
}

VoiBreakdown voi_breakdown(double x, double f_s, double f_t, const VoiParams& p) {
  VoiBreakdown b;
  b.v_c = threat_rating(x, p);
  b.v_r = process_fidelity(f_s, b.v_c, p);
  b.v_d = update_delay_cost(f_t, b.v_c, p);
  b.v_i = b.v_c * b.v_r - b.v_c * b.v_d;
  return b;
}

double value_of_information(double x, double f_s, double f_t, const VoiParams& p) {
  return voi_breakdown(x, f_s, f_t, p).v_i;
}

VoiGradient voi_gradient(double v_c, double f_s, double f_t, const VoiParams& p) {
  const double vc = floored(v_c);
  const double kr = p.alpha_r * p.delta;
  const double er = std::exp(-kr * f_s / vc);
  const double ed = std::exp(-p.alpha_d * f_t / vc);
  VoiGradient g;
  g.d_fs = kr * er;
  g.d2_fs = -kr * kr / vc * er;
  g.d_ft = p.d_o * p.alpha_d * ed;
  g.d2_ft = -p.d_o * p.alpha_d * p.alpha_d / vc * ed;
  return g;
}

double normalize_voi(double v_i, const VoiParams& p) {
  return std::clamp((v_i + p.d_o) / (1.0 + p.d_o), 0.0, 1.0);
}

}  // namespace voimpc
