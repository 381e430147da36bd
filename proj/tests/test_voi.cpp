#include <doctest.h>

#include <cmath>
#include <limits>

#include "support.hpp"
#include "voimpc/error.hpp"
#include "voimpc/voi.hpp"

using namespace voimpc;
using voimpc::testing::Draw;

namespace {

// Independent long-double evaluation of the VoI composition.
long double oracle_vc(long double x, const VoiParams& p) {
  if (x >= p.x_c) return 1.0L;
  return std::max(std::exp(-(long double)p.lambda_c * ((long double)p.x_c - x)), 1e-6L);
}

long double oracle_voi(long double x, long double fs, long double ft, const VoiParams& p) {
  const long double vc = oracle_vc(x, p);
  return vc * (1.0L - std::exp(-(long double)p.alpha_r * p.delta * fs / vc)) -
         vc * p.d_o * std::exp(-(long double)p.alpha_d * ft / vc);
}

VoiParams random_params(Draw& d) {
  VoiParams p;
  p.lambda_c = d.uniform(0.1, 3.0);
  p.x_c = d.uniform(0.5, 5.0);
  p.alpha_r = d.uniform(0.001, 0.1);
  p.alpha_d = d.uniform(0.001, 0.3);
  p.d_o = d.uniform(0.05, 1.0);
  p.delta = d.uniform(0.25, 2.0);
  return p;
}

}  // namespace

TEST_CASE("threat rating") {
  VoiParams p;
  CHECK(threat_rating(3.0, p) == 1.0);
  CHECK(threat_rating(5.0, p) == 1.0);
  CHECK(threat_rating(2.0, p) == doctest::Approx(0.24659696394160643).epsilon(1e-14));
  CHECK(threat_rating(-100.0, p) == kThreatFloor);
  CHECK_THROWS_AS(threat_rating(std::nan(""), p), InputError);
  CHECK_THROWS_AS(threat_rating(std::numeric_limits<double>::infinity(), p), InputError);
}

TEST_CASE("process fidelity") {
  VoiParams p;
  CHECK(process_fidelity(0.0, 0.3, p) == 0.0);
  CHECK(process_fidelity(120.0, 1.0, p) == doctest::Approx(1.0 - std::exp(-2.16)).epsilon(1e-14));
  CHECK(process_fidelity(60.0, 0.5, p) ==
        doctest::Approx(process_fidelity(120.0, 1.0, p)).epsilon(1e-14));
  CHECK_THROWS_AS(process_fidelity(-1.0, 1.0, p), InputError);
  CHECK_THROWS_AS(process_fidelity(1.0, 0.0, p), InputError);
  CHECK_THROWS_AS(process_fidelity(1.0, 1.5, p), InputError);
}

TEST_CASE("update delay cost") {
  VoiParams p;
  CHECK(update_delay_cost(0.0, 0.7, p) == 0.5);
  CHECK(update_delay_cost(120.0, 1.0, p) == doctest::Approx(0.5 * std::exp(-3.0)).epsilon(1e-14));
  double prev = update_delay_cost(0.0, 1.0, p);
  for (double f = 10.0; f <= 2000.0; f += 10.0) {
    const double v = update_delay_cost(f, 1.0, p);
    CHECK(v < prev);
    CHECK(v >= 0.0);
    prev = v;
  }
  CHECK(prev < 1e-20);
  CHECK_THROWS_AS(update_delay_cost(-0.5, 1.0, p), InputError);
}

TEST_CASE("value of information composition") {
  VoiParams p;
  CHECK(value_of_information(3.0, 0.0, 0.0, p) == -0.5);
  CHECK(value_of_information(3.0, 120.0, 120.0, p) ==
        doctest::Approx(1.0 - std::exp(-2.16) - 0.5 * std::exp(-3.0)).epsilon(1e-14));

  // Far below the threshold both exponentials vanish and V_i approaches v_c.
  VoiParams q = p;
  q.lambda_c = std::log(1e4) / 3.0;  // v_c = 1e-4 at x = 0
  const double vc = threat_rating(0.0, q);
  CHECK(vc == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(value_of_information(0.0, 1.0, 1.0, q) == doctest::Approx(vc).epsilon(1e-9));

  const auto b = voi_breakdown(2.0, 40.0, 25.0, p);
  CHECK(b.v_i == b.v_c * b.v_r - b.v_c * b.v_d);
  CHECK(b.v_i == value_of_information(2.0, 40.0, 25.0, p));
}

TEST_CASE("value of information matches a long-double oracle") {
  Draw d(11);
  for (int i = 0; i < 2000; ++i) {
    const auto p = random_params(d);
    const double x = d.uniform(p.x_c - 6.0, p.x_c + 1.0);
    const double fs = d.uniform(0.0, 200.0);
    const double ft = d.uniform(0.0, 200.0);
    CHECK(value_of_information(x, fs, ft, p) ==
          doctest::Approx((double)oracle_voi(x, fs, ft, p)).epsilon(1e-12));
  }
}

TEST_CASE("normalization") {
  VoiParams p;
  CHECK(normalize_voi(-0.5, p) == 0.0);
  CHECK(normalize_voi(1.0, p) == 1.0);
  CHECK(normalize_voi(0.25, p) == doctest::Approx(0.5));
  CHECK(normalize_voi(-0.5 - 1e-15, p) == 0.0);
  CHECK(normalize_voi(1.0 + 1e-15, p) == 1.0);
}

TEST_CASE("gradient agrees with central differences") {
  Draw d(5);
  for (int i = 0; i < 500; ++i) {
    const auto p = random_params(d);
    const double x = d.uniform(p.x_c - 2.0, p.x_c + 0.5);
    const double vc = threat_rating(x, p);
    const double fs = d.uniform(1.0, 150.0);
    const double ft = d.uniform(1.0, 150.0);
    const auto g = voi_gradient(vc, fs, ft, p);
    const double h = 1e-4;
    const double dfs =
        (value_of_information(x, fs + h, ft, p) - value_of_information(x, fs - h, ft, p)) / (2 * h);
    const double dft =
        (value_of_information(x, fs, ft + h, p) - value_of_information(x, fs, ft - h, p)) / (2 * h);
    CHECK(g.d_fs == doctest::Approx(dfs).epsilon(1e-5).scale(1e-6));
    CHECK(g.d_ft == doctest::Approx(dft).epsilon(1e-5).scale(1e-6));
    CHECK(g.d2_fs <= 0.0);
    CHECK(g.d2_ft <= 0.0);
  }
}

TEST_CASE("parameter validation names the field") {
  VoiParams p;
  p.alpha_r = 0.0;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("alpha_r"), InputError);
  p = VoiParams{};
  p.d_o = std::nan("");
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("d_o"), InputError);
  p = VoiParams{};
  p.delta = -1.0;
  CHECK_THROWS_AS(p.validate(), InputError);
}

TEST_CASE("property: ranges, monotonicity and concavity") {
  Draw d(2024);
  for (int i = 0; i < 10000; ++i) {
    const auto p = random_params(d);
    const double x1 = d.uniform(p.x_c - 8.0, p.x_c + 2.0);
    const double x2 = x1 + d.uniform(0.0, 3.0);
    const double fs = d.uniform(0.0, 150.0);
    const double ft = d.uniform(0.0, 150.0);
    const double step = d.uniform(1e-3, 20.0);

    const auto b = voi_breakdown(x1, fs, ft, p);
    REQUIRE(b.v_c > 0.0);
    REQUIRE(b.v_c <= 1.0);
    REQUIRE(b.v_r >= 0.0);
    REQUIRE(b.v_r <= 1.0);  // 1 - exp(-t) rounds to 1 for large t
    REQUIRE(b.v_d >= 0.0);  // exp(-t) underflows to 0 for large t
    REQUIRE(b.v_d <= p.d_o);
    const double n = normalize_voi(b.v_i, p);
    REQUIRE(n >= 0.0);
    REQUIRE(n <= 1.0);

    REQUIRE(threat_rating(x2, p) >= threat_rating(x1, p));
    REQUIRE(process_fidelity(fs + step, b.v_c, p) >= process_fidelity(fs, b.v_c, p));
    REQUIRE(update_delay_cost(ft + step, b.v_c, p) <= update_delay_cost(ft, b.v_c, p));
    REQUIRE(value_of_information(x1, fs + step, ft, p) >= value_of_information(x1, fs, ft, p));
    REQUIRE(value_of_information(x1, fs, ft + step, p) >= value_of_information(x1, fs, ft, p));

    const double gs = d.uniform(0.0, 150.0);
    const double gt = d.uniform(0.0, 150.0);
    const double mid = value_of_information(x1, 0.5 * (fs + gs), 0.5 * (ft + gt), p);
    const double chord =
        0.5 * (value_of_information(x1, fs, ft, p) + value_of_information(x1, gs, gt, p));
    REQUIRE(mid >= chord - 1e-12);

    // The exponent only sees f / v_c.
    const double c = d.uniform(0.05, 1.0);
    const double vc = d.uniform(0.01, 1.0);
    REQUIRE(process_fidelity(fs, vc, p) ==
            doctest::Approx(process_fidelity(c * fs, c * vc, p)).epsilon(1e-12));
  }
}

TEST_CASE("risk-averse planner rates threats higher than the risk-inclined one") {
  const auto averse = VoiParams::risk_averse();
  const auto inclined = VoiParams::risk_inclined();
  CHECK(threat_rating(2.0, averse) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  CHECK(threat_rating(2.0, inclined) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  for (double x = -3.0; x < 3.0; x += 0.05) {
    CHECK(threat_rating(x, averse) >= threat_rating(x, inclined));
  }
}
