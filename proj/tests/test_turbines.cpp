#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include <vshp/sim.hpp>
#include <vshp/turbines.hpp>

#include "helpers.hpp"

using namespace vshp;

namespace {
const PlantParams prm = default_params();
const TurbineParams& T = prm.turbine;
const WaterwayParams& W = prm.waterway;
}

TEST_CASE("runner kinematics") {
  const EulerKinematics k = euler_kinematics(0.9, T, W);
  CHECK(k.kappa == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(k.alpha_1 == doctest::Approx(0.738).epsilon(1e-14));

  const EulerKinematics closed = euler_kinematics(0.0, T, W);
  CHECK(closed.kappa == 0.0);
  CHECK(closed.alpha_1 == 0.0);

  // boundary kappa sin(alpha_1R) = 1 is accepted with alpha_1 = pi/2
  const double g_edge = (T.Q_Rt / W.Q_R) / std::sin(T.alpha_1R);
  const EulerKinematics edge = euler_kinematics(g_edge, T, W);
  CHECK(edge.alpha_1 == doctest::Approx(M_PI / 2).epsilon(1e-9));
  CHECK_THROWS_WITH_AS(euler_kinematics(g_edge * 1.01, T, W), doctest::Contains("kinematic"),
                       ModelError);
}

TEST_CASE("Euler runner at the rated point") {
  const EulerStep s = euler_step_quantities(1.0, 1.0, 1.0, 0.9, T, W, W.T_w);
  // independent hand evaluation: m_s = xi / cos(alpha_1R)
  CHECK(s.out.m_s == doctest::Approx(1.2246293948687863).epsilon(1e-12));
  CHECK(s.out.eta_h == doctest::Approx(0.8486293948687863).epsilon(1e-12));
  CHECK(s.dq_t == doctest::Approx(0.0).scale(1.0));
  CHECK(s.out.T_m == doctest::Approx(s.out.m_s - T.psi).epsilon(1e-14));
  CHECK(s.out.P_m == s.out.T_m * 1.0);
  CHECK(s.out.q == doctest::Approx(153.0 / 170.0).epsilon(1e-14));
}

TEST_CASE("Euler momentum is stationary along q_t = kappa sqrt(h_t) at rated speed") {
  for (double g : {0.5, 0.7, 0.9, 1.0}) {
    for (double h_t : {0.8, 1.0, 1.1}) {
      const EulerKinematics k = euler_kinematics(g, T, W);
      const EulerStep s = euler_step_quantities(k.kappa * std::sqrt(h_t), 1.0, h_t, g, T, W, W.T_w);
      CHECK(std::abs(s.dq_t) < 1e-12);
    }
  }
}

TEST_CASE("torque rises as speed drops, power eventually falls") {
  const EulerStep ref = euler_step_quantities(1.0, 1.0, 1.0, 0.9, T, W, W.T_w);
  const EulerStep slow = euler_step_quantities(1.0, 0.6, 1.0, 0.9, T, W, W.T_w);
  const EulerStep crawl = euler_step_quantities(1.0, 0.2, 1.0, 0.9, T, W, W.T_w);
  CHECK(slow.out.T_m > ref.out.T_m);
  CHECK(crawl.out.P_m < ref.out.P_m);
}

TEST_CASE("Euler singularities raise errors") {
  CHECK_THROWS_WITH_AS(euler_step_quantities(0.5, 1.0, 1.0, 0.0, T, W, W.T_w),
                       doctest::Contains("singular opening"), ModelError);
  CHECK_THROWS_WITH_AS(euler_step_quantities(1.0, 1.0, -0.1, 0.9, T, W, W.T_w),
                       doctest::Contains("head collapse"), ModelError);
}

TEST_CASE("IEEE turbine law") {
  const IeeeOutputs a = ieee_outputs(0.7, 1.0, 0.0, 1.0, T);
  CHECK(a.q == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(a.P_m == doctest::Approx(0.67725).epsilon(1e-12));

  const IeeeOutputs closed = ieee_outputs(0.0, 1.0, 0.0, 1.0, T);
  CHECK(closed.q == 0.0);
  CHECK(closed.P_m == doctest::Approx(-T.A_t * T.q_nl).epsilon(1e-12));  // motoring at no flow

  const IeeeOutputs damped = ieee_outputs(1.0, 1.05, 0.05, 1.0, T);
  const IeeeOutputs undamped = ieee_outputs(1.0, 1.05, 0.0, 1.0, T);
  CHECK(undamped.P_m - damped.P_m == doctest::Approx(0.025).epsilon(1e-12));

  CHECK_THROWS_WITH_AS(ieee_outputs(0.5, 1.0, 0.0, -0.2, T), doctest::Contains("head collapse"),
                       ModelError);
}

TEST_CASE("Hygov rigid-column law") {
  const HygovStep fixed = hygov_step_quantities(0.5, 0.5, 0.0, T, W.T_w);
  CHECK(fixed.h == doctest::Approx(1.0));
  CHECK(fixed.dq == doctest::Approx(0.0).scale(1.0));
  CHECK(fixed.P_m == doctest::Approx(0.46225).epsilon(1e-12));

  const HygovStep s = hygov_step_quantities(0.5, 1.0, 0.0, T, W.T_w);
  CHECK(s.h == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(s.dq == doctest::Approx(0.6193228736581338).epsilon(1e-12));

  CHECK_THROWS_WITH_AS(hygov_step_quantities(0.5, 0.0, 0.0, T, W.T_w),
                       doctest::Contains("singularity"), ModelError);
}

TEST_CASE("linearised turbine: settled gain, reverse response, transfer identity") {
  const LinearisedStep settled = linearised_step_quantities(0.7, 0.7, W.T_w);
  CHECK(settled.P_m == doctest::Approx(0.7));
  CHECK(settled.dx == 0.0);

  // step from 0 to dg: immediate P_m = -2 dg, final P_m = +dg
  const double dg = 0.1;
  CHECK(linearised_step_quantities(0.0, dg, W.T_w).P_m == doctest::Approx(-2.0 * dg));
  Eigen::VectorXd x(1);
  x << 0.0;
  auto f = [&](const Eigen::VectorXd& xs, double) {
    Eigen::VectorXd d(1);
    d << linearised_step_quantities(xs(0), dg, W.T_w).dx;
    return d;
  };
  for (int k = 0; k < 50000; ++k) x = rk4_step(f, x, k * 1e-3, 1e-3);
  CHECK(linearised_step_quantities(x(0), dg, W.T_w).P_m == doctest::Approx(dg).epsilon(1e-9));

  // realization equals (1 - T_w s)/(1 + T_w s / 2) at sampled frequencies
  for (int i = 1; i <= 10; ++i) {
    const double f_hz = 0.01 * std::pow(10.0, i / 5.0);
    const std::complex<double> s(0.0, 2 * M_PI * f_hz);
    const std::complex<double> exact = (1.0 - W.T_w * s) / (1.0 + 0.5 * W.T_w * s);
    // dx/dt = (g - x)/(Tw/2), P = 3x - 2g
    const std::complex<double> a(-2.0 / W.T_w, 0.0);
    const std::complex<double> realized = 3.0 * (2.0 / W.T_w) / (s - a) - 2.0;
    CHECK(std::abs(realized - exact) < 1e-12);
  }
}

TEST_CASE("efficiency: shared law for IEEE and Hygov, interior maximum for Euler") {
  // identical operating points give identical efficiencies
  testutil::Lcg rng(5);
  for (int i = 0; i < 50; ++i) {
    const OperatingPoint op{rng.uniform(0.3, 1.0), rng.uniform(0.85, 1.15), rng.uniform(0.8, 1.1)};
    const double ei = efficiency(ModelKind::Ieee, op, T, W);
    const double eh = efficiency(ModelKind::Hygov, op, T, W);
    CHECK(std::abs(ei - eh) <= 1e-15);
  }

  CHECK(efficiency(ModelKind::Ieee, {1.0, 1.0, 1.0}, T, W) ==
        doctest::Approx(0.99975).epsilon(1e-12));

  // Euler efficiency over speed at fixed opening peaks near rated speed
  double best_w = 0, best = -1;
  for (double wq = 0.85; wq <= 1.151; wq += 0.025) {
    const double e = efficiency(ModelKind::Euler, {0.72, wq, 1.0}, T, W);
    if (e > best) {
      best = e;
      best_w = wq;
    }
  }
  CHECK(best_w > 0.86);
  CHECK(best_w < 1.14);

  CHECK_THROWS_WITH_AS(efficiency(ModelKind::Linearised, {0.5, 1.0, 1.0}, T, W),
                       doctest::Contains("not defined"), ModelError);
  CHECK_THROWS_AS(efficiency(ModelKind::Ieee, {0.5, 1.0, 0.0}, T, W), ModelError);
}

TEST_CASE("reduction chain: Euler fixed point reproduces q = g sqrt(h) when bases coincide") {
  PlantParams p = prm;
  p.turbine.Q_Rt = p.waterway.Q_R;  // equal flow bases, so kappa = g
  for (double g : {0.4, 0.6, 0.8, 1.0}) {
    for (double h : {0.85, 1.0, 1.1}) {
      const EulerStep s =
          euler_step_quantities(g * std::sqrt(h), 1.0, h, g, p.turbine, p.waterway, W.T_w);
      CHECK(std::abs(s.dq_t) < 1e-12);
    }
  }
}

TEST_CASE("Euler torque margin stays positive at the rated point across speed") {
  for (double wq = 0.5; wq <= 1.2001; wq += 0.05) {
    const EulerStep s = euler_step_quantities(1.0, wq, 1.0, 0.9, T, W, W.T_w);
    CHECK(s.out.m_s - T.psi * wq > 0.0);
  }
}

TEST_CASE("P_m = T_m * omega holds identically for the Euler outputs") {
  testutil::Lcg rng(17);
  for (int i = 0; i < 100; ++i) {
    const double g = rng.uniform(0.2, 1.0);
    const double wq = rng.uniform(0.6, 1.3);
    const double h_t = rng.uniform(0.7, 1.2);
    const double q_t = rng.uniform(0.1, 1.1);
    const EulerStep s = euler_step_quantities(q_t, wq, h_t, g, T, W, W.T_w);
    CHECK(s.out.P_m == s.out.T_m * wq);
  }
}

TEST_CASE("steady-head sigma sign switch") {
  TurbineParams derived = T;
  TurbineParams printed = T;
  printed.steady_head_sigma_printed = true;
  const double u_d = euler_steady_flow_ratio(1.0, 1.1, derived);
  const double u_p = euler_steady_flow_ratio(1.0, 1.1, printed);
  CHECK(u_d == doctest::Approx(std::sqrt(1.0 - T.sigma * 0.21)).epsilon(1e-14));
  CHECK(u_p == doctest::Approx(std::sqrt(1.0 + T.sigma * 0.21)).epsilon(1e-14));
}

TEST_CASE("model kind names round-trip") {
  for (auto k : {ModelKind::Euler, ModelKind::Ieee, ModelKind::Hygov, ModelKind::Linearised})
    CHECK(model_kind_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(model_kind_from_string("francis"), ValidationError);
}
