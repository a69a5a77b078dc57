#include "vshp/governor.hpp"

#include <algorithm>
#include <cmath>

namespace vshp {

namespace {
double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }
}

GovernorSignals governor_continuous(const GovernorParams& p, double integ, double dfilt,
                                    double g_servo, double omega_star, double omega,
                                    const RateLimitWindow* window, double tau) {
  GovernorSignals s;
  s.err = omega_star - omega;
  const double deriv_est = (s.err - dfilt) / p.T_f;
  s.g_raw = p.k_gp * s.err + p.k_gi * integ + p.k_gd * deriv_est;
  s.g_sat = clamp(s.g_raw, p.g_min, p.g_max);
  if (window) {
    const double slack = p.rate_limit * std::max(0.0, tau - window->t0);
    s.g_cmd = clamp(s.g_sat, window->anchor - slack, window->anchor + slack);
  } else {
    s.g_cmd = s.g_sat;
  }
  s.halt_integration = (s.g_raw > p.g_max && s.err > 0) || (s.g_raw < p.g_min && s.err < 0);
  s.d_integ = s.halt_integration ? 0.0 : s.err;
  s.d_dfilt = deriv_est;
  s.d_servo = (s.g_cmd - g_servo) / p.T_G;
  return s;
}

GovernorStepResult governor_step(const GovernorState& state, double omega_star, double omega,
                                 double dt, const GovernorParams& p) {
  if (dt <= 0) throw ValidationError("governor step dt must be > 0");
  GovernorSignals s =
      governor_continuous(p, state.integ, state.dfilt, state.g_servo, omega_star, omega,
                          /*window=*/nullptr, /*tau=*/0.0);
  const double g_cmd =
      clamp(s.g_sat, state.g_cmd_prev - p.rate_limit * dt, state.g_cmd_prev + p.rate_limit * dt);

  GovernorStepResult r;
  r.state.integ = state.integ + s.d_integ * dt;
  r.state.dfilt = s.err + (state.dfilt - s.err) * std::exp(-dt / p.T_f);
  r.state.g_servo = g_cmd + (state.g_servo - g_cmd) * std::exp(-dt / p.T_G);
  r.state.g_cmd_prev = g_cmd;
  r.g = r.state.g_servo;
  return r;
}

GovernorMatrices governor_linear_matrices(const GovernorParams& p) {
  GovernorMatrices m;
  m.A << 0, 0, 0,
         0, -1.0 / p.T_f, 0,
         p.k_gi / p.T_G, -p.k_gd / (p.T_f * p.T_G), -1.0 / p.T_G;
  m.B << 1, 1.0 / p.T_f, (p.k_gp + p.k_gd / p.T_f) / p.T_G;
  m.C << 0, 0, 1;
  m.D = 0;
  return m;
}

}  // namespace vshp
