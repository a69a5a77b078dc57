#pragma once

#include <Eigen/Dense>

#include "vshp/params.hpp"

namespace vshp {

struct GovernorState {
  double integ = 0;       ///< integral accumulator [pu]
  double dfilt = 0;       ///< derivative filter state (lagged error) [pu]
  double g_servo = 0;     ///< servo output = actual opening g [pu]
  double g_cmd_prev = 0;  ///< last rate-limited command [pu]
};

/// Rate-limiter envelope for one integration step: the command committed at
/// t0 may move at most rate_limit away from `anchor` as stage time advances.
struct RateLimitWindow {
  double anchor = 0;
  double t0 = 0;
};

/// One evaluation of the PID + saturation + rate limit chain.
struct GovernorSignals {
  double err = 0;      ///< omega* - omega
  double g_raw = 0;    ///< unclamped PID output
  double g_sat = 0;    ///< after [g_min, g_max] saturation
  double g_cmd = 0;    ///< after the rate-limit envelope (servo input)
  bool halt_integration = false;
  double d_integ = 0;
  double d_dfilt = 0;
  double d_servo = 0;
};

/// Continuous-time governor law used inside the plant ODE. With
/// window == nullptr the rate limiter is inactive (trim / linearization path).
/// Anti-windup: integration halts while the raw command is saturated in the
/// direction of the error.
GovernorSignals governor_continuous(const GovernorParams& p, double integ, double dfilt,
                                    double g_servo, double omega_star, double omega,
                                    const RateLimitWindow* window, double tau);

struct GovernorStepResult {
  GovernorState state;
  double g = 0;
};

/// Standalone discrete governor step over dt: PID on current state, clamp to
/// [g_min, g_max], slew-limit against g_cmd_prev, exact first-order servo and
/// filter updates.
GovernorStepResult governor_step(const GovernorState& state, double omega_star, double omega,
                                 double dt, const GovernorParams& p);

struct GovernorMatrices {
  Eigen::Matrix3d A;  ///< states: [integ, dfilt, g_servo]
  Eigen::Vector3d B;  ///< input: delta omega
  Eigen::RowVector3d C;
  double D = 0;
};

/// Linear realization (limits inactive) of the PID governor with the
/// derivative term filtered by 1/(1 + T_f s).
GovernorMatrices governor_linear_matrices(const GovernorParams& p);

}  // namespace vshp
