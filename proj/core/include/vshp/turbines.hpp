#pragma once

#include <string>

#include "vshp/params.hpp"

namespace vshp {

enum class ModelKind { Euler, Ieee, Hygov, Linearised };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

struct TurbineOutputs {
  double P_m = 0;    ///< mechanical power [pu]
  double T_m = 0;    ///< mechanical torque [pu]
  double q = 0;      ///< flow, plant pu
  double h = 0;      ///< head used, plant pu
  double eta_h = 0;  ///< hydraulic efficiency
  // Euler internals
  double m_s = 0;
  double kappa = 0;
  double alpha_1 = 0;
};

struct EulerKinematics {
  double kappa;    ///< opening degree, kappa = (Q_R/Q_Rt) g
  double alpha_1;  ///< flow angle, asin(kappa sin(alpha_1R)) [rad]
};

/// Throws ModelError when kappa*sin(alpha_1R) > 1 (opening beyond the kinematic limit).
EulerKinematics euler_kinematics(double g, const TurbineParams& t, const WaterwayParams& w);

struct EulerStep {
  double dq_t;
  TurbineOutputs out;
};

/// Euler runner equations. Momentum:
///   T_w dq_t/dt = h_t - q_t|q_t|/kappa^2 - sigma (omega^2 - 1)
/// torque m_s = xi (q_t/kappa)(cos a1 + tan a1R sin a1), T_m = q_t (m_s - psi w)/h_t,
/// P_m = T_m w, eta_h = (m_s - psi w) w / h_t. Flow is returned in plant pu.
EulerStep euler_step_quantities(double q_t, double omega, double h_t, double g,
                                const TurbineParams& t, const WaterwayParams& w, double T_w);

/// Flow ratio u = q_t/kappa at the momentum fixed point for a given head,
/// u = sqrt(h_t -/+ sigma (omega^2 - 1)); sign per steady_head_sigma_printed.
/// Returns a negative number when the head cannot sustain the speed.
double euler_steady_flow_ratio(double h_t, double omega, const TurbineParams& t);

struct IeeeOutputs {
  double q;
  double P_m;
};

/// q = g sqrt(h), P_m = A_t h (q - q_nl) - D_t g dw.
IeeeOutputs ieee_outputs(double g, double omega, double delta_omega, double h,
                         const TurbineParams& t);

struct HygovStep {
  double dq;
  double h;
  double P_m;
};

/// dq/dt = (1 - h)/T_w with h = (q/g)^2; P_m as in the IEEE power law.
HygovStep hygov_step_quantities(double q, double g, double delta_omega, const TurbineParams& t,
                                double T_w);

struct LinearisedStep {
  double dx;
  double P_m;
};

/// First-order realization of P_m(s)/g(s) = (1 - T_w s)/(1 + T_w s/2):
/// dx/dt = (g - x)/(T_w/2), P_m = 3x - 2g.
LinearisedStep linearised_step_quantities(double x, double g, double T_w);

struct OperatingPoint {
  double g = 1.0;
  double omega = 1.0;
  double h = 1.0;  ///< plant pu head at the turbine
};

/// Steady hydraulic efficiency at an operating point.
/// Euler: runner equations at the momentum fixed point. IEEE/Hygov: P_m/(h q)
/// with delta_omega = omega - 1. Linearised: ModelError (not defined).
double efficiency(ModelKind kind, const OperatingPoint& op, const TurbineParams& t,
                  const WaterwayParams& w);

}  // namespace vshp
