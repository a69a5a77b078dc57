#include "vshp/turbines.hpp"

#include <cmath>

namespace vshp {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Euler: return "euler";
    case ModelKind::Ieee: return "ieee";
    case ModelKind::Hygov: return "hygov";
    case ModelKind::Linearised: return "linearised";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "euler") return ModelKind::Euler;
  if (name == "ieee") return ModelKind::Ieee;
  if (name == "hygov") return ModelKind::Hygov;
  if (name == "linearised") return ModelKind::Linearised;
  throw ValidationError("unknown model kind '" + name +
                        "' (expected euler, ieee, hygov or linearised)");
}

EulerKinematics euler_kinematics(double g, const TurbineParams& t, const WaterwayParams& w) {
  const double kappa = (w.Q_R / t.Q_Rt) * g;
  const double ks = kappa * std::sin(t.alpha_1R);
  if (ks > 1.0 + 1e-12)
    throw ModelError("guide-vane opening beyond kinematic limit (kappa*sin(alpha_1R) > 1)");
  return {kappa, std::asin(std::min(ks, 1.0))};
}

EulerStep euler_step_quantities(double q_t, double omega, double h_t, double g,
                                const TurbineParams& t, const WaterwayParams& w, double T_w) {
  if (h_t <= 0) throw ModelError("head collapse: h_t <= 0 in Euler runner evaluation");
  const EulerKinematics kin = euler_kinematics(g, t, w);
  if (kin.kappa < 1e-12) {
    if (std::abs(q_t) > 1e-12)
      throw ModelError("singular opening: gate closed against nonzero turbine flow");
    throw ModelError("singular opening: kappa = 0");
  }

  const double u = q_t / kin.kappa;
  // q_t|q_t|/kappa^2 keeps the sign for reverse flow
  const double head_used = q_t * std::abs(q_t) / (kin.kappa * kin.kappa);
  const double dq_t = (h_t - head_used - t.sigma * (omega * omega - 1.0)) / T_w;

  EulerStep step;
  step.dq_t = dq_t;
  TurbineOutputs& o = step.out;
  o.kappa = kin.kappa;
  o.alpha_1 = kin.alpha_1;
  o.m_s = t.xi * u * (std::cos(kin.alpha_1) + std::tan(t.alpha_1R) * std::sin(kin.alpha_1));
  o.T_m = q_t * (o.m_s - t.psi * omega) / h_t;
  o.P_m = o.T_m * omega;
  o.eta_h = (o.m_s - t.psi * omega) * omega / h_t;
  const PlantPu pu = turbine_to_plant_pu(q_t, h_t, t, w);
  o.q = pu.q;
  o.h = pu.h;
  return step;
}

double euler_steady_flow_ratio(double h_t, double omega, const TurbineParams& t) {
  const double sgn = t.steady_head_sigma_printed ? 1.0 : -1.0;
  const double u2 = h_t + sgn * t.sigma * (omega * omega - 1.0);
  if (u2 < 0) return -std::sqrt(-u2);
  return std::sqrt(u2);
}

IeeeOutputs ieee_outputs(double g, double /*omega*/, double delta_omega, double h,
                         const TurbineParams& t) {
  if (h < 0) throw ModelError("head collapse: h < 0 in IEEE turbine evaluation");
  const double q = g * std::sqrt(h);
  const double P_m = t.A_t * h * (q - t.q_nl) - t.D_t * g * delta_omega;
  return {q, P_m};
}

HygovStep hygov_step_quantities(double q, double g, double delta_omega, const TurbineParams& t,
                                double T_w) {
  if (g <= 0) throw ModelError("division singularity: Hygov requires g > 0");
  HygovStep step;
  step.h = (q / g) * (q / g);
  step.dq = (1.0 - step.h) / T_w;
  step.P_m = t.A_t * step.h * (q - t.q_nl) - t.D_t * g * delta_omega;
  return step;
}

LinearisedStep linearised_step_quantities(double x, double g, double T_w) {
  return {(g - x) / (0.5 * T_w), 3.0 * x - 2.0 * g};
}

double efficiency(ModelKind kind, const OperatingPoint& op, const TurbineParams& t,
                  const WaterwayParams& w) {
  switch (kind) {
    case ModelKind::Linearised:
      throw ModelError("efficiency not defined for the linearised model");
    case ModelKind::Euler: {
      const double h_t = op.h * w.H_R / t.H_Rt;
      if (h_t <= 0) throw ModelError("head collapse: h_t <= 0");
      const double u = euler_steady_flow_ratio(h_t, op.omega, t);
      if (u <= 0) throw ModelError("no steady forward flow at this operating point");
      const EulerKinematics kin = euler_kinematics(op.g, t, w);
      const double q_t = kin.kappa * u;
      const EulerStep s = euler_step_quantities(q_t, op.omega, h_t, op.g, t, w, /*T_w=*/1.0);
      return s.out.eta_h;
    }
    case ModelKind::Ieee: {
      const IeeeOutputs o = ieee_outputs(op.g, op.omega, op.omega - 1.0, op.h, t);
      if (std::abs(op.h * o.q) < 1e-12)
        throw ModelError("efficiency undefined: h*q = 0");
      return o.P_m / (op.h * o.q);
    }
    case ModelKind::Hygov: {
      // steady flow law is the same as IEEE's: q = g sqrt(h)
      const double q = op.g * std::sqrt(op.h);
      const double h = op.h;
      const double P_m = t.A_t * h * (q - t.q_nl) - t.D_t * op.g * (op.omega - 1.0);
      if (std::abs(h * q) < 1e-12) throw ModelError("efficiency undefined: h*q = 0");
      return P_m / (h * q);
    }
  }
  throw ModelError("invalid model kind");
}

}  // namespace vshp
