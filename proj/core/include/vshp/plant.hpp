#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vshp/governor.hpp"
#include "vshp/turbines.hpp"
#include "vshp/waterway.hpp"

namespace vshp {

struct PlantInputs {
  double P_star = 0.0;      ///< commanded generator power [pu]
  double omega_star = 1.0;  ///< speed reference [pu]

  void validate() const;  // finite, P_star in [0, 1.2]
};

struct PlantOutputs {
  double omega = 1;
  double P_m = 0;
  double T_m = 0;
  double h = 0;
  double q = 0;
  double g = 0;
  double eta_h = 0;
  // Euler internals
  double q_t = 0, h_t = 0, kappa = 0, alpha_1 = 0, m_s = 0;
  bool hydraulic = false;    ///< h/q columns meaningful
  bool eta_defined = false;  ///< eta_h column meaningful
};

struct EvalContext {
  const DelayLine* delay = nullptr;          ///< required for stepping in delay mode
  double t = 0.0;                            ///< stage time
  const RateLimitWindow* limiter = nullptr;  ///< nullptr: rate limit inactive
  bool no_integrator_halt = false;           ///< trim path: keep the vector field smooth
};

/// One turbine model + waterway (where applicable) + governor + rotor as a
/// single ODE system with inputs (P*, omega*). Rotor law:
/// T_a domega/dt = P_m - P_g with P_g = P_star (ideal converter).
class Plant {
 public:
  static Plant assemble(ModelKind kind, const PlantParams& params);

  ModelKind kind() const { return kind_; }
  const PlantParams& params() const { return params_; }
  int dim() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& state_labels() const { return labels_; }
  int index_of(const std::string& label) const;
  bool uses_waterway() const;
  bool uses_delay_line() const;

  /// State layout, -1 where a block is absent.
  struct Layout {
    int omega = 0;
    int turb = -1;  ///< q_t (Euler), q (Hygov / IEEE inelastic), x (Linearised)
    int h_st = -1;
    int q_hr = -1;
    int pen0 = -1;
    int npen = 0;
    int gov = -1;  ///< first of [gov_integ, gov_dfilt, gov_servo]
  };
  const Layout& layout() const { return lay_; }
  const PenstockLumped& penstock() const { return pen_; }

  using EvalContext = vshp::EvalContext;

  struct Evaluation {
    Eigen::VectorXd dx;
    PlantOutputs out;
  };

  Evaluation evaluate(const Eigen::VectorXd& x, const PlantInputs& u,
                      const EvalContext& ctx = {}) const;
  Eigen::VectorXd derivatives(const Eigen::VectorXd& x, const PlantInputs& u,
                              const EvalContext& ctx = {}) const;
  PlantOutputs outputs(const Eigen::VectorXd& x, const PlantInputs& u,
                       const EvalContext& ctx = {}) const;

  /// Governor chain evaluated at the current state (no rate-limit window).
  GovernorSignals governor_signals(const Eigen::VectorXd& x, const PlantInputs& u) const;

  /// Plant-pu turbine flow at this state (solves the IEEE head loop if needed).
  double turbine_flow(const Eigen::VectorXd& x, const PlantInputs& u,
                      const EvalContext& ctx = {}) const;

 private:
  Plant() = default;

  ModelKind kind_ = ModelKind::Euler;
  PlantParams params_;
  PenstockLumped pen_;
  Layout lay_;
  std::vector<std::string> labels_;
};

struct TrimResult {
  Eigen::VectorXd state;
  PlantOutputs outputs;
  double residual = 0;
  int iterations = 0;
};

/// Solves derivatives = 0 by damped Newton from a deterministic analytic
/// initial guess. Residual max-norm below 1e-10 on success. Throws TrimError
/// (infeasible flag set when P_star exceeds the model's steady power ceiling).
TrimResult trim(const Plant& plant, double P_star, double omega_star);

/// Native steady operating point at a given opening and speed: waterway loss
/// chain for Euler/IEEE, unit head for Hygov. eta_total is referenced to the
/// source head (P_m per unit flow).
struct SteadyPoint {
  double g = 0, omega = 1, q = 0, h = 0, P_m = 0, eta = 0;
};
SteadyPoint steady_chain(ModelKind kind, const PlantParams& params, double g, double omega);

/// Maximum steady P_m over admissible openings at a given speed.
double max_steady_power(ModelKind kind, const PlantParams& params, double omega_star);

/// Operating point on the shared unit-head family with P_m = P_fixed; returns
/// the hydraulic efficiency there. Backs the eta(omega) map at fixed power.
double efficiency_at_unit_head(ModelKind kind, const PlantParams& params, double omega,
                               double P_fixed);

}  // namespace vshp
