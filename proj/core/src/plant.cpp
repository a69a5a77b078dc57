#include "vshp/plant.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vshp/smallsignal.hpp"

namespace vshp {

void PlantInputs::validate() const {
  if (!std::isfinite(P_star) || !std::isfinite(omega_star))
    throw ValidationError("plant inputs must be finite");
  if (P_star < 0.0 || P_star > 1.2) throw ValidationError("P_star must be within [0, 1.2]");
  if (omega_star <= 0.0) throw ValidationError("omega_star must be > 0");
}

Plant Plant::assemble(ModelKind kind, const PlantParams& params) {
  params.validate();
  Plant p;
  p.kind_ = kind;
  p.params_ = params;
  Layout& L = p.lay_;
  auto& lbl = p.labels_;
  lbl.emplace_back("omega");

  const PenstockMode mode = params.penstock_mode;
  switch (kind) {
    case ModelKind::Euler:
      L.turb = 1;
      lbl.emplace_back("q_t");
      break;
    case ModelKind::Ieee:
      if (mode == PenstockMode::Inelastic) {
        L.turb = 1;
        lbl.emplace_back("q");
      }
      break;
    case ModelKind::Hygov:
      L.turb = 1;
      lbl.emplace_back("q");
      break;
    case ModelKind::Linearised:
      L.turb = 1;
      lbl.emplace_back("x_lin");
      break;
  }

  if (kind == ModelKind::Euler || kind == ModelKind::Ieee) {
    L.h_st = static_cast<int>(lbl.size());
    lbl.emplace_back("h_st");
    L.q_hr = static_cast<int>(lbl.size());
    lbl.emplace_back("q_hr");
    if (mode == PenstockMode::LumpedTanh) {
      p.pen_ = PenstockLumped::build(params.waterway, params.tanh_order);
      L.pen0 = static_cast<int>(lbl.size());
      L.npen = p.pen_.order();
      for (int i = 0; i < L.npen; ++i) lbl.emplace_back("pen_" + std::to_string(i + 1));
    }
  }

  L.gov = static_cast<int>(lbl.size());
  lbl.emplace_back("gov_integ");
  lbl.emplace_back("gov_dfilt");
  lbl.emplace_back("gov_servo");
  return p;
}

int Plant::index_of(const std::string& label) const {
  for (size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) return static_cast<int>(i);
  throw ValidationError("no state named '" + label + "' in this plant");
}

bool Plant::uses_waterway() const { return lay_.h_st >= 0; }

bool Plant::uses_delay_line() const {
  return uses_waterway() && params_.penstock_mode == PenstockMode::TravellingWaveDelay;
}

namespace {

double clampd(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

struct HeadSolve {
  double h;
  double q;
};

// Solves h = wave_base - zcoef*q + h_st - f_p0 q_net|q_net| - f_p1 q|q| with
// q = g sqrt(h), via safeguarded Newton on u = sqrt(h). Plain fixed-point
// substitution is not a contraction in delay mode (|dF/dh| ~ Z_0 g / 2).
HeadSolve solve_ieee_head(const WaterwayParams& W, double g, double h_st, double q_hr,
                          double wave_base, double zcoef) {
  if (g < 1e-14) {
    const double h = wave_base + h_st - friction_head_loss(W.f_p0, q_hr);
    if (h < 0) throw ModelError("head collapse: h < 0 at closed gate");
    return {h, 0.0};
  }
  auto phi = [&](double u) {
    const double q_net = q_hr - g * u;
    return (1.0 + W.f_p1 * g * g) * u * u + zcoef * g * u +
           friction_head_loss(W.f_p0, q_net) - wave_base - h_st;
  };
  auto dphi = [&](double u) {
    const double q_net = q_hr - g * u;
    return 2.0 * (1.0 + W.f_p1 * g * g) * u + zcoef * g - 2.0 * W.f_p0 * g * std::abs(q_net);
  };

  double lo = 0.0;
  if (phi(lo) >= 0.0) throw ModelError("head collapse: turbine head solve hit h = 0");
  double hi = 1.5;
  int expand = 0;
  while (phi(hi) < 0.0) {
    hi *= 2.0;
    if (++expand > 6) throw ModelError("turbine head solve could not bracket a solution");
  }

  double u = clampd(std::sqrt(clampd(wave_base + h_st, 1e-6, hi * hi)), lo + 1e-9, hi);
  for (int it = 0; it < 50; ++it) {
    const double f = phi(u);
    if (std::abs(f) < 1e-14 || hi - lo < 1e-13) break;
    (f < 0 ? lo : hi) = u;
    const double d = dphi(u);
    double un = d != 0 ? u - f / d : u;
    if (!(un > lo && un < hi)) un = 0.5 * (lo + hi);
    u = un;
  }
  if (std::abs(phi(u)) > 1e-10)
    throw ModelError("turbine head solve did not converge");
  return {u * u, g * u};
}

}  // namespace

Plant::Evaluation Plant::evaluate(const Eigen::VectorXd& x, const PlantInputs& u,
                                  const EvalContext& ctx) const {
  if (x.size() != dim()) throw ValidationError("plant state dimension mismatch");
  const WaterwayParams& W = params_.waterway;
  const TurbineParams& T = params_.turbine;
  const GovernorParams& G = params_.governor;
  const PenstockMode mode = params_.penstock_mode;
  const Layout& L = lay_;

  Evaluation ev;
  ev.dx = Eigen::VectorXd::Zero(dim());
  PlantOutputs& o = ev.out;

  const double omega = x(0);
  GovernorSignals gs = governor_continuous(G, x(L.gov), x(L.gov + 1), x(L.gov + 2), u.omega_star,
                                           omega, ctx.limiter, ctx.t);
  if (ctx.no_integrator_halt) gs.d_integ = gs.err;
  ev.dx(L.gov) = gs.d_integ;
  ev.dx(L.gov + 1) = gs.d_dfilt;
  ev.dx(L.gov + 2) = gs.d_servo;

  const double g = x(L.gov + 2);
  o.omega = omega;
  o.g = g;

  const int pen_at = L.pen0 < 0 ? 0 : L.pen0;
  double P_rotor = 0.0;

  switch (kind_) {
    case ModelKind::Euler: {
      const double q_t = x(L.turb);
      const double q = q_t * T.Q_Rt / W.Q_R;
      auto dpen = ev.dx.segment(pen_at, L.npen);
      const WaterwayOutput ww = waterway_eval(W, mode, &pen_, x(L.h_st), x(L.q_hr),
                                              x.segment(pen_at, L.npen), dpen, q, ctx.delay, ctx.t);
      ev.dx(L.h_st) = ww.dh_st;
      ev.dx(L.q_hr) = ww.dq_hr;

      const double head_base = W.H_R / T.H_Rt;
      if (mode == PenstockMode::Inelastic) {
        // fold the rigid penstock column into an effective starting time
        const double r = T.Q_Rt / W.Q_R;
        const double T_eff = W.T_w + head_base * r * W.T_w;
        const EulerKinematics kin = euler_kinematics(g, T, W);
        if (kin.kappa < 1e-12) {
          if (std::abs(q_t) > 1e-12)
            throw ModelError("singular opening: gate closed against nonzero turbine flow");
          throw ModelError("singular opening: kappa = 0");
        }
        const double h_t_node = ww.h * head_base;
        const double head_used = q_t * std::abs(q_t) / (kin.kappa * kin.kappa);
        const double dq_t =
            (h_t_node - head_used - T.sigma * (omega * omega - 1.0)) / T_eff;
        const double h_t = h_t_node - head_base * r * W.T_w * dq_t;
        const EulerStep es = euler_step_quantities(q_t, omega, h_t, g, T, W, W.T_w);
        ev.dx(L.turb) = dq_t;
        o.P_m = es.out.P_m;
        o.T_m = es.out.T_m;
        o.h = es.out.h;
        o.q = es.out.q;
        o.eta_h = es.out.eta_h;
        o.m_s = es.out.m_s;
        o.kappa = es.out.kappa;
        o.alpha_1 = es.out.alpha_1;
        o.q_t = q_t;
        o.h_t = h_t;
      } else {
        const double h_t = ww.h * head_base;
        const EulerStep es = euler_step_quantities(q_t, omega, h_t, g, T, W, W.T_w);
        ev.dx(L.turb) = es.dq_t;
        o.P_m = es.out.P_m;
        o.T_m = es.out.T_m;
        o.h = es.out.h;
        o.q = es.out.q;
        o.eta_h = es.out.eta_h;
        o.m_s = es.out.m_s;
        o.kappa = es.out.kappa;
        o.alpha_1 = es.out.alpha_1;
        o.q_t = q_t;
        o.h_t = h_t;
      }
      o.hydraulic = true;
      o.eta_defined = true;
      P_rotor = T.rotor_torque_balance ? o.T_m : o.P_m;
      break;
    }

    case ModelKind::Ieee: {
      if (mode == PenstockMode::Inelastic) {
        const double q = x(L.turb);
        if (g <= 1e-12) throw ModelError("division singularity: IEEE rigid column requires g > 0");
        auto dpen = ev.dx.segment(pen_at, 0);
        const WaterwayOutput ww = waterway_eval(W, mode, &pen_, x(L.h_st), x(L.q_hr),
                                                x.segment(pen_at, 0), dpen, q, ctx.delay, ctx.t);
        ev.dx(L.h_st) = ww.dh_st;
        ev.dx(L.q_hr) = ww.dq_hr;
        const double h = (q / g) * (q / g);
        ev.dx(L.turb) = (ww.h - h) / W.T_w;
        o.P_m = T.A_t * h * (q - T.q_nl) - T.D_t * g * (omega - 1.0);
        o.h = h;
        o.q = q;
      } else {
        double wave_base = 0.0, zcoef = 0.0;
        if (mode == PenstockMode::LumpedTanh) {
          wave_base = pen_.head(x.segment(pen_at, L.npen));
        } else if (ctx.delay) {
          wave_base = ctx.delay->sample(ctx.t - 2.0 * W.T_e);
          zcoef = W.Z_0;
        }
        const HeadSolve hs = solve_ieee_head(W, g, x(L.h_st), x(L.q_hr), wave_base, zcoef);
        auto dpen = ev.dx.segment(pen_at, L.npen);
        const WaterwayOutput ww =
            waterway_eval(W, mode, &pen_, x(L.h_st), x(L.q_hr), x.segment(pen_at, L.npen), dpen,
                          hs.q, ctx.delay, ctx.t);
        ev.dx(L.h_st) = ww.dh_st;
        ev.dx(L.q_hr) = ww.dq_hr;
        const IeeeOutputs io = ieee_outputs(g, omega, omega - 1.0, hs.h, T);
        o.P_m = io.P_m;
        o.h = hs.h;
        o.q = io.q;
      }
      o.T_m = omega != 0.0 ? o.P_m / omega : 0.0;
      o.eta_h = std::abs(o.h * o.q) > 1e-12 ? o.P_m / (o.h * o.q) : 0.0;
      o.hydraulic = true;
      o.eta_defined = true;
      P_rotor = o.P_m;
      break;
    }

    case ModelKind::Hygov: {
      const double q = x(L.turb);
      const HygovStep hsv = hygov_step_quantities(q, g, omega - 1.0, T, W.T_w);
      ev.dx(L.turb) = hsv.dq;
      o.P_m = hsv.P_m;
      o.h = hsv.h;
      o.q = q;
      o.T_m = omega != 0.0 ? o.P_m / omega : 0.0;
      o.eta_h = std::abs(o.h * o.q) > 1e-12 ? o.P_m / (o.h * o.q) : 0.0;
      o.hydraulic = true;
      o.eta_defined = true;
      P_rotor = o.P_m;
      break;
    }

    case ModelKind::Linearised: {
      const LinearisedStep ls = linearised_step_quantities(x(L.turb), g, W.T_w);
      ev.dx(L.turb) = ls.dx;
      o.P_m = ls.P_m;
      o.T_m = omega != 0.0 ? o.P_m / omega : 0.0;
      P_rotor = o.P_m;
      break;
    }
  }

  ev.dx(0) = (P_rotor - u.P_star) / T.T_a;
  return ev;
}

Eigen::VectorXd Plant::derivatives(const Eigen::VectorXd& x, const PlantInputs& u,
                                   const EvalContext& ctx) const {
  return evaluate(x, u, ctx).dx;
}

PlantOutputs Plant::outputs(const Eigen::VectorXd& x, const PlantInputs& u,
                            const EvalContext& ctx) const {
  return evaluate(x, u, ctx).out;
}

GovernorSignals Plant::governor_signals(const Eigen::VectorXd& x, const PlantInputs& u) const {
  return governor_continuous(params_.governor, x(lay_.gov), x(lay_.gov + 1), x(lay_.gov + 2),
                             u.omega_star, x(0), nullptr, 0.0);
}

double Plant::turbine_flow(const Eigen::VectorXd& x, const PlantInputs& u,
                           const EvalContext& ctx) const {
  return evaluate(x, u, ctx).out.q;
}

SteadyPoint steady_chain(ModelKind kind, const PlantParams& prm, double g, double omega) {
  const WaterwayParams& W = prm.waterway;
  const TurbineParams& T = prm.turbine;
  SteadyPoint pt;
  pt.g = g;
  pt.omega = omega;
  switch (kind) {
    case ModelKind::Linearised:
      pt.P_m = g;
      return pt;
    case ModelKind::Hygov: {
      pt.h = 1.0;
      pt.q = g;
      pt.P_m = T.A_t * pt.h * (pt.q - T.q_nl) - T.D_t * g * (omega - 1.0);
      pt.eta = pt.q > 0 ? pt.P_m / pt.q : 0.0;
      return pt;
    }
    case ModelKind::Ieee: {
      double h = 1.0, q = g;
      for (int i = 0; i < 200; ++i) {
        q = g * std::sqrt(h);
        const double hn = 1.0 - friction_head_loss(W.f_p1 + W.f_p2, q);
        if (hn <= 0) throw ModelError("head collapse in the steady loss chain");
        if (std::abs(hn - h) < 1e-15) {
          h = hn;
          break;
        }
        h = hn;
      }
      q = g * std::sqrt(h);
      pt.h = h;
      pt.q = q;
      pt.P_m = T.A_t * h * (q - T.q_nl) - T.D_t * g * (omega - 1.0);
      pt.eta = pt.q > 0 ? pt.P_m / pt.q : 0.0;
      return pt;
    }
    case ModelKind::Euler: {
      const double head_base = W.H_R / T.H_Rt;
      const EulerKinematics kin = euler_kinematics(g, T, W);
      if (kin.kappa < 1e-9) throw ModelError("singular opening: kappa = 0");
      double q_t = kin.kappa;
      double h_t = head_base;
      for (int i = 0; i < 300; ++i) {
        const double q = q_t * T.Q_Rt / W.Q_R;
        h_t = (1.0 - friction_head_loss(W.f_p1 + W.f_p2, q)) * head_base;
        const double ratio = euler_steady_flow_ratio(h_t, omega, T);
        if (ratio <= 0) throw ModelError("no steady forward flow at this operating point");
        const double next = kin.kappa * ratio;
        if (std::abs(next - q_t) < 1e-15) {
          q_t = next;
          break;
        }
        q_t = next;
      }
      const EulerStep es = euler_step_quantities(q_t, omega, h_t, g, T, W, W.T_w);
      pt.q = es.out.q;
      pt.h = es.out.h;
      pt.P_m = es.out.P_m;
      pt.eta = es.out.eta_h;
      return pt;
    }
  }
  throw ModelError("invalid model kind");
}

namespace {

double admissible_g_max(ModelKind kind, const PlantParams& prm) {
  double hi = prm.governor.g_max;
  if (kind == ModelKind::Euler) {
    // kinematic bound kappa sin(alpha_1R) <= 1
    const double kin = (prm.turbine.Q_Rt / prm.waterway.Q_R) / std::sin(prm.turbine.alpha_1R);
    hi = std::min(hi, kin - 1e-9);
  }
  return hi;
}

double steady_power_or_nan(ModelKind kind, const PlantParams& prm, double g, double omega) {
  try {
    return steady_chain(kind, prm, g, omega).P_m;
  } catch (const ModelError&) {
    return std::nan("");
  }
}

}  // namespace

double max_steady_power(ModelKind kind, const PlantParams& prm, double omega_star) {
  const double hi = admissible_g_max(kind, prm);
  const double lo = std::max(1e-3, prm.governor.g_min);
  double best = -1e300;
  const int n = 400;
  for (int i = 0; i <= n; ++i) {
    const double g = lo + (hi - lo) * i / n;
    const double p = steady_power_or_nan(kind, prm, g, omega_star);
    if (std::isfinite(p)) best = std::max(best, p);
  }
  return best;
}

namespace {

// smallest admissible opening with steady power >= target (grid scan + bisection)
double solve_steady_opening(ModelKind kind, const PlantParams& prm, double P_star,
                            double omega_star) {
  const double hi = admissible_g_max(kind, prm);
  const double lo = std::max(1e-3, prm.governor.g_min);
  const int n = 400;
  double g_prev = lo;
  double p_prev = steady_power_or_nan(kind, prm, lo, omega_star);
  for (int i = 1; i <= n; ++i) {
    const double g = lo + (hi - lo) * i / n;
    const double p = steady_power_or_nan(kind, prm, g, omega_star);
    if (std::isfinite(p_prev) && std::isfinite(p) && p_prev < P_star && p >= P_star) {
      double a = g_prev, b = g;
      for (int k = 0; k < 80; ++k) {
        const double m = 0.5 * (a + b);
        const double pm = steady_power_or_nan(kind, prm, m, omega_star);
        (std::isfinite(pm) && pm >= P_star ? b : a) = m;
      }
      return 0.5 * (a + b);
    }
    g_prev = g;
    p_prev = p;
  }
  // no crossing: return the opening with the closest power
  double best_g = lo, best_d = 1e300;
  for (int i = 0; i <= n; ++i) {
    const double g = lo + (hi - lo) * i / n;
    const double p = steady_power_or_nan(kind, prm, g, omega_star);
    if (std::isfinite(p) && std::abs(p - P_star) < best_d) {
      best_d = std::abs(p - P_star);
      best_g = g;
    }
  }
  return best_g;
}

Eigen::VectorXd trim_guess(const Plant& plant, double P_star, double omega_star) {
  const PlantParams& prm = plant.params();
  const Plant::Layout& L = plant.layout();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(plant.dim());
  x(0) = omega_star;

  const double g0 = solve_steady_opening(plant.kind(), prm, P_star, omega_star);
  SteadyPoint pt;
  try {
    pt = steady_chain(plant.kind(), prm, g0, omega_star);
  } catch (const ModelError&) {
    pt.g = g0;
    pt.q = g0;
    pt.h = 1.0;
  }

  switch (plant.kind()) {
    case ModelKind::Euler:
      x(L.turb) = pt.q * prm.waterway.Q_R / prm.turbine.Q_Rt;
      break;
    case ModelKind::Hygov:
    case ModelKind::Ieee:
      if (L.turb >= 0) x(L.turb) = pt.q;
      break;
    case ModelKind::Linearised:
      x(L.turb) = g0;
      break;
  }
  if (L.h_st >= 0) {
    x(L.h_st) = 1.0 - friction_head_loss(prm.waterway.f_p2, pt.q);
    x(L.q_hr) = pt.q;
    if (L.npen > 0)
      x.segment(L.pen0, L.npen) = plant.penstock().equilibrium(pt.q);
  }
  x(L.gov) = prm.governor.k_gi > 0 ? g0 / prm.governor.k_gi : 0.0;
  x(L.gov + 1) = 0.0;
  x(L.gov + 2) = g0;
  return x;
}

}  // namespace

TrimResult trim(const Plant& plant, double P_star, double omega_star) {
  PlantInputs u{P_star, omega_star};
  u.validate();

  const double P_max = max_steady_power(plant.kind(), plant.params(), omega_star);
  if (P_star > P_max + 1e-6) {
    std::ostringstream msg;
    msg << "infeasible operating point: P_star = " << P_star
        << " exceeds the maximum steady power " << P_max << " at omega_star = " << omega_star;
    throw TrimError(msg.str(), 0, 0.0, /*infeasible=*/true);
  }

  const Plant::EvalContext ctx{nullptr, 0.0, nullptr, /*no_integrator_halt=*/true};
  auto resid = [&](const Eigen::VectorXd& xx) { return plant.derivatives(xx, u, ctx); };

  Eigen::VectorXd x = trim_guess(plant, P_star, omega_star);
  Eigen::VectorXd F;
  try {
    F = resid(x);
  } catch (const ModelError& e) {
    throw TrimError(std::string("trim failed at the initial guess: ") + e.what(), 0, 0.0, false);
  }
  double fn = F.lpNorm<Eigen::Infinity>();

  int iter = 0;
  for (; iter < 100 && fn >= 1e-12; ++iter) {
    Eigen::MatrixXd J;
    try {
      J = central_difference_jacobian(resid, x);
    } catch (const ModelError& e) {
      throw TrimError(std::string("trim stalled at a model boundary: ") + e.what(), iter, fn,
                      false);
    }
    const Eigen::VectorXd step = J.fullPivLu().solve(-F);
    if (!step.allFinite())
      throw TrimError("trim Newton step is singular", iter, fn, false);

    double alpha = 1.0;
    bool accepted = false;
    for (int k = 0; k < 40; ++k, alpha *= 0.5) {
      const Eigen::VectorXd xn = x + alpha * step;
      Eigen::VectorXd Fn;
      try {
        Fn = resid(xn);
      } catch (const ModelError&) {
        continue;
      }
      const double fnn = Fn.lpNorm<Eigen::Infinity>();
      if (fnn < fn) {
        x = xn;
        F = Fn;
        fn = fnn;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }

  if (fn > 1e-10) {
    std::ostringstream msg;
    msg << "trim did not converge: residual max-norm " << fn << " after " << iter
        << " iterations";
    throw TrimError(msg.str(), iter, fn, false);
  }

  TrimResult r;
  r.state = x;
  r.outputs = plant.outputs(x, u, ctx);
  r.residual = fn;
  r.iterations = iter;
  return r;
}

double efficiency_at_unit_head(ModelKind kind, const PlantParams& prm, double omega,
                               double P_fixed) {
  const WaterwayParams& W = prm.waterway;
  const TurbineParams& T = prm.turbine;
  switch (kind) {
    case ModelKind::Linearised:
      throw ModelError("efficiency not defined for the linearised model");
    case ModelKind::Ieee:
    case ModelKind::Hygov: {
      const double denom = T.A_t - T.D_t * (omega - 1.0);
      if (denom <= 0) throw ModelError("no steady opening at this speed");
      const double g = (P_fixed + T.A_t * T.q_nl) / denom;
      return efficiency(kind, {g, omega, 1.0}, T, W);
    }
    case ModelKind::Euler: {
      // unit plant head; power is monotone in the opening, bisect for P_fixed
      auto power = [&](double g) {
        const double h_t = W.H_R / T.H_Rt;
        const double ratio = euler_steady_flow_ratio(h_t, omega, T);
        if (ratio <= 0) throw ModelError("no steady forward flow at this speed");
        const EulerKinematics kin = euler_kinematics(g, T, W);
        const EulerStep es = euler_step_quantities(kin.kappa * ratio, omega, h_t, g, T, W, 1.0);
        return es.out.P_m;
      };
      double a = 1e-3, b = admissible_g_max(kind, prm);
      if (power(b) < P_fixed) throw ModelError("fixed power above the unit-head ceiling");
      for (int i = 0; i < 200; ++i) {
        const double m = 0.5 * (a + b);
        (power(m) < P_fixed ? a : b) = m;
      }
      return efficiency(kind, {0.5 * (a + b), omega, 1.0}, T, W);
    }
  }
  throw ModelError("invalid model kind");
}

}  // namespace vshp
