#pragma once

#include <complex>

#include <Eigen/Dense>

#include "vshp/params.hpp"

namespace vshp {

/// Uniformly sampled history of the penstock wave variable, spanning at least
/// 2*T_e plus one step. Samples are linearly interpolated.
class DelayLine {
 public:
  DelayLine() = default;
  DelayLine(double dt, double span);

  /// Warm-up: fills the whole history with `value`, newest sample at t_latest.
  void fill(double t_latest, double value);

  /// Appends the sample at t = t_latest + dt.
  void push(double t, double value);

  /// Interpolated value at time t; throws ModelError when t is outside the
  /// retained history (instructing warm-up padding).
  double sample(double t) const;

  bool empty() const { return count_ == 0; }
  double span() const { return count_ > 0 ? dt_ * static_cast<double>(count_ - 1) : 0.0; }
  double latest_time() const { return t_latest_; }

 private:
  std::vector<double> buf_;
  int capacity_ = 0;
  int count_ = 0;
  int head_ = 0;  // index of newest sample
  double dt_ = 0;
  double t_latest_ = 0;
};

/// Strictly proper state-space realization of -Z_0 * tanh(s T_e) truncated per
/// TanhOrder: one balanced oscillator block per retained water-hammer harmonic
/// (modal form). Requires n_den >= n_num + 1.
struct PenstockLumped {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::RowVectorXd C;

  int order() const { return static_cast<int>(A.rows()); }
  double head(Eigen::Ref<const Eigen::VectorXd> x) const;
  void derivatives(Eigen::Ref<const Eigen::VectorXd> x, double q,
                   Eigen::Ref<Eigen::VectorXd> dx) const;
  Eigen::VectorXd equilibrium(double q) const;
  std::complex<double> frequency_response(double f_hz) const;

  static PenstockLumped build(const WaterwayParams& w, TanhOrder order);
};

/// dq_hr/dt = (1 - h_node - f_p2 * q_hr * |q_hr|) / T_w2.
double headrace_derivative(double q_hr, double h_node, const WaterwayParams& w);

/// dh_st/dt = (q_hr - q_pen) / C_s.
double surge_tank_derivative(double q_hr, double q_pen, const WaterwayParams& w);

/// Head at the surge-tank node as seen by its neighbours:
/// h_st - f_p0 * q_net * |q_net|, q_net = q_hr - q_pen.
double surge_node_head(double h_st, double q_net, const WaterwayParams& w);

/// Travelling-wave head contribution -Z_0 q(t) + u(t - 2 T_e), where u is the
/// stored wave variable. Penstock friction is not included here.
double penstock_delay_head(double q, const DelayLine& history, const WaterwayParams& w, double t);

/// New wave-variable sample u(t) = 2 Z_0 q(t) - u(t - 2 T_e).
double penstock_delay_update(double q, const DelayLine& history, const WaterwayParams& w, double t);

struct PenstockResponse {
  std::complex<double> value{0.0, 0.0};
  bool resonance = false;  ///< at a pole of tanh; value is meaningless
};

/// Frequency-response oracle for the penstock transfer h(s)/q(s) at s = j*2*pi*f.
/// lossless: -Z_0 tanh(s T_e); lossy: the full hyperbolic form with the loss
/// coefficient expressed through f_p1 (beta = f_p1 / T_w, rated-flow convention).
PenstockResponse exact_penstock_response(double f_hz, const WaterwayParams& w, bool lossy);

struct WaterwayState {
  double h_st = 1.0;
  double q_hr = 0.0;
  Eigen::VectorXd penstock_lumped;  ///< empty unless LumpedTanh mode
  DelayLine delay_line;             ///< empty unless TravellingWaveDelay mode
};

struct WaterwayOutput {
  double h = 0;      ///< turbine-side head [pu]
  double h_node = 0; ///< surge node head [pu]
  double dh_st = 0;
  double dq_hr = 0;
  Eigen::VectorXd dpenstock;
};

/// Headrace tunnel + surge tank + penstock composition.
///
/// Junction read-off (reservoir head 1 at the far end):
///   q_net  = q_hr - q
///   h_node = h_st - f_p0 * q_net * |q_net|
///   dh_st/dt = q_net / C_s
///   dq_hr/dt = (1 - h_node - f_p2 * q_hr * |q_hr|) / T_w2
///   h = wave(q) + h_node - f_p1 * q * |q|
/// where wave(q) is -Z_0 tanh(s T_e) realized per the penstock mode; in
/// Inelastic mode the caller supplies the -T_w dq/dt column term itself and
/// wave(q) here is zero.
class Waterway {
 public:
  Waterway(const WaterwayParams& w, PenstockMode mode, TanhOrder order = {});

  PenstockMode mode() const { return mode_; }
  int lumped_order() const;
  const PenstockLumped& realization() const;
  const WaterwayParams& params() const { return params_; }

  WaterwayOutput derivatives(const WaterwayState& state, double q_turbine, double t = 0.0) const;

  /// Steady state for constant turbine flow; LumpedTanh / Inelastic modes.
  WaterwayState equilibrium(double q_turbine) const;
  /// Steady state with a warm delay line sampled at dt, newest sample at t0.
  WaterwayState equilibrium(double q_turbine, double dt, double t0) const;

 private:
  WaterwayParams params_;
  PenstockMode mode_;
  PenstockLumped lumped_;  // empty in delay / inelastic modes
};

/// Low-level evaluation shared with the plant assembly (operates on raw state
/// slices, no allocation). In Inelastic mode `h` excludes the column inertia
/// term. With `delay == nullptr` in delay mode the wave term is evaluated at
/// its steady value (zero net contribution), which is the trim convention.
WaterwayOutput waterway_eval(const WaterwayParams& w, PenstockMode mode, const PenstockLumped* pen,
                             double h_st, double q_hr, Eigen::Ref<const Eigen::VectorXd> xpen,
                             Eigen::Ref<Eigen::VectorXd> dxpen, double q_turbine,
                             const DelayLine* delay, double t);

}  // namespace vshp
