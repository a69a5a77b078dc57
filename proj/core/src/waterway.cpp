#include "vshp/waterway.hpp"

#include <cmath>

namespace vshp {

DelayLine::DelayLine(double dt, double span) : dt_(dt) {
  if (dt <= 0) throw ValidationError("delay line dt must be > 0");
  if (span <= 0) throw ValidationError("delay line span must be > 0");
  capacity_ = static_cast<int>(std::ceil(span / dt)) + 2;
  buf_.assign(static_cast<size_t>(capacity_), 0.0);
}

void DelayLine::fill(double t_latest, double value) {
  if (capacity_ == 0) throw ModelError("delay line not sized");
  std::fill(buf_.begin(), buf_.end(), value);
  count_ = capacity_;
  head_ = 0;
  t_latest_ = t_latest;
}

void DelayLine::push(double t, double value) {
  if (capacity_ == 0) throw ModelError("delay line not sized");
  if (count_ > 0 && std::abs(t - (t_latest_ + dt_)) > 1e-9 * std::max(1.0, std::abs(t)))
    throw ModelError("delay line samples must advance by dt");
  head_ = count_ == 0 ? 0 : (head_ + 1) % capacity_;
  buf_[static_cast<size_t>(head_)] = value;
  if (count_ < capacity_) ++count_;
  t_latest_ = t;
}

double DelayLine::sample(double t) const {
  if (count_ == 0)
    throw ModelError("delay line is empty; pre-fill at least 2*T_e of history (warm-up padding)");
  double back = (t_latest_ - t) / dt_;
  if (back < -1e-9 || back > static_cast<double>(count_ - 1) + 1e-9)
    throw ModelError("delay line history does not cover the requested time; "
                     "pre-fill at least 2*T_e of history (warm-up padding)");
  back = std::min(std::max(back, 0.0), static_cast<double>(count_ - 1));
  const int i0 = static_cast<int>(back);
  const double frac = back - i0;
  auto at = [&](int steps_back) {
    return buf_[static_cast<size_t>((head_ - steps_back % capacity_ + capacity_) % capacity_)];
  };
  if (frac < 1e-12 || i0 + 1 > count_ - 1) return at(i0);
  return at(i0) * (1.0 - frac) + at(i0 + 1) * frac;
}

PenstockLumped PenstockLumped::build(const WaterwayParams& w, TanhOrder order) {
  if (order.n_num < 0 || order.n_den < order.n_num + 1)
    throw ValidationError("lumped tanh realization requires n_num >= 0 and n_den >= n_num + 1");

  // tanh(s T_e) ~ s T_e * prod_n (1 + (s T_e / (n pi))^2) / prod_n (1 + (2 s T_e / ((2n-1) pi))^2)
  //
  // Realized as one oscillator block per retained water-hammer harmonic
  // omega_n = (2n-1) pi / (2 T_e), via the partial fractions of the odd
  // rational function: -Z_0 tanh ~ sum_n a_n s / (s^2 + omega_n^2).
  // Input/output gains are split as sqrt(|a_n|) per block so the states stay
  // at flow-like magnitude (a companion form is far too ill-conditioned for
  // the finite-difference jacobians downstream).
  const int nd = order.n_den;
  std::vector<double> omega(static_cast<size_t>(nd));
  for (int n = 1; n <= nd; ++n)
    omega[static_cast<size_t>(n - 1)] = (2 * n - 1) * M_PI / (2.0 * w.T_e);

  PenstockLumped pen;
  const int m = 2 * nd;
  pen.A = Eigen::MatrixXd::Zero(m, m);
  pen.B = Eigen::VectorXd::Zero(m);
  pen.C = Eigen::RowVectorXd::Zero(m);

  for (int n = 0; n < nd; ++n) {
    const double wn2 = omega[static_cast<size_t>(n)] * omega[static_cast<size_t>(n)];
    double residue = -w.Z_0 * w.T_e;
    for (int l = 1; l <= order.n_num; ++l) {
      const double z = omega[static_cast<size_t>(n)] * w.T_e / (l * M_PI);
      residue *= 1.0 - z * z;
    }
    for (int k = 0; k < nd; ++k) {
      const double wk2 = omega[static_cast<size_t>(k)] * omega[static_cast<size_t>(k)];
      residue *= wk2;
      if (k != n) residue /= wk2 - wn2;
    }
    const double scale = std::sqrt(std::abs(residue));
    const int i = 2 * n;
    pen.A(i, i + 1) = omega[static_cast<size_t>(n)];
    pen.A(i + 1, i) = -omega[static_cast<size_t>(n)];
    pen.B(i + 1) = scale;
    pen.C(i + 1) = scale == 0 ? 0.0 : residue / scale;
  }
  return pen;
}

double PenstockLumped::head(Eigen::Ref<const Eigen::VectorXd> x) const { return C * x; }

void PenstockLumped::derivatives(Eigen::Ref<const Eigen::VectorXd> x, double q,
                                 Eigen::Ref<Eigen::VectorXd> dx) const {
  dx.noalias() = A * x;
  dx += B * q;
}

Eigen::VectorXd PenstockLumped::equilibrium(double q) const {
  const int m = order();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
  // per oscillator block: x_b = 0, x_a = b q / omega_n
  for (int i = 0; i + 1 < m; i += 2) x(i) = B(i + 1) * q / A(i, i + 1);
  return x;
}

std::complex<double> PenstockLumped::frequency_response(double f_hz) const {
  const int m = order();
  const std::complex<double> s(0.0, 2.0 * M_PI * f_hz);
  Eigen::MatrixXcd M = s * Eigen::MatrixXcd::Identity(m, m) - A.cast<std::complex<double>>();
  Eigen::VectorXcd x = M.partialPivLu().solve(B.cast<std::complex<double>>());
  return (C.cast<std::complex<double>>() * x)(0);
}

double headrace_derivative(double q_hr, double h_node, const WaterwayParams& w) {
  return (1.0 - h_node - friction_head_loss(w.f_p2, q_hr)) / w.T_w2;
}

double surge_tank_derivative(double q_hr, double q_pen, const WaterwayParams& w) {
  return (q_hr - q_pen) / w.C_s;
}

double surge_node_head(double h_st, double q_net, const WaterwayParams& w) {
  return h_st - friction_head_loss(w.f_p0, q_net);
}

double penstock_delay_head(double q, const DelayLine& history, const WaterwayParams& w, double t) {
  return -w.Z_0 * q + history.sample(t - 2.0 * w.T_e);
}

double penstock_delay_update(double q, const DelayLine& history, const WaterwayParams& w, double t) {
  return 2.0 * w.Z_0 * q - history.sample(t - 2.0 * w.T_e);
}

PenstockResponse exact_penstock_response(double f_hz, const WaterwayParams& w, bool lossy) {
  PenstockResponse r;
  if (f_hz < 0) throw ValidationError("frequency must be >= 0");
  if (!lossy) {
    const double theta = 2.0 * M_PI * f_hz * w.T_e;
    if (std::abs(std::cos(theta)) < 1e-12) {
      r.resonance = true;
      return r;
    }
    r.value = -w.Z_0 * std::tanh(std::complex<double>(0.0, theta));
    return r;
  }
  const double beta = w.f_p1 / w.T_w;  // loss coefficient at rated flow
  if (f_hz == 0.0) {
    r.value = -w.T_w * beta;  // resistive limit
    return r;
  }
  const std::complex<double> s(0.0, 2.0 * M_PI * f_hz);
  const std::complex<double> arg = std::sqrt(s * s + beta * s) * w.T_e;
  if (std::abs(std::cosh(arg)) < 1e-12) {
    r.resonance = true;
    return r;
  }
  r.value = -(w.T_w / w.T_e) * std::sqrt(1.0 + beta / s) * std::tanh(arg);
  return r;
}

WaterwayOutput waterway_eval(const WaterwayParams& w, PenstockMode mode, const PenstockLumped* pen,
                             double h_st, double q_hr, Eigen::Ref<const Eigen::VectorXd> xpen,
                             Eigen::Ref<Eigen::VectorXd> dxpen, double q_turbine,
                             const DelayLine* delay, double t) {
  WaterwayOutput out;
  const double q = q_turbine;
  const double q_net = q_hr - q;
  out.h_node = surge_node_head(h_st, q_net, w);
  out.dh_st = surge_tank_derivative(q_hr, q, w);
  out.dq_hr = headrace_derivative(q_hr, out.h_node, w);

  double wave = 0.0;
  switch (mode) {
    case PenstockMode::LumpedTanh:
      wave = pen->head(xpen);
      pen->derivatives(xpen, q, dxpen);
      break;
    case PenstockMode::TravellingWaveDelay:
      // without history the wave term sits at its steady value (trim convention)
      wave = delay ? penstock_delay_head(q, *delay, w, t) : 0.0;
      break;
    case PenstockMode::Inelastic:
      wave = 0.0;  // the -T_w dq/dt column term is applied by the caller
      break;
  }
  out.h = wave + out.h_node - friction_head_loss(w.f_p1, q);
  return out;
}

Waterway::Waterway(const WaterwayParams& w, PenstockMode mode, TanhOrder order)
    : params_(w), mode_(mode) {
  if (mode == PenstockMode::LumpedTanh) lumped_ = PenstockLumped::build(w, order);
}

int Waterway::lumped_order() const {
  return mode_ == PenstockMode::LumpedTanh ? lumped_.order() : 0;
}

const PenstockLumped& Waterway::realization() const {
  if (mode_ != PenstockMode::LumpedTanh)
    throw ModelError("no lumped realization in this penstock mode");
  return lumped_;
}

WaterwayOutput Waterway::derivatives(const WaterwayState& state, double q_turbine, double t) const {
  Eigen::VectorXd dpen(lumped_order());
  const DelayLine* delay =
      mode_ == PenstockMode::TravellingWaveDelay && !state.delay_line.empty() ? &state.delay_line
                                                                              : nullptr;
  WaterwayOutput out = waterway_eval(params_, mode_, &lumped_, state.h_st, state.q_hr,
                                     state.penstock_lumped, dpen, q_turbine, delay, t);
  out.dpenstock = std::move(dpen);
  return out;
}

WaterwayState Waterway::equilibrium(double q_turbine) const {
  WaterwayState s;
  s.q_hr = q_turbine;
  s.h_st = 1.0 - friction_head_loss(params_.f_p2, q_turbine);
  if (mode_ == PenstockMode::LumpedTanh) s.penstock_lumped = lumped_.equilibrium(q_turbine);
  return s;
}

WaterwayState Waterway::equilibrium(double q_turbine, double dt, double t0) const {
  WaterwayState s = equilibrium(q_turbine);
  if (mode_ == PenstockMode::TravellingWaveDelay) {
    // steady wave variable: u = 2 Z_0 q - u  =>  u = Z_0 q
    s.delay_line = DelayLine(dt, 2.0 * params_.T_e + 2.0 * dt);
    s.delay_line.fill(t0, params_.Z_0 * q_turbine);
  }
  return s;
}

}  // namespace vshp
