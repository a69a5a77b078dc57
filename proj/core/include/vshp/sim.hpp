#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vshp/plant.hpp"

namespace vshp {

struct Event {
  enum class Input { PStar, OmegaStar };
  double t = 0;
  Input input = Input::PStar;
  double value = 0;
};

std::string to_string(Event::Input input);

struct Scenario {
  ModelKind model = ModelKind::Euler;
  double t_end = 10.0;
  double dt = 1e-3;
  PlantInputs initial;
  std::vector<Event> events;
  std::optional<PenstockMode> penstock_mode;  ///< overrides the parameter file
  std::optional<TanhOrder> tanh_order;

  /// dt > 0, t_end a multiple of dt, events sorted, within [0, t_end], on grid.
  void validate() const;
};

/// Scenario text format: "key = value" header lines (model, t_end, dt, P_star,
/// omega_star, penstock_mode, tanh_n_num, tanh_n_den) and event lines
/// "t=<time> set <P_star|omega_star> <value>".
Scenario parse_scenario(const std::string& path);
Scenario parse_scenario_stream(std::istream& in, const std::string& origin);

struct SimTrace {
  std::vector<std::string> columns;  ///< t, P_star, omega_star, states..., outputs...
  std::vector<std::vector<double>> rows;
  std::vector<Event> events;
  ModelKind model = ModelKind::Euler;
  PenstockMode penstock_mode = PenstockMode::LumpedTanh;
  double dt = 0;
  std::uint64_t params_hash = 0;

  int column(const std::string& name) const;  ///< -1 when absent
  std::vector<double> col(const std::string& name) const;
  double at(size_t row, const std::string& name) const;
};

struct RunResult {
  SimTrace trace;
  bool ok = true;
  std::string error;
  double t_fail = -1;
};

/// Trims at the initial inputs, warms the delay line, applies events at exact
/// grid times and records every step. Mid-run numerical failures return the
/// trace prefix with ok = false.
RunResult run(const Scenario& scenario, const PlantParams& params);

/// Integration context owned across steps: time, delay-line history and the
/// rate-limiter anchor (advanced once per outer step).
struct StepContext {
  double t = 0;
  DelayLine delay;
  bool has_delay = false;
  RateLimitWindow limiter;
  bool use_limiter = true;
};

/// One classical RK4 step of the plant ODE; advances ctx (time, delay
/// samples, limiter anchor) consistently with the stage interpolation.
Eigen::VectorXd integrate_step(const Plant& plant, const Eigen::VectorXd& x, const PlantInputs& u,
                               double dt, StepContext& ctx);

/// Generic RK4 stage update for dx/dt = f(x, t).
template <class F>
Eigen::VectorXd rk4_step(F&& f, const Eigen::VectorXd& x, double t, double dt) {
  const Eigen::VectorXd k1 = f(x, t);
  const Eigen::VectorXd k2 = f(x + (0.5 * dt) * k1, t + 0.5 * dt);
  const Eigen::VectorXd k3 = f(x + (0.5 * dt) * k2, t + 0.5 * dt);
  const Eigen::VectorXd k4 = f(x + dt * k3, t + dt);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void write_trace_csv(const SimTrace& trace, std::ostream& out, int decimate = 1);
void write_events_json(const SimTrace& trace, std::ostream& out);
void write_run_metadata_json(const SimTrace& trace, const std::string& trace_file,
                             const std::string& events_file, std::ostream& out);

}  // namespace vshp
