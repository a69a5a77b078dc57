#include "vshp/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace vshp {

std::string to_string(Event::Input input) {
  return input == Event::Input::PStar ? "P_star" : "omega_star";
}

namespace {

bool on_grid(double t, double dt) {
  const double steps = t / dt;
  return std::abs(steps - std::round(steps)) <= 1e-6 * std::max(1.0, std::abs(steps));
}

std::string trim_ws(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

void Scenario::validate() const {
  if (dt <= 0) throw ValidationError("scenario dt must be > 0");
  if (t_end <= 0) throw ValidationError("scenario t_end must be > 0");
  if (!on_grid(t_end, dt)) throw ValidationError("t_end must be a multiple of dt");
  initial.validate();
  double prev = -1;
  for (const auto& e : events) {
    if (e.t < prev) throw ValidationError("events must be sorted by time");
    prev = e.t;
    if (e.t < 0 || e.t > t_end) throw ValidationError("event times must lie within [0, t_end]");
    if (!on_grid(e.t, dt))
      throw ValidationError("event times must fall on the dt grid (no smearing)");
    PlantInputs probe = initial;
    (e.input == Event::Input::PStar ? probe.P_star : probe.omega_star) = e.value;
    probe.validate();
  }
}

Scenario parse_scenario_stream(std::istream& in, const std::string& origin) {
  Scenario sc;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim_ws(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno);

    if (line.rfind("t=", 0) == 0) {
      std::istringstream ls(line);
      std::string t_tok, set_tok, what, value_tok;
      ls >> t_tok >> set_tok >> what >> value_tok;
      std::string rest;
      if (!ls.eof()) ls >> rest;
      if (set_tok != "set" || what.empty() || value_tok.empty() || !rest.empty())
        throw LoadError(where + ": expected 't=<time> set <input> <value>'");
      Event e;
      try {
        e.t = std::stod(t_tok.substr(2));
        e.value = std::stod(value_tok);
      } catch (const std::exception&) {
        throw LoadError(where + ": bad number in event line");
      }
      if (what == "P_star") e.input = Event::Input::PStar;
      else if (what == "omega_star") e.input = Event::Input::OmegaStar;
      else throw LoadError(where + ": unknown event input '" + what + "'");
      sc.events.push_back(e);
      continue;
    }

    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw LoadError(where + ": expected 'key = value' or an event line");
    const std::string key = trim_ws(line.substr(0, eq));
    const std::string value = trim_ws(line.substr(eq + 1));
    try {
      if (key == "model") sc.model = model_kind_from_string(value);
      else if (key == "t_end") sc.t_end = std::stod(value);
      else if (key == "dt") sc.dt = std::stod(value);
      else if (key == "P_star") sc.initial.P_star = std::stod(value);
      else if (key == "omega_star") sc.initial.omega_star = std::stod(value);
      else if (key == "penstock_mode") sc.penstock_mode = penstock_mode_from_string(value);
      else if (key == "tanh_n_num") {
        if (!sc.tanh_order) sc.tanh_order = TanhOrder{};
        sc.tanh_order->n_num = std::stoi(value);
      } else if (key == "tanh_n_den") {
        if (!sc.tanh_order) sc.tanh_order = TanhOrder{};
        sc.tanh_order->n_den = std::stoi(value);
      } else {
        throw LoadError(where + ": unknown scenario key '" + key + "'");
      }
    } catch (const LoadError&) {
      throw;
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception&) {
      throw LoadError(where + ": bad value '" + value + "' for key " + key);
    }
  }
  std::stable_sort(sc.events.begin(), sc.events.end(),
                   [](const Event& a, const Event& b) { return a.t < b.t; });
  return sc;
}

Scenario parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open scenario file '" + path + "'");
  return parse_scenario_stream(in, path);
}

int SimTrace::column(const std::string& name) const {
  for (size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

std::vector<double> SimTrace::col(const std::string& name) const {
  const int c = column(name);
  if (c < 0) throw ValidationError("trace has no column '" + name + "'");
  std::vector<double> v(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) v[i] = rows[i][static_cast<size_t>(c)];
  return v;
}

double SimTrace::at(size_t row, const std::string& name) const {
  const int c = column(name);
  if (c < 0) throw ValidationError("trace has no column '" + name + "'");
  return rows.at(row)[static_cast<size_t>(c)];
}

namespace {

double clampd(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

// column order contract: t, states by name, outputs, then the applied inputs
std::vector<std::string> trace_columns(const Plant& plant) {
  std::vector<std::string> cols{"t"};
  for (const auto& l : plant.state_labels()) cols.push_back(l);
  cols.emplace_back("P_m");
  cols.emplace_back("T_m");
  cols.emplace_back("g");
  const bool hydraulic = plant.kind() != ModelKind::Linearised;
  if (hydraulic) {
    cols.emplace_back("h");
    cols.emplace_back("q");
    cols.emplace_back("eta_h");
  }
  cols.emplace_back("P_star");
  cols.emplace_back("omega_star");
  return cols;
}

void fill_row(std::vector<double>& row, double t, const PlantInputs& u, const Eigen::VectorXd& x,
              const PlantOutputs& o, bool hydraulic) {
  row.clear();
  row.push_back(t);
  for (Eigen::Index i = 0; i < x.size(); ++i) row.push_back(x(i));
  row.push_back(o.P_m);
  row.push_back(o.T_m);
  row.push_back(o.g);
  if (hydraulic) {
    row.push_back(o.h);
    row.push_back(o.q);
    row.push_back(o.eta_h);
  }
  row.push_back(u.P_star);
  row.push_back(u.omega_star);
}

bool row_finite(const std::vector<double>& row) {
  for (double v : row)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

Eigen::VectorXd integrate_step(const Plant& plant, const Eigen::VectorXd& x, const PlantInputs& u,
                               double dt, StepContext& ctx) {
  if (dt <= 0) throw ValidationError("integration dt must be > 0");
  const RateLimitWindow win{ctx.limiter.anchor, ctx.t};
  const RateLimitWindow* winp = ctx.use_limiter ? &win : nullptr;
  const DelayLine* dl = ctx.has_delay ? &ctx.delay : nullptr;

  auto f = [&](const Eigen::VectorXd& xs, double ts) {
    return plant.derivatives(xs, u, Plant::EvalContext{dl, ts, winp, false});
  };
  Eigen::VectorXd xn = rk4_step(f, x, ctx.t, dt);
  const double t_new = ctx.t + dt;

  if (ctx.has_delay) {
    const double q_new =
        plant.turbine_flow(xn, u, Plant::EvalContext{dl, t_new, winp, false});
    const double u_new = penstock_delay_update(q_new, ctx.delay, plant.params().waterway, t_new);
    ctx.delay.push(t_new, u_new);
  }
  if (ctx.use_limiter) {
    const GovernorSignals gs = plant.governor_signals(xn, u);
    const double r = plant.params().governor.rate_limit;
    ctx.limiter.anchor =
        clampd(gs.g_sat, ctx.limiter.anchor - r * dt, ctx.limiter.anchor + r * dt);
    ctx.limiter.t0 = t_new;
  }
  ctx.t = t_new;
  return xn;
}

RunResult run(const Scenario& scenario, const PlantParams& params) {
  scenario.validate();
  PlantParams prm = params;
  if (scenario.penstock_mode) prm.penstock_mode = *scenario.penstock_mode;
  if (scenario.tanh_order) prm.tanh_order = *scenario.tanh_order;
  prm.validate();

  const Plant plant = Plant::assemble(scenario.model, prm);
  const TrimResult tr = trim(plant, scenario.initial.P_star, scenario.initial.omega_star);

  RunResult result;
  SimTrace& trace = result.trace;
  trace.model = scenario.model;
  trace.penstock_mode = prm.penstock_mode;
  trace.dt = scenario.dt;
  trace.params_hash = params_hash(prm);
  trace.events = scenario.events;
  trace.columns = trace_columns(plant);
  const bool hydraulic = plant.kind() != ModelKind::Linearised;

  const double dt = scenario.dt;
  const long n = std::lround(scenario.t_end / dt);
  trace.rows.reserve(static_cast<size_t>(n) + 1);

  Eigen::VectorXd x = tr.state;
  PlantInputs inputs = scenario.initial;

  StepContext ctx;
  ctx.t = 0.0;
  ctx.use_limiter = true;
  if (plant.uses_delay_line()) {
    ctx.has_delay = true;
    const auto& W = prm.waterway;
    ctx.delay = DelayLine(dt, 2.0 * W.T_e + 4.0 * dt);
    ctx.delay.fill(0.0, W.Z_0 * tr.outputs.q);  // steady wave variable u = Z_0 q
  }
  ctx.limiter.anchor = plant.governor_signals(x, inputs).g_sat;
  ctx.limiter.t0 = 0.0;

  size_t ev = 0;
  std::vector<double> row;
  for (long k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * dt;
    while (ev < scenario.events.size() &&
           std::lround(scenario.events[ev].t / dt) <= k) {
      const Event& e = scenario.events[ev];
      (e.input == Event::Input::PStar ? inputs.P_star : inputs.omega_star) = e.value;
      ++ev;
    }

    PlantOutputs out;
    try {
      const RateLimitWindow win{ctx.limiter.anchor, t};
      out = plant.outputs(x, inputs,
                          Plant::EvalContext{ctx.has_delay ? &ctx.delay : nullptr, t, &win, false});
    } catch (const ModelError& e) {
      result.ok = false;
      result.error = e.what();
      result.t_fail = t;
      break;
    }
    fill_row(row, t, inputs, x, out, hydraulic);
    if (!row_finite(row)) {
      result.ok = false;
      result.error = "non-finite state or output";
      result.t_fail = t;
      break;
    }
    trace.rows.push_back(row);
    if (k == n) break;

    try {
      x = integrate_step(plant, x, inputs, dt, ctx);
    } catch (const ModelError& e) {
      result.ok = false;
      result.error = std::string(e.what()) + " (during step)";
      result.t_fail = t;
      break;
    }
    if (!x.allFinite()) {
      result.ok = false;
      result.error = "non-finite state after step";
      result.t_fail = t;
      break;
    }
  }
  return result;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

void write_trace_csv(const SimTrace& trace, std::ostream& out, int decimate) {
  if (decimate < 1) throw ValidationError("decimate must be >= 1");
  out << "# schema_version: 1\n";
  out << "# kind: sim_trace\n";
  out << "# model: " << to_string(trace.model) << "\n";
  out << "# penstock_mode: " << to_string(trace.penstock_mode) << "\n";
  out << "# params_hash: " << hash_hex(trace.params_hash) << "\n";
  out << "# dt: " << num(trace.dt) << "\n";
  out << "# decimate: " << decimate << "\n";
  for (size_t i = 0; i < trace.columns.size(); ++i)
    out << trace.columns[i] << (i + 1 < trace.columns.size() ? "," : "\n");
  for (size_t r = 0; r < trace.rows.size(); r += static_cast<size_t>(decimate)) {
    const auto& row = trace.rows[r];
    for (size_t i = 0; i < row.size(); ++i) out << num(row[i]) << (i + 1 < row.size() ? "," : "\n");
  }
}

void write_events_json(const SimTrace& trace, std::ostream& out) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& e : trace.events)
    list.push_back({{"t", e.t}, {"set", to_string(e.input)}, {"value", e.value}});
  const nlohmann::json j{{"schema_version", 1}, {"kind", "events"}, {"events", list}};
  out << j.dump(2) << "\n";
}

void write_run_metadata_json(const SimTrace& trace, const std::string& trace_file,
                             const std::string& events_file, std::ostream& out) {
  nlohmann::json j{
      {"schema_version", 1},
      {"kind", "run_metadata"},
      {"model", to_string(trace.model)},
      {"penstock_mode", to_string(trace.penstock_mode)},
      {"params_hash", hash_hex(trace.params_hash)},
      {"dt", trace.dt},
      {"rows", trace.rows.size()},
      {"columns", trace.columns},
      {"trace_file", trace_file},
      {"events_file", events_file},
  };
  out << j.dump(2) << "\n";
}

}  // namespace vshp
