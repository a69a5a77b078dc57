#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>
#include <vshp/sim.hpp>

#include "helpers.hpp"

using namespace vshp;

namespace {

Scenario scenario_from_text(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario_stream(in, "<test>");
}

}  // namespace

TEST_CASE("rk4 stage update: exact on constant rates, tight on the exponential") {
  Eigen::VectorXd x(1);
  x << 2.0;
  auto constant = [](const Eigen::VectorXd&, double) {
    Eigen::VectorXd d(1);
    d << 0.7;
    return d;
  };
  x = rk4_step(constant, x, 0.0, 0.25);
  CHECK(x(0) == doctest::Approx(2.0 + 0.7 * 0.25).epsilon(1e-16));

  auto decay = [](const Eigen::VectorXd& xs, double) { return Eigen::VectorXd(-xs); };
  Eigen::VectorXd y(1);
  y << 1.0;
  const double dt = 0.01;
  double max_err = 0;
  for (int k = 1; k <= 1000; ++k) {
    y = rk4_step(decay, y, (k - 1) * dt, dt);
    max_err = std::max(max_err, std::abs(y(0) - std::exp(-k * dt)));
  }
  CHECK(max_err < 1e-8);
}

TEST_CASE("scenario parsing and validation") {
  const Scenario sc = scenario_from_text(
      "# demo\n"
      "model = hygov\n"
      "t_end = 10\n"
      "dt = 0.001\n"
      "P_star = 0.5\n"
      "omega_star = 1.0\n"
      "t=5.0 set P_star 0.7\n"
      "t=8.0 set omega_star 0.95\n");
  CHECK(sc.model == ModelKind::Hygov);
  CHECK(sc.events.size() == 2);
  CHECK(sc.events[0].input == Event::Input::PStar);
  CHECK(sc.events[1].value == doctest::Approx(0.95));
  sc.validate();

  CHECK_THROWS_AS(parse_scenario("/nonexistent/file.scn"), LoadError);
  CHECK_THROWS_WITH_AS(scenario_from_text("bogus = 1\n"), doctest::Contains("unknown scenario"),
                       LoadError);
  CHECK_THROWS_AS(scenario_from_text("t=1.0 poke P_star 0.5\n"), LoadError);

  Scenario bad = scenario_from_text("t_end = 10\ndt = 0.001\nP_star = 0.5\n");
  bad.events.push_back({5.0005, Event::Input::PStar, 0.6});
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("grid"), ValidationError);

  Scenario off = scenario_from_text("t_end = 10.0005\ndt = 0.001\nP_star = 0.5\n");
  CHECK_THROWS_WITH_AS(off.validate(), doctest::Contains("multiple of dt"), ValidationError);
}

TEST_CASE("a null scenario holds every recorded quantity") {
  Scenario sc;
  sc.model = ModelKind::Hygov;
  sc.t_end = 100.0;
  sc.dt = 1e-3;
  sc.initial = {0.6, 1.0};
  const RunResult rr = run(sc, default_params());
  REQUIRE(rr.ok);
  const auto& rows = rr.trace.rows;
  REQUIRE(rows.size() == 100001);
  double worst = 0;
  for (size_t c = 1; c < rr.trace.columns.size(); ++c)
    for (size_t r = 0; r < rows.size(); ++r)
      worst = std::max(worst, std::abs(rows[r][c] - rows[0][c]));
  CHECK(worst < 1e-6);
}

TEST_CASE("load rejection transient: overshoot, resettle, monotone opening tail") {
  const Scenario sc = parse_scenario(testutil::data_path("scenarios/step_p_down.scn"));
  const RunResult rr = run(sc, default_params());
  REQUIRE(rr.ok);
  const std::vector<double> t = rr.trace.col("t");
  const std::vector<double> omega = rr.trace.col("omega");
  const std::vector<double> g = rr.trace.col("g");

  // the rotor first absorbs the surplus: speed rises above the reference
  const double peak = *std::max_element(omega.begin(), omega.end());
  CHECK(peak > 1.01);

  // re-enters the +/-1% band for good before t = 200 s
  size_t last_outside = 0;
  for (size_t i = 0; i < omega.size(); ++i)
    if (std::abs(omega[i] - 1.0) > 0.01) last_outside = i;
  CHECK(t[last_outside] < 200.0);

  // opening settles monotonically (1e-4 slack) over the final 50 s
  const size_t tail = static_cast<size_t>(std::lround(150.0 / sc.dt));
  double dir = g.back() - g[tail];
  double worst_reversal = 0;
  for (size_t i = tail + 1; i < g.size(); ++i) {
    const double step = g[i] - g[i - 1];
    if (step * dir < 0) worst_reversal = std::max(worst_reversal, std::abs(step));
  }
  CHECK(worst_reversal < 1e-4);

  // the step itself lands exactly on the grid row at t = 5
  const size_t k5 = static_cast<size_t>(std::lround(5.0 / sc.dt));
  CHECK(rr.trace.at(k5 - 1, "P_star") == doctest::Approx(0.9));
  CHECK(rr.trace.at(k5, "P_star") == doctest::Approx(0.3));
}

TEST_CASE("power up-step: rotor decelerates first, opening slews at the limit") {
  const Scenario sc = parse_scenario(testutil::data_path("scenarios/step_p_up.scn"));
  const RunResult rr = run(sc, default_params());
  REQUIRE(rr.ok);
  const std::vector<double> omega = rr.trace.col("omega");
  const std::vector<double> g = rr.trace.col("g");
  const size_t k5 = static_cast<size_t>(std::lround(5.0 / sc.dt));
  CHECK(omega[k5 + 1] < omega[k5]);
  CHECK(omega[k5 + 200] < 1.0);

  // while recovering, the opening rate never exceeds the limit
  const double r = default_params().governor.rate_limit;
  double max_rate = 0;
  for (size_t i = k5; i + 1 < g.size(); ++i)
    max_rate = std::max(max_rate, std::abs(g[i + 1] - g[i]) / sc.dt);
  CHECK(max_rate <= r + 1e-9);
}

TEST_CASE("identical scenarios produce bit-identical traces") {
  const Scenario sc = parse_scenario(testutil::data_path("scenarios/step_speed_down.scn"));
  const RunResult a = run(sc, default_params());
  const RunResult b = run(sc, default_params());
  REQUIRE(a.ok);
  REQUIRE(b.ok);
  REQUIRE(a.trace.rows.size() == b.trace.rows.size());
  bool identical = true;
  for (size_t i = 0; i < a.trace.rows.size() && identical; ++i)
    identical = a.trace.rows[i] == b.trace.rows[i];
  CHECK(identical);
}

TEST_CASE("halving dt moves the trace by less than 1e-5 RMS") {
  for (const char* name : {"scenarios/step_p_down.scn", "scenarios/step_speed_down.scn"}) {
    Scenario sc = parse_scenario(testutil::data_path(name));
    sc.t_end = 60.0;  // full transient window, trimmed for runtime
    const RunResult coarse = run(sc, default_params());
    Scenario fine = sc;
    fine.dt = sc.dt / 2;
    const RunResult dense = run(fine, default_params());
    REQUIRE(coarse.ok);
    REQUIRE(dense.ok);

    for (const char* colname : {"omega", "g", "h", "P_m"}) {
      const std::vector<double> a = coarse.trace.col(colname);
      const std::vector<double> b = dense.trace.col(colname);
      std::vector<double> b2(a.size());
      for (size_t i = 0; i < a.size(); ++i) b2[i] = b[2 * i];
      CHECK(testutil::rms_diff(a, b2) < 1e-5);
    }
  }
}

TEST_CASE("rk4 order holds on a smooth plant transient") {
  const PlantParams p = default_params();
  const Plant plant = Plant::assemble(ModelKind::Euler, p);
  const PlantInputs u{0.6, 1.0};
  const TrimResult tr = trim(plant, u.P_star, u.omega_star);

  Eigen::VectorXd x0 = tr.state;
  x0(plant.index_of("h_st")) += 0.005;  // excite the mass oscillation, limits stay inactive

  auto integrate_to = [&](double dt, double t_end) {
    StepContext ctx;
    ctx.limiter.anchor = plant.governor_signals(x0, u).g_sat;
    Eigen::VectorXd x = x0;
    const long n = std::lround(t_end / dt);
    for (long k = 0; k < n; ++k) x = integrate_step(plant, x, u, dt, ctx);
    return x;
  };

  const double t_end = 4.0;
  const Eigen::VectorXd ref = integrate_to(1.25e-4, t_end);
  const double e1 = (integrate_to(2e-3, t_end) - ref).lpNorm<Eigen::Infinity>();
  const double e2 = (integrate_to(1e-3, t_end) - ref).lpNorm<Eigen::Infinity>();
  REQUIRE(e2 > 0);
  const double ratio = e1 / e2;
  CHECK(ratio > 10.0);
  CHECK(ratio < 26.0);
}

TEST_CASE("mid-run numerical failure returns the trace prefix") {
  Scenario sc;
  sc.model = ModelKind::Euler;
  sc.t_end = 10.0;
  sc.dt = 0.25;  // far beyond the stability limit of the penstock modes
  sc.initial = {0.6, 1.0};
  // a disturbance to seed the unstable modes; the trim alone is a fixed point
  sc.events.push_back({0.25, Event::Input::PStar, 0.7});
  const RunResult rr = run(sc, default_params());
  CHECK_FALSE(rr.ok);
  CHECK(rr.t_fail >= 0);
  CHECK_FALSE(rr.error.empty());
  CHECK(rr.trace.rows.size() >= 1);
  for (const auto& row : rr.trace.rows)
    for (double v : row) CHECK(std::isfinite(v));
}

TEST_CASE("trace files: csv layout, events sidecar, metadata") {
  Scenario sc;
  sc.model = ModelKind::Hygov;
  sc.t_end = 1.0;
  sc.dt = 1e-2;
  sc.initial = {0.5, 1.0};
  sc.events.push_back({0.5, Event::Input::PStar, 0.55});
  const RunResult rr = run(sc, default_params());
  REQUIRE(rr.ok);

  std::ostringstream csv;
  write_trace_csv(rr.trace, csv);
  const std::string text = csv.str();
  CHECK(text.find("# schema_version: 1") != std::string::npos);
  CHECK(text.find("t,omega,q,gov_integ,gov_dfilt,gov_servo,P_m,T_m,g,h,q,eta_h,P_star,omega_star") !=
        std::string::npos);

  std::ostringstream ev;
  write_events_json(rr.trace, ev);
  const nlohmann::json jev = nlohmann::json::parse(ev.str());
  CHECK(jev["schema_version"] == 1);
  REQUIRE(jev["events"].is_array());
  REQUIRE(jev["events"].size() == 1);
  CHECK(jev["events"][0]["set"] == "P_star");
  CHECK(jev["events"][0]["t"] == doctest::Approx(0.5));

  std::ostringstream meta;
  write_run_metadata_json(rr.trace, "trace.csv", "events.json", meta);
  const nlohmann::json jm = nlohmann::json::parse(meta.str());
  CHECK(jm["schema_version"] == 1);
  CHECK(jm["model"] == "hygov");
  CHECK(jm["rows"] == 101);
  CHECK(jm["params_hash"].get<std::string>().size() == 16);

  // decimation keeps every n-th row
  std::ostringstream csv10;
  write_trace_csv(rr.trace, csv10, 10);
  int lines = 0;
  for (char c : csv10.str())
    if (c == '\n') ++lines;
  CHECK(lines == 7 + 1 + 11);  // metadata, header, rows
}
