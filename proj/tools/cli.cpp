#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <vshp/sim.hpp>
#include <vshp/smallsignal.hpp>

namespace fs = std::filesystem;

namespace vshp::cli {
namespace {

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct CommonOpts {
  std::string params_file;
  std::string out_dir = ".";
};

PlantParams load_plant_params(const CommonOpts& c, std::ostream& out) {
  if (c.params_file.empty()) return default_params();
  LoadResult r = load_params(c.params_file);
  for (const auto& d : r.defaulted) out << "note: " << d << "\n";
  return r.params;
}

std::ofstream open_output(const fs::path& path) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream f(path);
  if (!f) throw LoadError("cannot write output file '" + path.string() + "'");
  return f;
}

nlohmann::json state_json(const Plant& plant, const Eigen::VectorXd& x) {
  nlohmann::json j;
  for (size_t i = 0; i < plant.state_labels().size(); ++i)
    j[plant.state_labels()[i]] = x(static_cast<Eigen::Index>(i));
  return j;
}

nlohmann::json outputs_json(const PlantOutputs& o) {
  nlohmann::json j{{"omega", o.omega}, {"P_m", o.P_m}, {"T_m", o.T_m}, {"g", o.g}};
  if (o.hydraulic) {
    j["h"] = o.h;
    j["q"] = o.q;
  }
  if (o.eta_defined) j["eta_h"] = o.eta_h;
  return j;
}

int cmd_simulate(const CommonOpts& common, const std::string& scenario_file,
                 const std::string& model_override, int decimate, std::ostream& out,
                 std::ostream& err) {
  const PlantParams params = load_plant_params(common, out);
  Scenario sc = parse_scenario(scenario_file);
  if (!model_override.empty()) sc.model = model_kind_from_string(model_override);

  const RunResult rr = vshp::run(sc, params);

  const fs::path dir(common.out_dir);
  auto trace_f = open_output(dir / "trace.csv");
  write_trace_csv(rr.trace, trace_f, decimate);
  auto events_f = open_output(dir / "events.json");
  write_events_json(rr.trace, events_f);
  auto meta_f = open_output(dir / "run.json");
  write_run_metadata_json(rr.trace, "trace.csv", "events.json", meta_f);

  out << "wrote " << (dir / "trace.csv").string() << " (" << rr.trace.rows.size() << " rows), "
      << (dir / "events.json").string() << ", " << (dir / "run.json").string() << "\n";
  if (!rr.ok) {
    err << "simulation failed at t = " << rr.t_fail << ": " << rr.error
        << " (partial trace written)\n";
    return 1;
  }
  return 0;
}

int cmd_trim(const CommonOpts& common, const std::string& model, double pstar, double wstar,
             std::ostream& out) {
  const PlantParams params = load_plant_params(common, out);
  const Plant plant = Plant::assemble(model_kind_from_string(model), params);
  const TrimResult tr = trim(plant, pstar, wstar);

  nlohmann::json j{
      {"schema_version", 1},
      {"kind", "trim"},
      {"model", model},
      {"penstock_mode", to_string(params.penstock_mode)},
      {"params_hash", hash_hex(params_hash(params))},
      {"T_a", params.turbine.T_a},
      {"inputs", {{"P_star", pstar}, {"omega_star", wstar}}},
      {"residual", tr.residual},
      {"iterations", tr.iterations},
      {"state", state_json(plant, tr.state)},
      {"outputs", outputs_json(tr.outputs)},
  };
  auto f = open_output(fs::path(common.out_dir) / "trim.json");
  f << j.dump(2) << "\n";
  out << "trim " << model << " P*=" << pstar << " w*=" << wstar << ": g=" << tr.outputs.g
      << " residual=" << tr.residual << "\n";
  return 0;
}

int cmd_linearize(const CommonOpts& common, const std::string& model, double pstar, double wstar,
                  std::ostream& out) {
  const PlantParams params = load_plant_params(common, out);
  const Plant plant = Plant::assemble(model_kind_from_string(model), params);
  const TrimResult tr = trim(plant, pstar, wstar);
  const LinearModel m = linearize(plant, tr.state, {pstar, wstar});

  auto matrix_json = [](const Eigen::MatrixXd& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
      rows.push_back(row);
    }
    return rows;
  };

  nlohmann::json j{
      {"schema_version", 1},
      {"kind", "linear_model"},
      {"model", model},
      {"penstock_mode", to_string(params.penstock_mode)},
      {"params_hash", hash_hex(params_hash(params))},
      {"T_a", params.turbine.T_a},
      {"inputs", {{"P_star", pstar}, {"omega_star", wstar}}},
      {"state_labels", m.state_labels},
      {"input_labels", {"P_star", "omega_star"}},
      {"output_labels", m.output_labels},
      {"A", matrix_json(m.A)},
      {"B", matrix_json(m.B)},
      {"C", matrix_json(m.C)},
      {"D", matrix_json(m.D)},
      {"trim_state", state_json(plant, tr.state)},
  };
  auto f = open_output(fs::path(common.out_dir) / "linear_model.json");
  f << j.dump(2) << "\n";
  out << "linearized " << model << " at P*=" << pstar << " w*=" << wstar << " ("
      << plant.dim() << " states)\n";
  return 0;
}

int cmd_modes(const CommonOpts& common, const std::string& model, double pstar, double wstar,
              bool sum_normalize, std::ostream& out) {
  const PlantParams params = load_plant_params(common, out);
  const Plant plant = Plant::assemble(model_kind_from_string(model), params);
  const TrimResult tr = trim(plant, pstar, wstar);
  const LinearModel m = linearize(plant, tr.state, {pstar, wstar});
  const ModalReport report = modes(m.A, m.state_labels, sum_normalize);

  auto f = open_output(fs::path(common.out_dir) / "modes.json");
  write_modal_json(report, plant, tr, f);
  out << "modes " << model << " at P*=" << pstar << " w*=" << wstar << ": "
      << report.eigenvalues.size() << " eigenvalues, "
      << oscillatory_modes(report).size() << " oscillatory pairs\n";
  return 0;
}

int cmd_sweep(const CommonOpts& common, const std::string& model, const std::string& grid,
              std::ostream& out) {
  const PlantParams params = load_plant_params(common, out);
  const ModelKind kind = model_kind_from_string(model);

  std::vector<PlantInputs> points;
  if (grid == "pstar") {
    for (double P = 0.3; P <= 0.9001; P += 0.1) points.push_back({P, 1.0});
  } else if (grid == "wstar") {
    for (double w = 0.90; w <= 1.1001; w += 0.05) points.push_back({0.6, w});
  } else if (grid == "both") {
    for (double P = 0.3; P <= 0.9001; P += 0.1)
      for (double w = 0.90; w <= 1.1001; w += 0.05) points.push_back({P, w});
  } else {
    throw ValidationError("unknown sweep grid '" + grid + "' (expected pstar, wstar or both)");
  }

  const std::vector<SweepPoint> result = sweep(kind, params, points);
  auto f = open_output(fs::path(common.out_dir) / "sweep.csv");
  write_sweep_csv(result, kind, params, f);

  int failed = 0;
  for (const auto& pt : result)
    if (!pt.ok) ++failed;
  out << "sweep " << model << " over " << grid << ": " << result.size() - failed << " points ok, "
      << failed << " failed\n";
  return 0;
}

int cmd_efficiency_map(const CommonOpts& common, const std::string& model, double fixed_power,
                       std::ostream& out) {
  const PlantParams params = load_plant_params(common, out);
  std::vector<ModelKind> kinds;
  if (model == "all") {
    kinds = {ModelKind::Euler, ModelKind::Ieee, ModelKind::Hygov};
  } else {
    const ModelKind k = model_kind_from_string(model);
    if (k == ModelKind::Linearised)
      throw ValidationError("efficiency is not defined for the linearised model");
    kinds = {k};
  }

  const std::string hash = hash_hex(params_hash(params));
  const fs::path dir(common.out_dir);

  {
    auto f = open_output(dir / "efficiency_vs_omega.csv");
    f << "# schema_version: 1\n# kind: efficiency_vs_omega\n";
    f << "# params_hash: " << hash << "\n";
    f << "# fixed_power: " << num(fixed_power) << "\n";
    f << "# convention: shared unit-head operating family (h = 1), opening solved for the "
         "fixed power; eta referenced to source head\n";
    f << "omega";
    for (ModelKind k : kinds) f << ",eta_" << to_string(k);
    f << "\n";
    for (double w = 0.85; w <= 1.15001; w += 0.0125) {
      f << num(w);
      for (ModelKind k : kinds) f << "," << num(efficiency_at_unit_head(k, params, w, fixed_power));
      f << "\n";
    }
  }
  {
    auto f = open_output(dir / "efficiency_vs_power.csv");
    f << "# schema_version: 1\n# kind: efficiency_vs_power\n";
    f << "# params_hash: " << hash << "\n";
    f << "# convention: native steady chain at omega = 1 (waterway loss head for euler/ieee, "
         "unit head for hygov), parametric in the opening; eta referenced to source head\n";
    f << "g";
    for (ModelKind k : kinds) f << ",P_m_" << to_string(k) << ",eta_" << to_string(k);
    f << "\n";
    for (double g = 0.15; g <= 1.0001; g += 0.017) {
      f << num(g);
      for (ModelKind k : kinds) {
        const SteadyPoint pt = steady_chain(k, params, g, 1.0);
        f << "," << num(pt.P_m) << "," << num(pt.eta);
      }
      f << "\n";
    }
  }
  out << "wrote " << (dir / "efficiency_vs_omega.csv").string() << " and "
      << (dir / "efficiency_vs_power.csv").string() << "\n";
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"variable-speed hydropower plant simulation and small-signal analysis"};
  app.require_subcommand(1);

  CommonOpts common;
  std::string model, scenario_file, grid = "pstar";
  std::string eff_model = "all";
  double pstar = 0.6, wstar = 1.0, fixed_power = 0.6;
  int decimate = 1;
  bool sum_normalize = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--params", common.params_file, "parameter file (built-in reference if omitted)");
    sub->add_option("--out", common.out_dir, "output directory")->capture_default_str();
  };

  CLI::App* sim = app.add_subcommand("simulate", "run a scenario and write the trace");
  add_common(sim);
  sim->add_option("--scenario", scenario_file, "scenario file")->required();
  sim->add_option("--model", model, "override the scenario's model");
  sim->add_option("--decimate", decimate, "keep every n-th trace row")->capture_default_str();

  CLI::App* tr = app.add_subcommand("trim", "solve a steady operating point");
  add_common(tr);
  tr->add_option("--model", model, "euler | ieee | hygov | linearised")->required();
  tr->add_option("--pstar", pstar, "commanded power")->capture_default_str();
  tr->add_option("--wstar", wstar, "speed reference")->capture_default_str();

  CLI::App* lin = app.add_subcommand("linearize", "trim and write the linear state-space model");
  add_common(lin);
  lin->add_option("--model", model, "euler | ieee | hygov | linearised")->required();
  lin->add_option("--pstar", pstar, "commanded power")->capture_default_str();
  lin->add_option("--wstar", wstar, "speed reference")->capture_default_str();

  CLI::App* md = app.add_subcommand("modes", "eigenvalues and participation factors at a trim");
  add_common(md);
  md->add_option("--model", model, "euler | ieee | hygov | linearised")->required();
  md->add_option("--pstar", pstar, "commanded power")->capture_default_str();
  md->add_option("--wstar", wstar, "speed reference")->capture_default_str();
  md->add_flag("--sum-normalize", sum_normalize, "sum-normalize participation columns");

  CLI::App* sw = app.add_subcommand("sweep", "eigenvalue locus over operating points");
  add_common(sw);
  sw->add_option("--model", model, "euler | ieee | hygov | linearised")->required();
  sw->add_option("--grid", grid, "pstar | wstar | both")->capture_default_str();

  CLI::App* eff = app.add_subcommand("efficiency-map", "hydraulic efficiency tables");
  add_common(eff);
  eff->add_option("--model", eff_model, "euler | ieee | hygov | all")->capture_default_str();
  eff->add_option("--pstar", fixed_power, "fixed power for the speed sweep")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(common, scenario_file, model, decimate, out, err);
    if (tr->parsed()) return cmd_trim(common, model, pstar, wstar, out);
    if (lin->parsed()) return cmd_linearize(common, model, pstar, wstar, out);
    if (md->parsed()) return cmd_modes(common, model, pstar, wstar, sum_normalize, out);
    if (sw->parsed()) return cmd_sweep(common, model, grid, out);
    if (eff->parsed()) return cmd_efficiency_map(common, eff_model, fixed_power, out);
  } catch (const LoadError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace vshp::cli
