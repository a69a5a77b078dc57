#include "vshp/smallsignal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

namespace vshp {

Eigen::MatrixXd central_difference_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0) {
  const Eigen::VectorXd f0 = f(x0);
  Eigen::MatrixXd J(f0.size(), x0.size());
  Eigen::VectorXd x = x0;
  for (Eigen::Index i = 0; i < x0.size(); ++i) {
    const double h = std::max(1e-6, 1e-6 * std::abs(x0(i)));
    x(i) = x0(i) + h;
    const Eigen::VectorXd fp = f(x);
    x(i) = x0(i) - h;
    const Eigen::VectorXd fm = f(x);
    x(i) = x0(i);
    J.col(i) = (fp - fm) / (2.0 * h);
  }
  return J;
}

namespace {

Eigen::VectorXd output_vector(const Plant& plant, const Eigen::VectorXd& x, const PlantInputs& u) {
  const Plant::EvalContext ctx{nullptr, 0.0, nullptr, true};
  const PlantOutputs o = plant.outputs(x, u, ctx);
  Eigen::VectorXd v(4);
  v << o.P_m, o.h, o.q, o.g;
  return v;
}

}  // namespace

LinearModel linearize(const Plant& plant, const Eigen::VectorXd& x0, const PlantInputs& u0) {
  if (plant.uses_delay_line())
    throw ValidationError(
        "travelling-wave penstock is not linearizable to finite order; "
        "use lumped_tanh or inelastic");

  const GovernorSignals gs = plant.governor_signals(x0, u0);
  const GovernorParams& G = plant.params().governor;
  if (!(gs.g_raw > G.g_min && gs.g_raw < G.g_max))
    throw ValidationError("governor limit active at the trim point; linearization invalid");

  const Plant::EvalContext ctx{nullptr, 0.0, nullptr, true};
  const Eigen::VectorXd F0 = plant.derivatives(x0, u0, ctx);
  if (F0.lpNorm<Eigen::Infinity>() >= 1e-8)
    throw ValidationError("trim residual too large for linearization (must be < 1e-8)");

  LinearModel m;
  m.state_labels = plant.state_labels();
  m.output_labels = {"P_m", "h", "q", "g"};
  m.trim_state = x0;
  m.trim_inputs = u0;

  m.A = central_difference_jacobian(
      [&](const Eigen::VectorXd& x) { return plant.derivatives(x, u0, ctx); }, x0);
  m.C = central_difference_jacobian(
      [&](const Eigen::VectorXd& x) { return output_vector(plant, x, u0); }, x0);

  const int n = plant.dim();
  m.B = Eigen::MatrixXd(n, 2);
  m.D = Eigen::MatrixXd(4, 2);
  for (int j = 0; j < 2; ++j) {
    PlantInputs up = u0, um = u0;
    double& vp = j == 0 ? up.P_star : up.omega_star;
    double& vm = j == 0 ? um.P_star : um.omega_star;
    const double base = j == 0 ? u0.P_star : u0.omega_star;
    const double h = std::max(1e-6, 1e-6 * std::abs(base));
    vp = base + h;
    vm = base - h;
    m.B.col(j) = (plant.derivatives(x0, up, ctx) - plant.derivatives(x0, um, ctx)) / (2.0 * h);
    m.D.col(j) = (output_vector(plant, x0, up) - output_vector(plant, x0, um)) / (2.0 * h);
  }
  return m;
}

ModalReport modes(const Eigen::MatrixXd& A, const std::vector<std::string>& labels,
                  bool sum_normalize) {
  if (A.rows() != A.cols()) throw ValidationError("modes: A must be square");
  if (static_cast<int>(labels.size()) != A.rows())
    throw ValidationError("modes: label count must match A");
  if (!A.allFinite()) throw ValidationError("modes: A has non-finite entries");

  Eigen::EigenSolver<Eigen::MatrixXd> solver(A, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success) throw ModelError("eigendecomposition failed");

  const int n = static_cast<int>(A.rows());
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const Eigen::VectorXcd ev = solver.eigenvalues();
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (ev(a).real() != ev(b).real()) return ev(a).real() < ev(b).real();
    if (std::abs(ev(a).imag()) != std::abs(ev(b).imag()))
      return std::abs(ev(a).imag()) < std::abs(ev(b).imag());
    return ev(a).imag() > ev(b).imag();
  });

  ModalReport r;
  r.labels = labels;
  Eigen::MatrixXcd V(n, n);
  for (int i = 0; i < n; ++i) {
    r.eigenvalues.push_back(ev(order[static_cast<size_t>(i)]));
    V.col(i) = solver.eigenvectors().col(order[static_cast<size_t>(i)]);
  }
  for (const auto& lambda : r.eigenvalues) {
    r.f_hz.push_back(std::abs(lambda.imag()) / (2.0 * M_PI));
    const double mag = std::abs(lambda);
    r.zeta.push_back(mag > 1e-300 ? -lambda.real() / mag : 0.0);
  }

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(V);
  const double smin = svd.singularValues()(n - 1);
  r.eigvec_condition = smin > 0 ? svd.singularValues()(0) / smin : 1e300;
  r.participation = Eigen::MatrixXd::Zero(n, n);
  if (r.eigvec_condition > 1e10) {
    r.participation_valid = false;  // defective (or near-defective); suppressed
    return r;
  }

  const Eigen::MatrixXcd W = V.inverse();  // rows: left eigenvectors, psi^T phi = I
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) r.participation(k, i) = std::abs(V(k, i) * W(i, k));

  for (int i = 0; i < n; ++i) {
    const double denom =
        sum_normalize ? r.participation.col(i).sum() : r.participation.col(i).maxCoeff();
    if (denom > 0) r.participation.col(i) /= denom;
  }
  return r;
}

std::vector<int> oscillatory_modes(const ModalReport& report) {
  std::vector<int> out;
  for (size_t i = 0; i < report.eigenvalues.size(); ++i)
    if (report.eigenvalues[i].imag() > 1e-12) out.push_back(static_cast<int>(i));
  return out;
}

double participation_share(const ModalReport& report, int mode, const std::vector<int>& states) {
  const double total = report.participation.col(mode).sum();
  if (total <= 0) return 0.0;
  double part = 0;
  for (int k : states) part += report.participation(k, mode);
  return part / total;
}

int dominant_pair(const ModalReport& report, const std::vector<int>& states, double f_lo,
                  double f_hi) {
  int best = -1;
  double best_share = -1;
  for (int i : oscillatory_modes(report)) {
    if (report.f_hz[static_cast<size_t>(i)] < f_lo || report.f_hz[static_cast<size_t>(i)] > f_hi)
      continue;
    const double share = participation_share(report, i, states);
    if (share > best_share) {
      best_share = share;
      best = i;
    }
  }
  return best;
}

std::vector<int> label_indices(const std::vector<std::string>& labels,
                               const std::vector<std::string>& names) {
  std::vector<int> out;
  for (size_t i = 0; i < labels.size(); ++i)
    if (std::find(names.begin(), names.end(), labels[i]) != names.end())
      out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> label_indices_by_prefix(const std::vector<std::string>& labels,
                                         const std::string& prefix) {
  std::vector<int> out;
  for (size_t i = 0; i < labels.size(); ++i)
    if (labels[i].rfind(prefix, 0) == 0) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<SweepPoint> sweep(ModelKind kind, const PlantParams& params,
                              const std::vector<PlantInputs>& points) {
  std::vector<SweepPoint> out;
  out.reserve(points.size());
  const Plant plant = Plant::assemble(kind, params);
  for (const auto& u : points) {
    SweepPoint pt;
    pt.P_star = u.P_star;
    pt.omega_star = u.omega_star;
    try {
      pt.trim = trim(plant, u.P_star, u.omega_star);
      const LinearModel lm = linearize(plant, pt.trim.state, u);
      pt.report = modes(lm.A, lm.state_labels);
      pt.ok = true;
    } catch (const Error& e) {
      pt.ok = false;
      pt.error = e.what();
    }
    out.push_back(std::move(pt));
  }
  return out;
}

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

std::string dominant_label(const ModalReport& r, int mode) {
  int best = 0;
  for (int k = 1; k < r.participation.rows(); ++k)
    if (r.participation(k, mode) > r.participation(best, mode)) best = k;
  return r.labels[static_cast<size_t>(best)];
}

}  // namespace

void write_modal_json(const ModalReport& report, const Plant& plant, const TrimResult& trim,
                      std::ostream& out) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["kind"] = "modal_report";
  j["model"] = to_string(plant.kind());
  j["penstock_mode"] = to_string(plant.params().penstock_mode);
  j["params_hash"] = hash_hex(params_hash(plant.params()));
  j["T_a"] = plant.params().turbine.T_a;
  j["conventions"] = {
      {"participation", "abs(phi_ki * psi_ik), left eigenvectors from the inverse of the right "
                        "eigenvector matrix, per-mode max-normalized"},
      {"zeta", "-Re(lambda)/|lambda|"},
      {"f_hz", "|Im(lambda)|/(2*pi)"},
  };
  nlohmann::json state;
  for (size_t i = 0; i < plant.state_labels().size(); ++i)
    state[plant.state_labels()[i]] = trim.state(static_cast<Eigen::Index>(i));
  j["trim"] = {
      {"residual", trim.residual},
      {"iterations", trim.iterations},
      {"state", state},
      {"outputs",
       {{"P_m", trim.outputs.P_m},
        {"h", trim.outputs.h},
        {"q", trim.outputs.q},
        {"g", trim.outputs.g},
        {"eta_h", trim.outputs.eta_h},
        {"omega", trim.outputs.omega}}},
  };
  j["participation_valid"] = report.participation_valid;
  j["eigvec_condition"] = report.eigvec_condition;

  nlohmann::json modes_json = nlohmann::json::array();
  for (size_t i = 0; i < report.eigenvalues.size(); ++i) {
    nlohmann::json pm;
    for (size_t k = 0; k < report.labels.size(); ++k)
      pm[report.labels[k]] =
          report.participation(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i));
    modes_json.push_back({{"re", report.eigenvalues[i].real()},
                          {"im", report.eigenvalues[i].imag()},
                          {"f_hz", report.f_hz[i]},
                          {"zeta", report.zeta[i]},
                          {"participation", pm}});
  }
  j["modes"] = modes_json;
  out << j.dump(2) << "\n";
}

void write_sweep_csv(const std::vector<SweepPoint>& points, ModelKind kind,
                     const PlantParams& params, std::ostream& out) {
  out << "# schema_version: 1\n";
  out << "# kind: mode_sweep\n";
  out << "# model: " << to_string(kind) << "\n";
  out << "# penstock_mode: " << to_string(params.penstock_mode) << "\n";
  out << "# params_hash: " << hash_hex(params_hash(params)) << "\n";
  out << "# T_a: " << num(params.turbine.T_a) << "\n";
  out << "# conventions: participation per-mode max-normalized; zeta = -Re/|lambda|\n";
  out << "P_star,omega_star,mode,re,im,f_hz,zeta,dominant_state\n";
  for (const auto& pt : points) {
    if (!pt.ok) {
      out << "# point P_star=" << num(pt.P_star) << " omega_star=" << num(pt.omega_star)
          << " failed: " << pt.error << "\n";
      continue;
    }
    for (size_t m = 0; m < pt.report.eigenvalues.size(); ++m) {
      out << num(pt.P_star) << "," << num(pt.omega_star) << "," << m << ","
          << num(pt.report.eigenvalues[m].real()) << "," << num(pt.report.eigenvalues[m].imag())
          << "," << num(pt.report.f_hz[m]) << "," << num(pt.report.zeta[m]) << ","
          << dominant_label(pt.report, static_cast<int>(m)) << "\n";
    }
  }
}

std::complex<double> frequency_response(const Eigen::MatrixXd& A, const Eigen::VectorXd& B,
                                        const Eigen::RowVectorXd& C, double D, double f_hz) {
  const int n = static_cast<int>(A.rows());
  const std::complex<double> s(0.0, 2.0 * M_PI * f_hz);
  Eigen::MatrixXcd M = s * Eigen::MatrixXcd::Identity(n, n) - A.cast<std::complex<double>>();
  const Eigen::VectorXcd x = M.partialPivLu().solve(B.cast<std::complex<double>>());
  return (C.cast<std::complex<double>>() * x)(0) + D;
}

}  // namespace vshp
