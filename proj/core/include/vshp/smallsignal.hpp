#pragma once

#include <complex>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vshp/plant.hpp"

namespace vshp {

/// Central-difference Jacobian with per-coordinate step h_i = max(1e-6, 1e-6 |x_i|).
Eigen::MatrixXd central_difference_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0);

struct LinearModel {
  Eigen::MatrixXd A;  ///< states x states
  Eigen::MatrixXd B;  ///< states x 2, input columns [P_star, omega_star]
  Eigen::MatrixXd C;  ///< outputs x states, rows [P_m, h, q, g]
  Eigen::MatrixXd D;  ///< outputs x 2
  std::vector<std::string> state_labels;
  std::vector<std::string> output_labels;
  Eigen::VectorXd trim_state;
  PlantInputs trim_inputs;
};

/// Numerical linearization at a trim point. Preconditions: penstock mode is
/// linearizable (not TravellingWaveDelay), trim residual < 1e-8, governor
/// limits inactive at the trim.
LinearModel linearize(const Plant& plant, const Eigen::VectorXd& x0, const PlantInputs& u0);

struct ModalReport {
  std::vector<std::complex<double>> eigenvalues;  ///< conjugate pairs adjacent
  std::vector<double> f_hz;                       ///< |Im| / 2 pi
  std::vector<double> zeta;                       ///< -Re / |lambda|
  Eigen::MatrixXd participation;                  ///< states x modes, per-mode max = 1
  std::vector<std::string> labels;
  bool participation_valid = true;  ///< false when the eigenvector basis is ill-conditioned
  double eigvec_condition = 0;
};

/// Dense eigendecomposition with participation factors
/// p_ki = |phi_ki psi_ik|, left eigenvectors from the inverse of the right
/// eigenvector matrix (psi^T phi = I), columns max-normalized
/// (sum-normalized behind the flag).
ModalReport modes(const Eigen::MatrixXd& A, const std::vector<std::string>& labels,
                  bool sum_normalize = false);

/// Indices of modes with Im > 0 (one representative per conjugate pair).
std::vector<int> oscillatory_modes(const ModalReport& report);

/// Share of one mode's total participation held by a group of states.
double participation_share(const ModalReport& report, int mode, const std::vector<int>& states);

/// Representative of the conjugate pair with the highest group share among
/// pairs with f in [f_lo, f_hi]; -1 when no pair qualifies.
int dominant_pair(const ModalReport& report, const std::vector<int>& states, double f_lo,
                  double f_hi);

std::vector<int> label_indices(const std::vector<std::string>& labels,
                               const std::vector<std::string>& names);
std::vector<int> label_indices_by_prefix(const std::vector<std::string>& labels,
                                         const std::string& prefix);

struct SweepPoint {
  double P_star = 0;
  double omega_star = 1;
  bool ok = false;
  std::string error;
  TrimResult trim;
  ModalReport report;
};

/// Trim + linearize + modes per operating point; per-point failures are
/// recorded and the sweep continues.
std::vector<SweepPoint> sweep(ModelKind kind, const PlantParams& params,
                              const std::vector<PlantInputs>& points);

void write_modal_json(const ModalReport& report, const Plant& plant, const TrimResult& trim,
                      std::ostream& out);
void write_sweep_csv(const std::vector<SweepPoint>& points, ModelKind kind,
                     const PlantParams& params, std::ostream& out);

/// C (sI - A)^{-1} B + D at s = j 2 pi f, for small dense systems.
std::complex<double> frequency_response(const Eigen::MatrixXd& A, const Eigen::VectorXd& B,
                                        const Eigen::RowVectorXd& C, double D, double f_hz);

}  // namespace vshp
