#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "vshp/errors.hpp"

namespace vshp {

/// Penstock realization used by the waterway model.
///  - TravellingWaveDelay: exact wave solution, e^{-2 T_e s} as a time delay
///  - LumpedTanh:          rational truncation of tanh(s T_e), linearizable
///  - Inelastic:           rigid column, h/q = -T_w s (plus friction)
enum class PenstockMode { TravellingWaveDelay, LumpedTanh, Inelastic };

std::string to_string(PenstockMode mode);
PenstockMode penstock_mode_from_string(const std::string& name);

/// Waterway constants, plant per-unit base (Q_R, H_R).
struct WaterwayParams {
  double T_w = 1.211;   ///< penstock water starting time [s]
  double T_e = 0.126;   ///< wave travel time [s]
  double Z_0 = 9.61;    ///< characteristic impedance [pu]
  double f_p1 = 0.049;  ///< penstock friction factor [pu]
  double f_p0 = 0.036;  ///< surge tank friction factor [pu]
  double C_s = 0.099;   ///< surge tank storage constant [pu]
  double T_w2 = 4.34;   ///< headrace water starting time [s]
  double f_p2 = 0.020;  ///< headrace friction factor [pu]
  double Q_R = 170.0;   ///< rated flow [m^3/s]
  double H_R = 425.0;   ///< rated head [m]
};

/// Hydraulic machine constants, turbine per-unit base (Q_Rt, H_Rt).
struct TurbineParams {
  double A_t = 1.075;       ///< turbine gain [pu]
  double q_nl = 0.07;       ///< no-load flow [pu]
  double D_t = 0.5;         ///< speed damping [pu]
  double psi = 0.376;       ///< runner constant [pu]
  double xi = 0.906;        ///< runner constant [pu]
  double sigma = 0.369;     ///< speed head constant [pu]
  double alpha_1R = 0.738;  ///< rated guide vane angle [rad]
  double Q_Rt = 153.0;      ///< turbine rated flow [m^3/s]
  double H_Rt = 425.0;      ///< turbine rated head [m]
  double Omega_R = 750.0;   ///< rated speed [rpm]
  double T_a = 10.0;        ///< mechanical starting time [s]; not part of the
                            ///< reference data set, see the parameter file notes

  // Model interpretation switches, see the shipped parameter reference.
  bool rotor_torque_balance = false;      ///< rotor balance uses torque instead of P_m = T_m*omega
  bool steady_head_sigma_printed = false; ///< steady head uses -sigma*(w^2-1) instead of +
};

struct GovernorParams {
  double k_gp = 1.80;       ///< proportional gain [pu]
  double k_gi = 0.172;      ///< integral gain [pu]
  double k_gd = 0.696;      ///< derivative gain [pu]
  double T_G = 0.5;         ///< servo time constant [s]
  double rate_limit = 0.05; ///< guide vane slew bound [pu/s]
  double g_min = 0.0;       ///< opening saturation, lower [pu]
  double g_max = 1.0;       ///< opening saturation, upper [pu]
  double T_f = 0.1;         ///< derivative filter time constant [s]
};

/// Truncation of the tanh lumped-parameter product: n_num factors beyond
/// the s*T_e term in the numerator, n_den factors in the denominator.
struct TanhOrder {
  int n_num = 1;
  int n_den = 2;
};

struct PlantParams {
  WaterwayParams waterway;
  TurbineParams turbine;
  GovernorParams governor;
  TanhOrder tanh_order;
  PenstockMode penstock_mode = PenstockMode::LumpedTanh;

  /// Throws ValidationError naming the violated invariant.
  void validate() const;
};

/// Reference parameter set (the values in the shipped parameter file).
PlantParams default_params();

struct LoadResult {
  PlantParams params;
  std::vector<std::string> defaulted;  ///< keys filled from defaults, e.g. "turbine.T_a = 10 (defaulted)"
};

/// Loads and validates a flat key-value parameter file ("waterway.T_w = 1.211").
/// Mandatory keys missing -> LoadError naming the key; invariant violations ->
/// ValidationError naming the invariant.
LoadResult load_params(const std::string& path);
LoadResult parse_params(std::istream& in, const std::string& origin);

/// Canonical text form (fixed key order, full precision); input to params_hash.
std::string serialize_params(const PlantParams& p);

/// FNV-1a 64-bit over serialize_params; stamped into every output file.
std::uint64_t params_hash(const PlantParams& p);

struct TurbinePu {
  double q_t;
  double h_t;
};
struct PlantPu {
  double q;
  double h;
};

/// q_t = q*Q_R/Q_Rt, h_t = h*H_R/H_Rt.
TurbinePu plant_to_turbine_pu(double q, double h, const TurbineParams& t, const WaterwayParams& w);
/// Exact inverse of plant_to_turbine_pu.
PlantPu turbine_to_plant_pu(double q_t, double h_t, const TurbineParams& t, const WaterwayParams& w);

/// Signed friction head loss f*q*|q|, odd in q.
double friction_head_loss(double f, double q);

}  // namespace vshp
