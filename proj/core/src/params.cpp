#include "vshp/params.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace vshp {

std::string to_string(PenstockMode mode) {
  switch (mode) {
    case PenstockMode::TravellingWaveDelay: return "travelling_wave_delay";
    case PenstockMode::LumpedTanh: return "lumped_tanh";
    case PenstockMode::Inelastic: return "inelastic";
  }
  return "?";
}

PenstockMode penstock_mode_from_string(const std::string& name) {
  if (name == "travelling_wave_delay") return PenstockMode::TravellingWaveDelay;
  if (name == "lumped_tanh") return PenstockMode::LumpedTanh;
  if (name == "inelastic") return PenstockMode::Inelastic;
  throw ValidationError("unknown penstock mode '" + name +
                        "' (expected travelling_wave_delay, lumped_tanh or inelastic)");
}

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void PlantParams::validate() const {
  const auto& w = waterway;
  require(w.T_w > 0, "T_w must be > 0");
  require(w.T_e > 0, "T_e must be > 0");
  require(w.T_w2 > 0, "T_w2 must be > 0");
  require(w.C_s > 0, "C_s must be > 0");
  require(w.Z_0 > 0, "Z_0 must be > 0");
  require(w.f_p0 >= 0, "f_p0 must be >= 0");
  require(w.f_p1 >= 0, "f_p1 must be >= 0");
  require(w.f_p2 >= 0, "f_p2 must be >= 0");
  require(w.Q_R > 0, "Q_R must be > 0");
  require(w.H_R > 0, "H_R must be > 0");
  require(std::abs(w.Z_0 - w.T_w / w.T_e) / w.Z_0 <= 1e-2,
          "Z_0 inconsistent with T_w/T_e (|Z_0 - T_w/T_e|/Z_0 must be <= 1e-2)");

  const auto& t = turbine;
  require(t.xi > t.psi, "xi must be > psi");
  require(t.alpha_1R > 0 && t.alpha_1R < M_PI / 2, "alpha_1R must be in (0, pi/2)");
  require(t.Q_Rt > 0, "Q_Rt must be > 0");
  require(t.H_Rt > 0, "H_Rt must be > 0");
  require(t.T_a > 0, "T_a must be > 0");
  require(t.Omega_R > 0, "Omega_R must be > 0");

  const auto& g = governor;
  require(g.k_gp >= 0, "k_gp must be >= 0");
  require(g.k_gi >= 0, "k_gi must be >= 0");
  require(g.k_gd >= 0, "k_gd must be >= 0");
  require(g.T_G > 0, "T_G must be > 0");
  require(g.T_f > 0, "T_f must be > 0");
  require(g.rate_limit > 0, "rate_limit must be > 0");
  require(g.g_min < g.g_max, "g_min must be < g_max");

  require(tanh_order.n_num >= 0, "tanh_order n_num must be >= 0");
  require(tanh_order.n_den >= tanh_order.n_num, "tanh_order n_den must be >= n_num");
  if (penstock_mode == PenstockMode::LumpedTanh) {
    require(tanh_order.n_den >= tanh_order.n_num + 1,
            "penstock_mode lumped_tanh requires tanh_order n_den >= n_num + 1 "
            "(the rigid-column limit is penstock_mode inelastic)");
  }
}

PlantParams default_params() { return PlantParams{}; }

namespace {

struct KeyBinding {
  std::string key;
  enum class Type { Double, Int, Bool, Mode } type;
  bool mandatory;
  void* slot;
};

std::vector<KeyBinding> bindings(PlantParams& p) {
  auto& w = p.waterway;
  auto& t = p.turbine;
  auto& g = p.governor;
  using T = KeyBinding::Type;
  return {
      {"waterway.T_w", T::Double, true, &w.T_w},
      {"waterway.T_e", T::Double, true, &w.T_e},
      {"waterway.Z_0", T::Double, true, &w.Z_0},
      {"waterway.f_p1", T::Double, true, &w.f_p1},
      {"waterway.f_p0", T::Double, true, &w.f_p0},
      {"waterway.C_s", T::Double, true, &w.C_s},
      {"waterway.T_w2", T::Double, true, &w.T_w2},
      {"waterway.f_p2", T::Double, true, &w.f_p2},
      {"waterway.Q_R", T::Double, true, &w.Q_R},
      {"waterway.H_R", T::Double, true, &w.H_R},
      {"turbine.A_t", T::Double, true, &t.A_t},
      {"turbine.q_nl", T::Double, true, &t.q_nl},
      {"turbine.D_t", T::Double, true, &t.D_t},
      {"turbine.psi", T::Double, true, &t.psi},
      {"turbine.xi", T::Double, true, &t.xi},
      {"turbine.sigma", T::Double, true, &t.sigma},
      {"turbine.alpha_1R", T::Double, true, &t.alpha_1R},
      {"turbine.Q_Rt", T::Double, true, &t.Q_Rt},
      {"turbine.H_Rt", T::Double, true, &t.H_Rt},
      {"turbine.Omega_R", T::Double, true, &t.Omega_R},
      {"turbine.T_a", T::Double, false, &t.T_a},
      {"turbine.rotor_torque_balance", T::Bool, false, &t.rotor_torque_balance},
      {"turbine.steady_head_sigma_printed", T::Bool, false, &t.steady_head_sigma_printed},
      {"governor.k_gp", T::Double, true, &g.k_gp},
      {"governor.k_gi", T::Double, true, &g.k_gi},
      {"governor.k_gd", T::Double, true, &g.k_gd},
      {"governor.T_G", T::Double, true, &g.T_G},
      {"governor.rate_limit", T::Double, true, &g.rate_limit},
      {"governor.g_min", T::Double, false, &g.g_min},
      {"governor.g_max", T::Double, false, &g.g_max},
      {"governor.T_f", T::Double, false, &g.T_f},
      {"plant.tanh_n_num", T::Int, false, &p.tanh_order.n_num},
      {"plant.tanh_n_den", T::Int, false, &p.tanh_order.n_den},
      {"plant.penstock_mode", T::Mode, false, &p.penstock_mode},
  };
}

void assign(const KeyBinding& b, const std::string& value, const std::string& origin) {
  try {
    size_t pos = 0;
    switch (b.type) {
      case KeyBinding::Type::Double: {
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        *static_cast<double*>(b.slot) = v;
        break;
      }
      case KeyBinding::Type::Int: {
        int v = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        *static_cast<int*>(b.slot) = v;
        break;
      }
      case KeyBinding::Type::Bool: {
        bool v;
        if (value == "1" || value == "true") v = true;
        else if (value == "0" || value == "false") v = false;
        else throw std::invalid_argument(value);
        *static_cast<bool*>(b.slot) = v;
        break;
      }
      case KeyBinding::Type::Mode:
        *static_cast<PenstockMode*>(b.slot) = penstock_mode_from_string(value);
        break;
    }
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception&) {
    throw LoadError(origin + ": bad value '" + value + "' for key " + b.key);
  }
}

std::string trim_ws(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

LoadResult parse_params(std::istream& in, const std::string& origin) {
  LoadResult result;
  auto binds = bindings(result.params);
  std::map<std::string, const KeyBinding*> by_key;
  for (const auto& b : binds) by_key[b.key] = &b;

  std::map<std::string, bool> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim_ws(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw LoadError(origin + ":" + std::to_string(lineno) + ": expected 'key = value', got '" + line + "'");
    std::string key = trim_ws(line.substr(0, eq));
    std::string value = trim_ws(line.substr(eq + 1));
    auto it = by_key.find(key);
    if (it == by_key.end())
      throw LoadError(origin + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (seen.count(key))
      throw LoadError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    seen[key] = true;
    assign(*it->second, value, origin + ":" + std::to_string(lineno));
  }

  for (const auto& b : binds) {
    if (seen.count(b.key)) continue;
    if (b.mandatory) throw LoadError(origin + ": missing mandatory key '" + b.key + "'");
    std::string current;
    switch (b.type) {
      case KeyBinding::Type::Double: current = fmt(*static_cast<double*>(b.slot)); break;
      case KeyBinding::Type::Int: current = std::to_string(*static_cast<int*>(b.slot)); break;
      case KeyBinding::Type::Bool: current = *static_cast<bool*>(b.slot) ? "1" : "0"; break;
      case KeyBinding::Type::Mode: current = to_string(*static_cast<PenstockMode*>(b.slot)); break;
    }
    result.defaulted.push_back(b.key + " = " + current + " (defaulted)");
  }

  result.params.validate();
  return result;
}

LoadResult load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open parameter file '" + path + "'");
  return parse_params(in, path);
}

std::string serialize_params(const PlantParams& p) {
  PlantParams copy = p;
  std::ostringstream out;
  for (const auto& b : bindings(copy)) {
    out << b.key << " = ";
    switch (b.type) {
      case KeyBinding::Type::Double: out << fmt(*static_cast<double*>(b.slot)); break;
      case KeyBinding::Type::Int: out << *static_cast<int*>(b.slot); break;
      case KeyBinding::Type::Bool: out << (*static_cast<bool*>(b.slot) ? 1 : 0); break;
      case KeyBinding::Type::Mode: out << to_string(*static_cast<PenstockMode*>(b.slot)); break;
    }
    out << "\n";
  }
  return out.str();
}

std::uint64_t params_hash(const PlantParams& p) {
  const std::string text = serialize_params(p);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

TurbinePu plant_to_turbine_pu(double q, double h, const TurbineParams& t, const WaterwayParams& w) {
  return {q * w.Q_R / t.Q_Rt, h * w.H_R / t.H_Rt};
}

PlantPu turbine_to_plant_pu(double q_t, double h_t, const TurbineParams& t, const WaterwayParams& w) {
  return {q_t * t.Q_Rt / w.Q_R, h_t * t.H_Rt / w.H_R};
}

double friction_head_loss(double f, double q) { return f * q * std::abs(q); }

}  // namespace vshp
