#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace testutil {

inline std::string data_path(const std::string& name) {
  return std::string(VSHP_DATA_DIR) + "/" + name;
}

// deterministic generator for property tests
struct Lcg {
  std::uint64_t s;
  explicit Lcg(std::uint64_t seed) : s(seed) {}
  double uniform(double lo, double hi) {
    s = s * 6364136223846793005ull + 1442695040888963407ull;
    const double u =
        static_cast<double>((s >> 11) & ((1ull << 53) - 1)) / static_cast<double>(1ull << 53);
    return lo + (hi - lo) * u;
  }
};

inline double rms(const std::vector<double>& v) {
  double acc = 0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc / static_cast<double>(v.size()));
}

inline double rms_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0;
  for (size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc / static_cast<double>(a.size()));
}

// single-bin DFT amplitude of the tone at frequency f over samples [i0, i1)
inline double tone_amplitude(const std::vector<double>& x, size_t i0, size_t i1, double dt,
                             double f) {
  std::complex<double> acc = 0;
  for (size_t i = i0; i < i1; ++i)
    acc += x[i] * std::exp(std::complex<double>(0.0, -2.0 * M_PI * f * static_cast<double>(i) * dt));
  return 2.0 * std::abs(acc) / static_cast<double>(i1 - i0);
}

// average period from rising zero crossings of (x - level), linear interpolation
inline double crossing_period(const std::vector<double>& x, double level, double dt) {
  std::vector<double> times;
  for (size_t i = 1; i < x.size(); ++i) {
    const double a = x[i - 1] - level, b = x[i] - level;
    if (a < 0 && b >= 0) {
      const double frac = a / (a - b);
      times.push_back((static_cast<double>(i - 1) + frac) * dt);
    }
  }
  if (times.size() < 3) return 0.0;
  return (times.back() - times.front()) / static_cast<double>(times.size() - 1);
}

}  // namespace testutil
