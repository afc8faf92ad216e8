#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "hym/torus.hpp"

namespace hym::testing {

/// A field written as an explicit finite Fourier sum, so tests can evaluate
/// derivatives and integrals of it analytically.
struct ModeSum {
  std::vector<std::vector<long>> modes;
  std::vector<cplx> coeffs;

  cplx eval(const TorusGeometry &g, std::span<const double> x) const {
    cplx acc = 0.0;
    for (std::size_t j = 0; j < modes.size(); ++j) {
      double phase = 0.0;
      for (int a = 0; a < g.axes(); ++a)
        phase += 2.0 * std::numbers::pi * static_cast<double>(modes[j][a]) * x[a] / g.periods()[a];
      acc += coeffs[j] * std::polar(1.0, phase);
    }
    return acc;
  }

  ScalarField sample(const GeometryPtr &g) const {
    return ScalarField::from_function(g, [&](std::span<const double> x) { return eval(*g, x); });
  }
};

inline ModeSum random_modes(const TorusGeometry &g, std::mt19937_64 &rng, int max_mode,
                            int count, bool zero_mean = false) {
  std::uniform_int_distribution<long> mode(-max_mode, max_mode);
  std::normal_distribution<double> gauss;
  ModeSum s;
  for (int j = 0; j < count; ++j) {
    std::vector<long> m(g.axes());
    bool all_zero = true;
    for (auto &v : m) {
      v = mode(rng);
      all_zero = all_zero && v == 0;
    }
    if (zero_mean && all_zero)
      continue;
    s.modes.push_back(m);
    s.coeffs.emplace_back(gauss(rng), gauss(rng));
  }
  return s;
}

/// Real-valued version: every mode paired with its conjugate.
inline ModeSum random_real_modes(const TorusGeometry &g, std::mt19937_64 &rng, int max_mode,
                                 int count, bool zero_mean = false) {
  ModeSum s = random_modes(g, rng, max_mode, count, zero_mean);
  const std::size_t n = s.modes.size();
  for (std::size_t j = 0; j < n; ++j) {
    auto m = s.modes[j];
    for (auto &v : m)
      v = -v;
    s.modes.push_back(m);
    s.coeffs.push_back(std::conj(s.coeffs[j]));
  }
  for (auto &c : s.coeffs)
    c *= 0.5;
  return s;
}

inline double max_abs_diff(const ScalarField &a, const ScalarField &b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

} // namespace hym::testing
