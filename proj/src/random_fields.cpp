#include "hym/random_fields.hpp"

#include <cmath>

#include "hym/errors.hpp"

namespace hym {

namespace {

// Band-limited complex field, before normalization.
std::vector<cplx> raw_band_limited(const TorusGeometry &g, Rng &rng, int max_mode,
                                   bool skip_zero_mode) {
  if (max_mode < 0)
    throw ContractError("max_mode must be non-negative");
  std::normal_distribution<double> gauss;
  std::vector<cplx> spec(g.size(), cplx(0.0));
  for (std::size_t p = 0; p < g.size(); ++p) {
    double msq = 0.0;
    bool inside = true;
    bool zero = true;
    for (int a = 0; a < g.axes(); ++a) {
      const long m = g.wave_index(p, a);
      if (std::labs(m) > max_mode || 2 * std::labs(m) >= static_cast<long>(g.dims()[a]))
        inside = false;
      zero = zero && m == 0;
      msq += static_cast<double>(m * m);
    }
    if (!inside || (zero && skip_zero_mode))
      continue;
    const double re = gauss(rng);
    const double im = gauss(rng);
    spec[p] = cplx(re, im) / (1.0 + msq);
  }
  g.backward(spec);
  return spec;
}

double sup_abs(const std::vector<cplx> &v) {
  double m = 0.0;
  for (const auto &x : v)
    m = std::max(m, std::abs(x));
  return m;
}

} // namespace

ScalarField random_smooth_scalar(const GeometryPtr &geometry, Rng &rng, int max_mode,
                                 double amplitude, bool real) {
  auto v = raw_band_limited(*geometry, rng, max_mode, false);
  if (real)
    for (auto &x : v)
      x = cplx(x.real(), 0.0);
  const double s = sup_abs(v);
  if (s > 0.0)
    for (auto &x : v)
      x *= amplitude / s;
  return ScalarField(geometry, std::move(v), real);
}

ScalarField random_mean_zero_scalar(const GeometryPtr &geometry, Rng &rng, int max_mode,
                                    double amplitude) {
  auto v = raw_band_limited(*geometry, rng, max_mode, true);
  for (auto &x : v)
    x = cplx(x.real(), 0.0);
  const double s = sup_abs(v);
  if (s > 0.0)
    for (auto &x : v)
      x *= amplitude / s;
  return ScalarField(geometry, std::move(v), true);
}

MatrixField random_matrix_field(const GeometryPtr &geometry, int r, Rng &rng, int max_mode,
                                double amplitude) {
  MatrixField out(geometry, r);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      out.set_component(a, b, ScalarField(geometry, raw_band_limited(*geometry, rng, max_mode, false)));
  const double s = out.sup_norm();
  if (s > 0.0)
    out *= amplitude / s;
  return out;
}

MatrixField random_hermitian_field(const GeometryPtr &geometry, int r, Rng &rng, int max_mode,
                                   double amplitude) {
  MatrixField out = hermitian_project(random_matrix_field(geometry, r, rng, max_mode, 1.0));
  const double s = out.sup_norm();
  if (s > 0.0)
    out *= amplitude / s;
  return out;
}

MatrixField random_positive_field(const GeometryPtr &geometry, int r, Rng &rng, int max_mode,
                                  double amplitude) {
  return exp(random_hermitian_field(geometry, r, rng, max_mode, amplitude));
}

CMat random_hermitian_matrix(int r, Rng &rng) {
  std::normal_distribution<double> gauss;
  CMat m(r, r);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      m(a, b) = cplx(gauss(rng), gauss(rng));
  return 0.5 * (m + m.adjoint());
}

} // namespace hym
