#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "hym/errors.hpp"
#include "hym/torus.hpp"
#include "test_support.hpp"

using namespace hym;
using hym::testing::max_abs_diff;
using hym::testing::random_modes;
using hym::testing::random_real_modes;
constexpr double pi = std::numbers::pi;

TEST_CASE("geometry validation") {
  CHECK_THROWS_AS(TorusGeometry::make(3, 16), ContractError);
  CHECK_THROWS_AS(TorusGeometry::make(1, 6), ContractError);
  CHECK_THROWS_AS(TorusGeometry::make(1, 9), ContractError);
  CHECK_THROWS_AS(TorusGeometry::make(1, 16, -1.0), ContractError);
  CHECK_THROWS_AS(TorusGeometry(1, {16}, {1.0}), ShapeError);
  auto g = TorusGeometry::make(2, 8, 1.5);
  CHECK(g->size() == 4096);
  CHECK(g->volume() == doctest::Approx(4.0 * std::pow(1.5, 4)));
}

TEST_CASE("coordinates and indexing are row-major, last axis fastest") {
  auto g = std::make_shared<const TorusGeometry>(1, std::vector<std::size_t>{8, 16},
                                                 std::vector<double>{1.0, 2.0});
  const std::size_t idx[2] = {3, 5};
  const auto p = g->point_index(idx);
  CHECK(p == 3 * 16 + 5);
  CHECK(g->coordinate(p, 0) == doctest::Approx(3.0 / 8.0));
  CHECK(g->coordinate(p, 1) == doctest::Approx(5.0 * 2.0 / 16.0));
  const std::size_t bad[2] = {8, 0};
  CHECK_THROWS_AS(g->point_index(bad), IndexError);
}

TEST_CASE("derivative of a constant vanishes") {
  auto g = TorusGeometry::make(2, 8);
  auto c = ScalarField::constant(g, cplx(2.5, -1.0));
  for (int i = 1; i <= 2; ++i) {
    CHECK(derivative(c, i, DerivKind::holomorphic).sup_norm() < 1e-14);
    CHECK(derivative(c, i, DerivKind::antiholomorphic).sup_norm() < 1e-14);
  }
  CHECK_THROWS_AS(derivative(c, 0, DerivKind::holomorphic), IndexError);
  CHECK_THROWS_AS(derivative(c, 3, DerivKind::holomorphic), IndexError);
}

TEST_CASE("holomorphic derivative of a single Fourier mode") {
  const double L = 1.7;
  auto g = TorusGeometry::make(1, 32, L);
  auto f = ScalarField::from_function(
      g, [&](std::span<const double> x) { return std::polar(1.0, 2 * pi * x[0] / L); });
  auto df = derivative(f, 1, DerivKind::holomorphic);
  auto expect = f;
  for (auto &v : expect.values())
    v *= cplx(0.0, pi / L);
  CHECK(max_abs_diff(df, expect) < 1e-13);
  // The same mode is antiholomorphic-derivative-equal because it only depends on x.
  auto dbf = derivative(f, 1, DerivKind::antiholomorphic);
  CHECK(max_abs_diff(dbf, expect) < 1e-13);
}

TEST_CASE("mode along y distinguishes the two derivatives") {
  auto g = TorusGeometry::make(1, 16);
  auto f = ScalarField::from_function(
      g, [&](std::span<const double> x) { return std::polar(1.0, 2 * pi * x[1]); });
  // d/dz = (d/dx - i d/dy)/2 gives (-i * 2*pi*i)/2 = pi; d/dzbar gives -pi.
  auto d = derivative(f, 1, DerivKind::holomorphic);
  auto db = derivative(f, 1, DerivKind::antiholomorphic);
  CHECK(max_abs_diff(d, pi * f) < 1e-12);
  CHECK(max_abs_diff(db, -pi * f) < 1e-12);
}

namespace {

// d/dz_1 by fourth-order centered differences along x_1 and y_1.
double fd_error(std::size_t n, const hym::testing::ModeSum &modes) {
  auto g = TorusGeometry::make(1, n);
  auto f = modes.sample(g);
  auto df = derivative(f, 1, DerivKind::holomorphic);
  const double h = 1.0 / static_cast<double>(n);
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      auto at = [&](long di, long dj) {
        const std::size_t idx[2] = {(i + n + di) % n, (j + n + dj) % n};
        return f[g->point_index(idx)];
      };
      const cplx fx = (-at(2, 0) + 8.0 * at(1, 0) - 8.0 * at(-1, 0) + at(-2, 0)) / (12 * h);
      const cplx fy = (-at(0, 2) + 8.0 * at(0, 1) - 8.0 * at(0, -1) + at(0, -2)) / (12 * h);
      const cplx fd = 0.5 * (fx - cplx(0, 1) * fy);
      const std::size_t idx[2] = {i, j};
      err = std::max(err, std::abs(fd - df[g->point_index(idx)]));
    }
  return err;
}

} // namespace

TEST_CASE("spectral derivative agrees with fourth-order finite differences") {
  std::mt19937_64 rng(11);
  auto g0 = TorusGeometry::make(1, 8);
  auto modes = random_modes(*g0, rng, 3, 6);
  const double e1 = fd_error(64, modes);
  const double e2 = fd_error(128, modes);
  auto g64 = TorusGeometry::make(1, 64);
  const double scale = derivative(modes.sample(g64), 1, DerivKind::holomorphic).sup_norm();
  CHECK(e1 < 1e-3 * scale);
  // Fourth order: halving h divides the error by ~16.
  CHECK(e1 / e2 > 12.0);
  CHECK(e1 / e2 < 20.0);
}

TEST_CASE("laplacian of constant and of a cosine") {
  const double L = 0.8;
  auto g = TorusGeometry::make(1, 32, L);
  CHECK(laplacian(ScalarField::constant(g, 3.0)).sup_norm() < 1e-13);
  auto f = ScalarField::from_real_function(
      g, [&](std::span<const double> x) { return std::cos(2 * pi * x[0] / L); });
  auto lf = laplacian(f);
  CHECK(lf.is_real());
  CHECK(max_abs_diff(lf, -(pi * pi / (L * L)) * f) < 1e-11);
}

TEST_CASE("laplacian equals sum of d dbar") {
  std::mt19937_64 rng(5);
  auto g = TorusGeometry::make(2, 8);
  auto f = random_modes(*g, rng, 3, 8).sample(g);
  auto lf = laplacian(f);
  ScalarField sum(g);
  for (int k = 1; k <= 2; ++k)
    sum += derivative(derivative(f, k, DerivKind::antiholomorphic), k, DerivKind::holomorphic);
  CHECK(max_abs_diff(lf, sum) < 1e-10 * lf.sup_norm());
}

TEST_CASE("integral of a laplacian vanishes") {
  std::mt19937_64 rng(7);
  for (int n : {1, 2}) {
    auto g = TorusGeometry::make(n, n == 1 ? 64 : 16);
    auto f = random_real_modes(*g, rng, 5, 10).sample(g);
    CHECK(std::abs(integrate(laplacian(f))) <= 1e-12 * f.sup_norm());
  }
}

TEST_CASE("poisson_solve examples and round trip") {
  std::mt19937_64 rng(3);
  const double L = 1.3;
  auto g = TorusGeometry::make(1, 64, L);
  CHECK(poisson_solve(ScalarField(g, true)).sup_norm() == 0.0);

  auto c = ScalarField::from_real_function(
      g, [&](std::span<const double> x) { return std::cos(2 * pi * x[0] / L); });
  CHECK(max_abs_diff(poisson_solve(c), -(L * L / (pi * pi)) * c) < 1e-12);

  for (int n : {1, 2}) {
    auto gn = TorusGeometry::make(n, n == 1 ? 64 : 16);
    auto f = random_modes(*gn, rng, 4, 12, true).sample(gn);
    auto u = poisson_solve(laplacian(f));
    CHECK(max_abs_diff(u, f) < 1e-10 * std::max(1.0, f.sup_norm()));
    CHECK(std::abs(integrate(u)) < 1e-12);
  }

  auto bad = ScalarField::constant(g, 1.0);
  try {
    poisson_solve(bad);
    FAIL("expected SolvabilityError");
  } catch (const SolvabilityError &e) {
    CHECK(e.integral() == doctest::Approx(g->volume()));
    CHECK(std::string(e.what()).find("3.38") != std::string::npos);
  }
}

TEST_CASE("integrate: volume and pure modes") {
  auto g = TorusGeometry::make(2, 8, 1.25);
  CHECK(integrate(ScalarField::constant(g, 1.0)) == cplx(g->volume(), 0.0));
  auto mode = ScalarField::from_function(g, [](std::span<const double> x) {
    return std::polar(1.0, 2 * pi * (x[0] - 2 * x[3]) / 1.25);
  });
  CHECK(std::abs(integrate(mode)) < 1e-13);
}

TEST_CASE("integrate matches Parseval on band-limited products") {
  std::mt19937_64 rng(19);
  for (int n : {1, 2}) {
    auto g = TorusGeometry::make(n, n == 1 ? 32 : 12);
    auto a = random_modes(*g, rng, 3, 10);
    auto b = random_modes(*g, rng, 3, 10);
    auto fa = a.sample(g);
    auto fb = b.sample(g);
    ScalarField prod = fa;
    for (std::size_t i = 0; i < prod.size(); ++i)
      prod[i] *= std::conj(fb[i]);
    cplx expect = 0.0;
    for (std::size_t i = 0; i < a.modes.size(); ++i)
      for (std::size_t j = 0; j < b.modes.size(); ++j)
        if (a.modes[i] == b.modes[j])
          expect += a.coeffs[i] * std::conj(b.coeffs[j]);
    expect *= g->volume();
    CHECK(std::abs(integrate(prod) - expect) <= 1e-12 * std::max(1.0, std::abs(expect)));
  }
}

TEST_CASE("laplacian is self-adjoint and non-positive") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    auto g = TorusGeometry::make(1 + trial % 2, trial % 2 ? 12 : 32);
    auto f = random_modes(*g, rng, 3, 8).sample(g);
    auto h = random_modes(*g, rng, 3, 8).sample(g);
    auto lf = laplacian(f);
    auto lh = laplacian(h);
    ScalarField left = lf, right = f;
    for (std::size_t i = 0; i < f.size(); ++i) {
      left[i] *= std::conj(h[i]);
      right[i] *= std::conj(lh[i]);
    }
    const cplx a = integrate(left), b = integrate(right);
    CHECK(std::abs(a - b) <= 1e-12 * std::max(std::abs(a), 1.0));

    auto fr = random_real_modes(*g, rng, 3, 8).sample(g);
    auto lfr = laplacian(fr);
    ScalarField q = lfr;
    for (std::size_t i = 0; i < q.size(); ++i)
      q[i] *= std::conj(fr[i]);
    CHECK(integrate_real(q) <= 1e-12 * lfr.sup_norm());
  }
}

TEST_CASE("real fields stay real through derivative pairs and the laplacian") {
  std::mt19937_64 rng(29);
  auto g = TorusGeometry::make(1, 16);
  auto f = random_real_modes(*g, rng, 8, 6).sample(g).real_part();
  // Includes the Nyquist mode: d dbar f must still be real.
  auto ddb = derivative(derivative(f, 1, DerivKind::antiholomorphic), 1, DerivKind::holomorphic);
  double imag = 0.0;
  for (auto v : ddb.values())
    imag = std::max(imag, std::abs(v.imag()));
  CHECK(imag < 1e-12 * std::max(1.0, ddb.sup_norm()));
  auto lf = laplacian(f);
  CHECK(lf.is_real());
}

TEST_CASE("mismatched grids are rejected") {
  auto a = ScalarField(TorusGeometry::make(1, 8));
  auto b = ScalarField(TorusGeometry::make(1, 16));
  CHECK_THROWS_AS(a += b, ShapeError);
}
