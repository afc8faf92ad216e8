#include "doctest.h"

#include <cmath>
#include <numbers>

#include "hym/errors.hpp"
#include "hym/random_fields.hpp"
#include "hym/solver.hpp"
#include "test_support.hpp"

using namespace hym;
constexpr double two_pi = 2.0 * std::numbers::pi;

namespace {

double max_diff(const MatrixField &a, const MatrixField &b) { return (a - b).sup_norm(); }

// Hermitian field with every eigenvalue in (0, 1]: exp(A - sup lambda_max(A)).
MatrixField contraction_field(const GeometryPtr &g, int r, Rng &rng, double amp) {
  MatrixField a = random_hermitian_field(g, r, rng, 2, amp);
  const double top = eigen_range(a).second.max_real();
  return exp(hermitian_project(a - MatrixField::identity(g, r, top)));
}

} // namespace

TEST_CASE("constant target gives the scaled identity without iterating") {
  auto g = TorusGeometry::make(1, 64);
  auto bundle = BundleData::constant(g, 2, 2.0);
  HYMTarget target{MatrixField::identity(g, 2, 3.0)};
  auto [H, rep] = solve_prescribed(target, bundle);
  CHECK(rep.status == SolveStatus::converged);
  CHECK(rep.newton_steps <= 3);
  CHECK(max_diff(H, MatrixField::identity(g, 2, 1.5)) <= 1e-9);
  CHECK(rep.final_residual <= 1e-9);
}

TEST_CASE("constant target with a non-constant initial guess still lands on the identity multiple") {
  auto g = TorusGeometry::make(1, 32, two_pi);
  auto bundle = BundleData::constant(g, 2, 1.0);
  Rng rng(3);
  MatrixField init = random_positive_field(g, 2, rng, 2, 0.4);
  HYMTarget target{MatrixField::identity(g, 2, 2.0)};
  auto [H, rep] = solve_prescribed(target, bundle, {}, &init);
  REQUIRE(rep.status == SolveStatus::converged);
  CHECK(max_diff(H, MatrixField::identity(g, 2, 2.0)) <= 1e-8);
}

TEST_CASE("manufactured metrics are recovered on T^2") {
  auto g = TorusGeometry::make(1, 32, two_pi);
  auto bundle = BundleData::constant(g, 2, 1.0);
  for (int seed = 0; seed < 3; ++seed) {
    Rng rng(500 + seed);
    MatrixField Hs = random_positive_field(g, 2, rng, 2, 0.5);
    HYMTarget target{hym_endomorphism(Hs, bundle)};
    auto [H, rep] = solve_prescribed(target, bundle);
    REQUIRE(rep.status == SolveStatus::converged);
    CHECK(max_diff(H, Hs) <= 1e-8);
    CHECK(hym_residual(H, target, bundle).sup_norm <= 1e-9 * target.phi_target.sup_norm());
    // Every accepted iterate stays positive definite.
    for (const auto &d : rep.diagnostics)
      CHECK(d.lambda_min > 0.0);
  }
}

TEST_CASE("fixed-point fallback takes over when Newton is capped") {
  auto g = TorusGeometry::make(1, 32, two_pi);
  auto bundle = BundleData::constant(g, 2, 1.0);
  Rng rng(520);
  MatrixField Hs = random_positive_field(g, 2, rng, 2, 0.2);
  HYMTarget target{hym_endomorphism(Hs, bundle)};
  SolveOptions opts;
  opts.max_newton = 1;
  opts.max_stage_halvings = 0;
  auto [H, rep] = solve_prescribed(target, bundle, opts);
  REQUIRE(rep.status == SolveStatus::converged);
  CHECK(rep.used_picard);
  CHECK(max_diff(H, Hs) <= 1e-8);

  opts.picard_fallback = false;
  auto [H2, rep2] = solve_prescribed(target, bundle, opts);
  CHECK(rep2.status == SolveStatus::max_iter);
  CHECK_FALSE(rep2.used_picard);
}

TEST_CASE("manufactured metric of rank 3 with a variable F0") {
  auto g = TorusGeometry::make(1, 32, two_pi);
  Rng rng(77);
  ScalarField F0 = random_smooth_scalar(g, rng, 1, 0.3);
  F0 += 1.5;
  auto bundle = BundleData::field(3, F0);
  MatrixField Hs = random_positive_field(g, 3, rng, 2, 0.4);
  HYMTarget target{hym_endomorphism(Hs, bundle)};
  auto [H, rep] = solve_prescribed(target, bundle);
  REQUIRE(rep.status == SolveStatus::converged);
  CHECK(max_diff(H, Hs) <= 1e-8);
}

TEST_CASE("manufactured metric on T^4") {
  auto g = TorusGeometry::make(2, 12, two_pi);
  auto bundle = BundleData::constant(g, 2, 1.0);
  Rng rng(11);
  MatrixField Hs = random_positive_field(g, 2, rng, 1, 0.3);
  HYMTarget target{hym_endomorphism(Hs, bundle)};
  auto [H, rep] = solve_prescribed(target, bundle);
  REQUIRE(rep.status == SolveStatus::converged);
  CHECK(max_diff(H, Hs) <= 1e-8);
}

TEST_CASE("solutions from different initial guesses coincide") {
  auto g = TorusGeometry::make(1, 32, two_pi);
  auto bundle = BundleData::constant(g, 2, 1.0);
  Rng rng(21);
  MatrixField Hs = random_positive_field(g, 2, rng, 2, 0.4);
  HYMTarget target{hym_endomorphism(Hs, bundle)};
  MatrixField a = MatrixField::identity(g, 2, 0.5);
  MatrixField b = random_positive_field(g, 2, rng, 1, 0.5);
  auto [Ha, ra] = solve_prescribed(target, bundle, {}, &a);
  auto [Hb, rb] = solve_prescribed(target, bundle, {}, &b);
  REQUIRE(ra.status == SolveStatus::converged);
  REQUIRE(rb.status == SolveStatus::converged);
  CHECK(max_diff(Ha, Hb) <= 1e-8);
}

TEST_CASE("rank one solve agrees with the scalar equation") {
  auto g = TorusGeometry::make(1, 32, two_pi);
  Rng rng(8);
  ScalarField phis = random_smooth_scalar(g, rng, 2, 0.5);
  const double F0 = 1.0;
  ScalarField G = scalar_line_curvature(phis, F0).G;
  REQUIRE(G.min_real() > 0.0);

  auto [phi, krep] = solve_kazdan_warner(G, F0);
  REQUIRE(krep.status == SolveStatus::converged);

  auto bundle = BundleData::constant(g, 1, F0);
  HYMTarget target{MatrixField::scalar_identity(G, 1)};
  auto [H, mrep] = solve_prescribed(target, bundle);
  REQUIRE(mrep.status == SolveStatus::converged);
  const ScalarField h_from_phi = phi.map_real([](double v) { return std::exp(-v); });
  CHECK(testing::max_abs_diff(H.component(0, 0), h_from_phi) <= 1e-8);
}

TEST_CASE("outputs obey the comparison bound") {
  auto g = TorusGeometry::make(1, 32, two_pi);
  const double F0 = 1.5;
  auto bundle = BundleData::constant(g, 2, F0);
  for (int seed = 0; seed < 2; ++seed) {
    Rng rng(900 + seed);
    MatrixField phi = F0 * contraction_field(g, 2, rng, 0.6);
    auto [H, rep] = solve_prescribed(HYMTarget{phi}, bundle);
    REQUIRE(rep.status == SolveStatus::converged);
    CHECK(comparison_check(H, 1.0));
    CHECK(eigen_range(H).second.max_real() <= 1.0 + 1e-6);

    auto [H2, rep2] = solve_prescribed(HYMTarget{2.0 * MatrixField(phi)}, bundle);
    REQUIRE(rep2.status == SolveStatus::converged);
    CHECK(comparison_check(H2, 2.0));
  }
}

TEST_CASE("comparison_check examples") {
  auto g = TorusGeometry::make(1, 8);
  CHECK(comparison_check(MatrixField::identity(g, 2), 1.0));
  CHECK(comparison_check(MatrixField::identity(g, 2, 1.0 + 5e-7), 1.0));
  CHECK_FALSE(comparison_check(MatrixField::identity(g, 2, 1.00001), 1.0));
  CMat m(2, 2);
  m << 0.5, 0.0, 0.0, 2.5;
  CHECK(comparison_check(MatrixField::constant(g, m).mark_hermitian(), 2.5));
  CHECK_FALSE(comparison_check(MatrixField::constant(g, m).mark_hermitian(), 2.0));
}

TEST_CASE("solver rejects bad input") {
  auto g = TorusGeometry::make(1, 16);
  auto bundle = BundleData::constant(g, 2, 1.0);
  CMat m(2, 2);
  m << 1.0, 0.0, 0.0, -0.5;
  CHECK_THROWS_AS(solve_prescribed(HYMTarget{MatrixField::constant(g, m).mark_hermitian()}, bundle),
                  PositivityError);
  CHECK_THROWS_AS(solve_prescribed(HYMTarget{MatrixField::identity(g, 3)}, bundle), ShapeError);
  auto other = TorusGeometry::make(1, 32);
  CHECK_THROWS_AS(solve_prescribed(HYMTarget{MatrixField::identity(other, 2)}, bundle),
                  ContractError);

  SolveOptions bad;
  bad.tol_residual = 0.0;
  CHECK_THROWS_AS(solve_prescribed(HYMTarget{MatrixField::identity(g, 2)}, bundle, bad),
                  ContractError);
  bad = {};
  bad.min_damping = 2.0;
  CHECK_THROWS_AS(bad.validate(), ContractError);

  MatrixField neg = MatrixField::identity(g, 2, -1.0);
  CHECK_THROWS_AS(solve_prescribed(HYMTarget{MatrixField::identity(g, 2)}, bundle, {}, &neg),
                  PositivityError);
}

TEST_CASE("status names") {
  CHECK(std::string(to_string(SolveStatus::converged)) == "converged");
  CHECK(std::string(to_string(SolveStatus::obstruction)) == "obstruction");
  CHECK(std::string(to_string(SolveStatus::max_iter)) == "max_iter");
  CHECK(std::string(to_string(SolveStatus::positivity_breakdown)) == "positivity_breakdown");
}

TEST_CASE("scalar equation with constant data is solved by a constant") {
  auto g = TorusGeometry::make(1, 32);
  const double F0 = 2.0, c = 0.7;
  ScalarField G = ScalarField::constant(g, c);
  G.make_real();
  auto [phi, rep] = solve_kazdan_warner(G, F0);
  REQUIRE(rep.status == SolveStatus::converged);
  const double expect = std::log(F0 / c);
  CHECK(std::abs(phi.max_real() - expect) <= 1e-12);
  CHECK(std::abs(phi.min_real() - expect) <= 1e-12);
  CHECK(rep.newton_steps == 0);
}

TEST_CASE("scalar equation recovers manufactured solutions") {
  for (int n = 1; n <= 2; ++n) {
    auto g = TorusGeometry::make(n, n == 1 ? 64 : 12, two_pi);
    Rng rng(40 + n);
    ScalarField phis = random_smooth_scalar(g, rng, n == 1 ? 3 : 1, 0.8);
    ScalarField F0 = random_smooth_scalar(g, rng, 1, 0.2);
    F0 += 1.0;
    ScalarField G = scalar_line_curvature(phis, F0).G;
    REQUIRE(G.min_real() > 0.0);
    auto [phi, rep] = solve_kazdan_warner(G, F0);
    REQUIRE(rep.status == SolveStatus::converged);
    CHECK(testing::max_abs_diff(phi, phis) <= 1e-9);
    CHECK(rep.final_residual <= 1e-9);
  }
}

TEST_CASE("scalar equation rejects non-positive data unless told otherwise") {
  auto g = TorusGeometry::make(1, 16);
  ScalarField G = ScalarField::constant(g, -1.0);
  G.make_real();
  CHECK_THROWS_AS(solve_kazdan_warner(G, 1.0), ContractError);
  SolveOptions o;
  o.check_contracts = false;
  o.max_stage_halvings = 2;
  auto [phi, rep] = solve_kazdan_warner(G, 0.0, o);
  CHECK(rep.status != SolveStatus::converged);
  CHECK_FALSE(rep.message.empty());
}

TEST_CASE("normalization of a constant reference") {
  auto g = TorusGeometry::make(1, 16);
  CMat m(2, 2);
  m << 1.0, 0.0, 0.0, 3.0;
  auto norm = normalize_reference(MatrixField::constant(g, m).mark_hermitian());
  CHECK(norm.lambda0 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(norm.f.sup_norm() <= 1e-14);
}

TEST_CASE("normalization makes the smallest eigenvalue constant") {
  for (int n = 1; n <= 2; ++n) {
    auto g = TorusGeometry::make(n, n == 1 ? 32 : 8);
    Rng rng(60 + n);
    MatrixField omega = random_hermitian_field(g, 3, rng, 2, 0.5) + MatrixField::identity(g, 3, 1.0);
    omega = hermitian_project(omega);
    auto norm = normalize_reference(omega);
    // Independent oracle: the mean of kappa computed from the eigenvalue list.
    const auto ev = eigenvalues(omega);
    double sum = 0.0;
    for (std::size_t p = 0; p < omega.points(); ++p)
      sum += ev[3 * p];
    CHECK(norm.lambda0 == doctest::Approx(sum / omega.points()).epsilon(1e-12));
    CHECK(std::abs(integrate(norm.f)) <= 1e-10);
    MatrixField shifted =
        hermitian_project(omega + MatrixField::scalar_identity(laplacian(norm.f).real_part(), 3));
    auto lo = eigen_range(shifted).first;
    CHECK(std::abs(lo.max_real() - norm.lambda0) <= 1e-8);
    CHECK(std::abs(lo.min_real() - norm.lambda0) <= 1e-8);
  }
}

TEST_CASE("normalization reports the obstruction") {
  auto g = TorusGeometry::make(1, 16);
  CMat m(2, 2);
  m << -0.5, 0.0, 0.0, 3.0;
  try {
    normalize_reference(MatrixField::constant(g, m).mark_hermitian());
    FAIL("expected ObstructionError");
  } catch (const ObstructionError &e) {
    CHECK(e.integral() == doctest::Approx(-0.5 * g->volume()));
  }
}
