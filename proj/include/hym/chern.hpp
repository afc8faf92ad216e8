#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hym/curvature.hpp"
#include "hym/random_fields.hpp"

namespace hym {

/// Pointwise traces and norms of a bundle curvature tensor on T^4. All
/// contractions use the flat base metric and the fiber metric h:
///   Ric1_{i jbar} = tr(R_{i jbar} h^{-1}),  Ric2 = sum_i R_{i ibar},
///   s = tr(Ric2 h^{-1}),  |X|^2 = tr(X h^{-1} X^* h^{-1}) on fiber blocks,
///   |R|^2 = sum_{i,j} |R_{i jbar}|^2.
struct BundleInvariants {
  MatrixField ric1; ///< rank n, indexed by base directions
  MatrixField ric2; ///< rank r, indexed by fiber directions
  ScalarField s;
  ScalarField R_norm_sq;
  ScalarField ric1_norm_sq;
  ScalarField ric2_norm_sq;
  CurvatureField T; ///< trace-free part of R in both index pairs
  ScalarField T_norm_sq;
};

BundleInvariants bundle_invariants(const CurvatureField &R);

struct ChernIntegrals {
  double I_c1sq = 0.0;
  double I_c2 = 0.0;
};

ChernIntegrals bundle_chern_integrals(const CurvatureField &R);

struct ChernReport {
  CurvatureKind kind = CurvatureKind::bundle;
  int rank = 0;
  double I_c1sq = 0.0;
  double I_c2 = 0.0;
  double T_norm_sq_integral = 0.0;
  double a = 0.0; ///< lower eigenvalue bound used for the right-hand side
  double b = 0.0; ///< upper eigenvalue bound
  double measured_a = 0.0;
  double measured_b = 0.0;
  double spread_bound = 0.0; ///< (b - a)^2
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0; ///< quadrature slack allowed in the comparison
  bool pass = false;
  /// sup |direct integrand - (T part + eigen-spread part)|.
  double decomposition_defect = 0.0;
  /// sup |(|T|^2 from the tensor) - (|T|^2 from traces)|.
  double norm_identity_defect = 0.0;
  /// sup |(s^2 - r |Ric2|^2) + sum_{i<j} (lambda_i - lambda_j)^2|.
  double spread_identity_defect = 0.0;
  std::vector<std::string> warnings;
};

/// Eigenvalue bounds supplied by the caller instead of the measured ones.
using EigenBounds = std::optional<std::pair<double, double>>;

/// (r - 1) I_c1sq - 2 r I_c2 <= r (r - 1) (b - a)^2 vol / (8 pi^2 n^2), with
/// a, b the extreme eigenvalues of the HYM endomorphism Ric2 h^{-1}.
ChernReport bundle_inequality_check(const CurvatureField &R, EigenBounds bounds = std::nullopt);

/// Kähler case (fiber = tangent bundle, contracted with the flat metric):
/// n I_c1sq - 2 (n + 1) I_c2 <= (n^2 - 2) (b - a)^2 vol / (8 pi^2 n^2), with
/// a, b the extreme eigenvalues of Ric.
ChernReport kahler_invariants_and_check(const CurvatureField &R, EigenBounds bounds = std::nullopt);

/// T_{i jbar k lbar} of a Kähler-symmetric tensor, one point at a time.
CurvatureField kahler_T(const CurvatureField &R);

/// Band-limited random Kähler-symmetric curvature on T^4. Each of the n^4
/// components is drawn independently, then symmetrized in this order:
/// i <-> k, then j <-> l, then R_{i jbar k lbar} <- (R + conj(R_{j ibar l kbar})) / 2.
CurvatureField random_kahler_curvature(const GeometryPtr &geometry, Rng &rng, int max_mode,
                                       double amplitude);

/// Human-readable summary and single-row CSV (with header) of a report.
std::string format_report(const ChernReport &report);
std::string report_csv(const ChernReport &report);

} // namespace hym
