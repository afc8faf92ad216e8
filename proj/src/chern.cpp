#include "hym/chern.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "hym/errors.hpp"

namespace hym {

namespace {

constexpr double pi2 = std::numbers::pi * std::numbers::pi;

void require_symmetric(const CurvatureField &R, CurvatureKind kind, const char *op) {
  if (!R.geometry)
    throw ContractError(std::string(op) + ": curvature field has no geometry");
  if (R.kind != kind)
    throw ContractError(std::string(op) + ": wrong curvature kind");
  if (R.n() != 2)
    throw ContractError(std::string(op) + ": requires a T^4 geometry (n = 2)");
  if (R.data.size() != R.geometry->size() * R.components())
    throw ShapeError(std::string(op) + ": curvature data has the wrong size");
  const double tol = 1e-12 * std::max(1.0, R.sup_norm());
  const double hd = R.hermitian_defect();
  if (hd > tol) {
    std::ostringstream os;
    os << op << ": curvature violates Hermitian symmetry (defect " << hd << ")";
    throw ContractError(os.str());
  }
  if (kind == CurvatureKind::kahler) {
    const double kd = R.kahler_defect();
    if (kd > tol) {
      std::ostringstream os;
      os << op << ": curvature violates the Kähler symmetries (defect " << kd << ")";
      throw ContractError(os.str());
    }
  }
}

// Squared norm of a fiber block X_{a bbar}: tr(X h^{-1} X^* h^{-1}).
double block_norm_sq(const CMat &x, const CMat &hinv) {
  return (x * hinv * x.adjoint() * hinv).trace().real();
}

double sup_abs(const ScalarField &f) { return f.sup_norm(); }

// Smallest and largest eigenvalue over all points of a per-point list.
std::pair<double, double> extremes(const std::vector<double> &ev) {
  auto [lo, hi] = std::minmax_element(ev.begin(), ev.end());
  return {*lo, *hi};
}

void apply_bounds(ChernReport &rep, const EigenBounds &bounds) {
  rep.a = rep.measured_a;
  rep.b = rep.measured_b;
  if (!bounds)
    return;
  auto [a, b] = *bounds;
  if (!(a <= b))
    throw ContractError("eigenvalue bounds need a <= b");
  rep.a = a;
  rep.b = b;
  const double slack = 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
  if (a > rep.measured_a + slack || b < rep.measured_b - slack) {
    std::ostringstream os;
    os << std::setprecision(12) << "supplied bounds [" << a << ", " << b
       << "] do not contain the measured eigenvalue range [" << rep.measured_a << ", "
       << rep.measured_b << "]";
    rep.warnings.push_back(os.str());
  }
}

void finish(ChernReport &rep, double scale) {
  rep.spread_bound = (rep.b - rep.a) * (rep.b - rep.a);
  rep.tolerance = 1e-9 * std::max(1.0, scale);
  rep.pass = rep.lhs <= rep.rhs + rep.tolerance;
}

double sup_diff(const ScalarField &a, const ScalarField &b) {
  double m = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p)
    m = std::max(m, std::abs(a[p] - b[p]));
  return m;
}

// Eigenvalues of Ric2 relative to h at every point, ascending, r per point.
std::vector<double> relative_eigenvalues(const MatrixField &ric2, const MatrixField &h) {
  const MatrixField hs = inverse_sqrt(h);
  return eigenvalues(hermitian_project(product(hs, ric2, hs)));
}

ScalarField spread_sum(const std::vector<double> &ev, const GeometryPtr &g, int r) {
  ScalarField out(g, true);
  for (std::size_t p = 0; p < g->size(); ++p) {
    double acc = 0.0;
    for (int i = 0; i < r; ++i)
      for (int j = i + 1; j < r; ++j) {
        const double d = ev[p * r + i] - ev[p * r + j];
        acc += d * d;
      }
    out[p] = acc;
  }
  return out;
}

} // namespace

BundleInvariants bundle_invariants(const CurvatureField &R) {
  require_symmetric(R, CurvatureKind::bundle, "bundle_invariants");
  const auto &g = R.geometry;
  const int n = R.n(), r = R.r;
  MatrixField h = R.h.rank() == 0 ? MatrixField::identity(g, r) : R.h;
  if (h.rank() != r || !h.geom().same_grid(*g))
    throw ShapeError("bundle_invariants: fiber metric does not match the curvature");
  if (!h.is_hermitian())
    throw ContractError("bundle_invariants: fiber metric must be Hermitian");
  const MatrixField hinv_field = inverse(h); // throws PositivityError if h is not positive

  BundleInvariants out;
  out.ric1 = MatrixField(g, n);
  out.ric2 = MatrixField(g, r);
  out.s = ScalarField(g, true);
  out.R_norm_sq = ScalarField(g, true);
  out.ric1_norm_sq = ScalarField(g, true);
  out.ric2_norm_sq = ScalarField(g, true);
  out.T = CurvatureField(CurvatureKind::bundle, g, r);
  out.T.h = h;
  out.T_norm_sq = ScalarField(g, true);

  for (std::size_t p = 0; p < g->size(); ++p) {
    const CMat hp = h.value(p);
    const CMat hinv = hinv_field.value(p);
    CMat ric1(n, n);
    CMat ric2 = CMat::Zero(r, r);
    double rn = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const CMat b = R.block(p, i, j);
        ric1(i, j) = (b * hinv).trace();
        rn += block_norm_sq(b, hinv);
        if (i == j)
          ric2 += b;
      }
    const double s = (ric2 * hinv).trace().real();
    double tn = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        CMat t = R.block(p, i, j) - ric1(i, j) / static_cast<double>(r) * hp;
        if (i == j)
          t += -ric2 / static_cast<double>(n) + hp * (s / (n * r));
        tn += block_norm_sq(t, hinv);
        out.T.set_block(p, i, j, t);
      }
    out.ric1.at(p) = ric1;
    out.ric2.at(p) = ric2;
    out.s[p] = s;
    out.R_norm_sq[p] = rn;
    out.ric1_norm_sq[p] = ric1.squaredNorm();
    out.ric2_norm_sq[p] = block_norm_sq(ric2, hinv);
    out.T_norm_sq[p] = tn;
  }
  out.ric1 = hermitian_project(out.ric1);
  out.ric2 = hermitian_project(out.ric2);
  return out;
}

namespace {

ChernIntegrals integrals_from(const BundleInvariants &inv, int n) {
  ScalarField c1 = inv.s * inv.s - inv.ric1_norm_sq;
  ScalarField c2 = c1 - inv.ric2_norm_sq + inv.R_norm_sq;
  ChernIntegrals out;
  out.I_c1sq = integrate_real(c1) / (4.0 * pi2 * n * (n - 1));
  out.I_c2 = integrate_real(c2) / (8.0 * pi2 * n * (n - 1));
  return out;
}

} // namespace

ChernIntegrals bundle_chern_integrals(const CurvatureField &R) {
  return integrals_from(bundle_invariants(R), R.n());
}

ChernReport bundle_inequality_check(const CurvatureField &R, EigenBounds bounds) {
  const BundleInvariants inv = bundle_invariants(R);
  const int n = R.n(), r = R.r;
  const auto &g = R.geometry;
  const ChernIntegrals I = integrals_from(inv, n);

  ChernReport rep;
  rep.kind = CurvatureKind::bundle;
  rep.rank = r;
  rep.I_c1sq = I.I_c1sq;
  rep.I_c2 = I.I_c2;
  rep.T_norm_sq_integral = integrate_real(inv.T_norm_sq);

  const MatrixField h = R.h.rank() == 0 ? MatrixField::identity(g, r) : R.h;
  const auto ev = relative_eigenvalues(inv.ric2, h);
  std::tie(rep.measured_a, rep.measured_b) = extremes(ev);
  apply_bounds(rep, bounds);

  rep.lhs = (r - 1) * I.I_c1sq - 2.0 * r * I.I_c2;
  rep.rhs = r * (r - 1) * (rep.b - rep.a) * (rep.b - rep.a) * g->volume() / (8.0 * pi2 * n * n);

  const ScalarField s2 = inv.s * inv.s;
  const ScalarField direct =
      s2 - inv.ric1_norm_sq - static_cast<double>(r) * inv.ric2_norm_sq + static_cast<double>(r) * inv.R_norm_sq;
  const ScalarField spread = s2 - static_cast<double>(r) * inv.ric2_norm_sq;
  const ScalarField decomposed =
      static_cast<double>(r) * inv.T_norm_sq + (static_cast<double>(n - 1) / n) * spread;
  rep.decomposition_defect = sup_diff(direct, decomposed);

  const ScalarField from_traces = inv.R_norm_sq - (1.0 / n) * inv.ric2_norm_sq -
                                  (1.0 / r) * inv.ric1_norm_sq + (1.0 / (n * r)) * s2;
  rep.norm_identity_defect = sup_diff(inv.T_norm_sq, from_traces);
  rep.spread_identity_defect = sup_abs(spread + spread_sum(ev, g, r));

  const double scale =
      integrate_real(inv.R_norm_sq + s2) / (4.0 * pi2) + std::abs(rep.rhs);
  finish(rep, scale);
  return rep;
}

CurvatureField kahler_T(const CurvatureField &R) {
  require_symmetric(R, CurvatureKind::kahler, "kahler_T");
  const int n = R.n();
  const auto &g = R.geometry;
  CurvatureField T(CurvatureKind::kahler, g, n);
  const double c_il = 1.0 / (n * (n + 1.0));
  const double c_ij = (n + 2.0) / (n * n * (n + 1.0));
  for (std::size_t p = 0; p < g->size(); ++p) {
    CMat ric = CMat::Zero(n, n);
    for (int i = 0; i < n; ++i)
      ric += R.block(p, i, i);
    const cplx s = ric.trace();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            cplx v = R.at(p, i, j, k, l);
            if (i == j)
              v -= ric(k, l) / static_cast<double>(n);
            if (k == l)
              v -= ric(i, j) / static_cast<double>(n);
            if (i == l && k == j)
              v -= c_il * s;
            if (i == j && k == l)
              v += c_ij * s;
            T.at(p, i, j, k, l) = v;
          }
  }
  return T;
}

ChernReport kahler_invariants_and_check(const CurvatureField &R, EigenBounds bounds) {
  const CurvatureField T = kahler_T(R); // validates symmetries
  const int n = R.n();
  const auto &g = R.geometry;

  ScalarField s(g, true), rn(g, true), ricn(g, true), tn(g, true);
  MatrixField ric_field(g, n);
  for (std::size_t p = 0; p < g->size(); ++p) {
    CMat ric = CMat::Zero(n, n);
    for (int i = 0; i < n; ++i)
      ric += R.block(p, i, i);
    double r2 = 0.0, t2 = 0.0;
    for (std::size_t c = 0; c < R.components(); ++c) {
      r2 += std::norm(R.data[p * R.components() + c]);
      t2 += std::norm(T.data[p * T.components() + c]);
    }
    s[p] = ric.trace().real();
    rn[p] = r2;
    ricn[p] = ric.squaredNorm();
    tn[p] = t2;
    ric_field.at(p) = ric;
  }
  ric_field = hermitian_project(ric_field);

  ChernReport rep;
  rep.kind = CurvatureKind::kahler;
  rep.rank = n;
  const ScalarField s2 = s * s;
  rep.I_c1sq = integrate_real(s2 - ricn) / (4.0 * pi2 * n * (n - 1));
  rep.I_c2 = integrate_real(s2 - 2.0 * ricn + rn) / (8.0 * pi2 * n * (n - 1));
  rep.T_norm_sq_integral = integrate_real(tn);

  const auto ev = eigenvalues(ric_field);
  std::tie(rep.measured_a, rep.measured_b) = extremes(ev);
  apply_bounds(rep, bounds);

  rep.lhs = n * rep.I_c1sq - 2.0 * (n + 1) * rep.I_c2;
  rep.rhs = (n * n - 2.0) * (rep.b - rep.a) * (rep.b - rep.a) * g->volume() / (8.0 * pi2 * n * n);

  const ScalarField spread = s2 - static_cast<double>(n) * ricn;
  const ScalarField direct = s2 - (n + 2.0) * ricn + (n + 1.0) * rn;
  const ScalarField decomposed = (n + 1.0) * tn + (1.0 - 2.0 / (n * n)) * spread;
  rep.decomposition_defect = sup_diff(direct, decomposed);
  const ScalarField from_traces = rn - (2.0 / n) * ricn + (2.0 / (n * n * (n + 1.0))) * s2;
  rep.norm_identity_defect = sup_diff(tn, from_traces);
  rep.spread_identity_defect = sup_abs(spread + spread_sum(ev, g, n));

  const double scale = integrate_real(rn + s2) / (4.0 * pi2) + std::abs(rep.rhs);
  finish(rep, scale);
  return rep;
}

CurvatureField random_kahler_curvature(const GeometryPtr &geometry, Rng &rng, int max_mode,
                                       double amplitude) {
  if (geometry->n() != 2)
    throw ContractError("random_kahler_curvature requires a T^4 geometry (n = 2)");
  const int n = 2;
  CurvatureField X(CurvatureKind::kahler, geometry, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const ScalarField f = random_smooth_scalar(geometry, rng, max_mode, amplitude, false);
          for (std::size_t p = 0; p < geometry->size(); ++p)
            X.at(p, i, j, k, l) = f[p];
        }
  auto symmetrize = [&](auto partner) {
    CurvatureField Y = X;
    for (std::size_t p = 0; p < geometry->size(); ++p)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l)
              Y.at(p, i, j, k, l) = 0.5 * (X.at(p, i, j, k, l) + partner(p, i, j, k, l));
    X = std::move(Y);
  };
  symmetrize([&](std::size_t p, int i, int j, int k, int l) { return X.at(p, k, j, i, l); });
  symmetrize([&](std::size_t p, int i, int j, int k, int l) { return X.at(p, i, l, k, j); });
  symmetrize([&](std::size_t p, int i, int j, int k, int l) {
    return std::conj(X.at(p, j, i, l, k));
  });
  return X;
}

std::string format_report(const ChernReport &rep) {
  std::ostringstream os;
  os << std::setprecision(12);
  os << (rep.kind == CurvatureKind::bundle ? "bundle" : "kahler") << " Chern report (rank "
     << rep.rank << ")\n";
  os << "  I_c1sq                 " << rep.I_c1sq << "\n";
  os << "  I_c2                   " << rep.I_c2 << "\n";
  os << "  integral |T|^2         " << rep.T_norm_sq_integral << "\n";
  os << "  eigenvalue range used  [" << rep.a << ", " << rep.b << "]\n";
  os << "  measured range         [" << rep.measured_a << ", " << rep.measured_b << "]\n";
  os << "  lhs                    " << rep.lhs << "\n";
  os << "  rhs                    " << rep.rhs << "\n";
  os << "  decomposition defect   " << rep.decomposition_defect << "\n";
  os << "  norm identity defect   " << rep.norm_identity_defect << "\n";
  os << "  spread identity defect " << rep.spread_identity_defect << "\n";
  os << "  verdict                " << (rep.pass ? "PASS" : "FAIL") << "\n";
  for (const auto &w : rep.warnings)
    os << "  warning: " << w << "\n";
  return os.str();
}

std::string report_csv(const ChernReport &rep) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "kind,rank,I_c1sq,I_c2,T_norm_sq_integral,a,b,measured_a,measured_b,spread_bound,lhs,rhs,"
        "pass,decomposition_defect,norm_identity_defect,spread_identity_defect\n";
  os << (rep.kind == CurvatureKind::bundle ? "bundle" : "kahler") << ',' << rep.rank << ','
     << rep.I_c1sq << ',' << rep.I_c2 << ',' << rep.T_norm_sq_integral << ',' << rep.a << ','
     << rep.b << ',' << rep.measured_a << ',' << rep.measured_b << ',' << rep.spread_bound << ','
     << rep.lhs << ',' << rep.rhs << ',' << (rep.pass ? 1 : 0) << ',' << rep.decomposition_defect
     << ',' << rep.norm_identity_defect << ',' << rep.spread_identity_defect << '\n';
  return os.str();
}

} // namespace hym
