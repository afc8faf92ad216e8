#include "hym/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hym/errors.hpp"

namespace hym {

BundleData BundleData::constant(const GeometryPtr &geometry, int r, double F0, int degree) {
  BundleData b{r, ScalarField::constant(geometry, F0), degree};
  b.F0.make_real();
  b.validate();
  return b;
}

BundleData BundleData::field(int r, ScalarField F0, int degree) {
  BundleData b{r, std::move(F0), degree};
  b.validate();
  return b;
}

void BundleData::validate() const {
  if (r < 1 || r > max_rank)
    throw ContractError("bundle rank must be between 1 and " + std::to_string(max_rank));
  if (!F0.geometry())
    throw ContractError("bundle has no reference curvature F0");
  if (!F0.is_real())
    throw ContractError("reference curvature F0 must be real");
  if (!(F0.min_real() > 0.0)) {
    std::ostringstream os;
    os << "reference curvature F0 must be positive everywhere (min " << F0.min_real() << ")";
    throw ContractError(os.str());
  }
}

double BundleData::mean_F0() const { return integrate_real(F0) / F0.geom().volume(); }

void HYMTarget::validate() const {
  if (!phi_target.geometry())
    throw ContractError("empty HYM target");
  if (!phi_target.is_hermitian())
    throw ContractError("HYM target must be Hermitian");
  auto [lo, hi] = eigen_range(phi_target);
  std::size_t worst = 0;
  for (std::size_t p = 0; p < lo.size(); ++p)
    if (lo.real_at(p) < lo.real_at(worst))
      worst = p;
  if (!(lo.real_at(worst) > 0.0)) {
    std::ostringstream os;
    os << "HYM target is not positive definite: smallest eigenvalue " << lo.real_at(worst)
       << " at grid point " << worst
       << "; for non-positive data see the counterexample and nonexistence tools";
    throw PositivityError(os.str(), worst, lo.real_at(worst));
  }
}

OneFormMatrixField connection_form(const MatrixField &H) {
  const MatrixField Hinv = inverse(H);
  OneFormMatrixField T;
  for (int k = 1; k <= H.geom().n(); ++k)
    T.components.push_back(product(derivative(H, k, DerivKind::holomorphic), Hinv));
  return T;
}

MatrixField hym_endomorphism(const MatrixField &H, const BundleData &bundle) {
  bundle.validate();
  if (H.rank() != bundle.r)
    throw ShapeError("metric rank does not match bundle rank");
  require_same_grid(H.geom(), bundle.F0.geom(), "hym_endomorphism");
  const MatrixField Hinv = inverse(H);
  MatrixField phi = bundle.F0 * MatrixField(H);
  phi -= laplacian(H);
  for (int k = 1; k <= H.geom().n(); ++k) {
    const MatrixField dH = derivative(H, k, DerivKind::holomorphic);
    phi += product(dH, Hinv, adjoint(dH));
  }
  return hermitian_project(phi);
}

Residual hym_residual(const MatrixField &H, const HYMTarget &target, const BundleData &bundle) {
  require_compatible(H, target.phi_target, "hym_residual");
  Residual res;
  res.field = hym_endomorphism(H, bundle) - target.phi_target;
  res.sup_norm = res.field.sup_norm();
  res.l2_norm = res.field.l2_norm();
  return res;
}

Linearization::Linearization(const MatrixField &H, const MatrixField &omega1)
    : H_(H), H_inv_(inverse(H)), H_sqrt_(sqrt(H)), H_inv_sqrt_(inverse_sqrt(H)), omega1_(omega1) {
  require_compatible(H, omega1, "linearization");
  curvature_part_ = -1.0 * laplacian(H);
  for (int k = 1; k <= H.geom().n(); ++k) {
    dH_.push_back(derivative(H, k, DerivKind::holomorphic));
    dbarH_.push_back(adjoint(dH_.back()));
    curvature_part_ += product(dH_.back(), H_inv_, dbarH_.back());
  }
  curvature_part_ = product(curvature_part_, H_inv_);
}

MatrixField Linearization::apply(const MatrixField &psi) const {
  require_compatible(psi, H_, "linearized_apply");
  const MatrixField X = product(psi, H_);
  MatrixField inner_part = -1.0 * laplacian(X);
  inner_part -= product(curvature_part_, X);
  for (std::size_t k = 0; k < dH_.size(); ++k) {
    const int i = static_cast<int>(k) + 1;
    const MatrixField dX = derivative(X, i, DerivKind::holomorphic);
    const MatrixField dbarX = derivative(X, i, DerivKind::antiholomorphic);
    const MatrixField G = product(dH_[k], H_inv_);
    inner_part += product(dX, H_inv_, dbarH_[k]);
    inner_part -= product(G, product(X, H_inv_, dbarH_[k]));
    inner_part += product(G, dbarX);
  }
  MatrixField out = product(omega1_, psi);
  out += product(inner_part, H_inv_);
  return out;
}

MatrixField Linearization::apply_weak(const MatrixField &psi) const {
  require_compatible(psi, H_, "linearized_apply");
  const MatrixField X = product(psi, H_);
  MatrixField out = product(omega1_, psi);
  for (std::size_t k = 0; k < dH_.size(); ++k) {
    const int i = static_cast<int>(k) + 1;
    // A_k = (d_k X - (d_k H) H^{-1} X) H^{-1}
    MatrixField A = derivative(X, i, DerivKind::holomorphic);
    A -= product(dH_[k], H_inv_, X);
    A = product(A, H_inv_);
    const MatrixField B = product(H_inv_, A);
    out -= product(H_, derivative(B, i, DerivKind::antiholomorphic));
    out -= product(dbarH_[k], B);
  }
  return out;
}

MatrixField Linearization::apply_symmetric(const MatrixField &Y) const {
  const MatrixField psi = product(H_sqrt_, Y, H_inv_sqrt_);
  return hermitian_project(product(H_inv_sqrt_, apply_weak(psi), H_sqrt_));
}

MatrixField linearized_apply(const MatrixField &psi, const MatrixField &H,
                             const MatrixField &omega1) {
  return Linearization(H, omega1).apply(psi);
}

LineCurvature scalar_line_curvature(const ScalarField &phi, const ScalarField &F0) {
  if (!phi.is_real())
    throw ContractError("scalar_line_curvature: phi must be real");
  require_same_grid(phi.geom(), F0.geom(), "scalar_line_curvature");
  LineCurvature out;
  out.s = F0 + laplacian(phi);
  out.s.make_real();
  out.G = out.s;
  for (std::size_t p = 0; p < out.G.size(); ++p)
    out.G[p] *= std::exp(-phi.real_at(p));
  return out;
}

LineCurvature scalar_line_curvature(const ScalarField &phi, double F0) {
  auto f = ScalarField::constant(phi.geometry(), F0);
  f.make_real();
  return scalar_line_curvature(phi, f);
}

CurvatureField::CurvatureField(CurvatureKind kind_, GeometryPtr geometry_, int r_)
    : kind(kind_), geometry(std::move(geometry_)), r(r_) {
  if (!geometry)
    throw ContractError("curvature field needs a geometry");
  if (r < 1 || r > max_rank)
    throw ContractError("curvature fiber rank out of range");
  if (kind == CurvatureKind::kahler && r != geometry->n())
    throw ShapeError("Kähler curvature needs fiber rank equal to n");
  data.assign(geometry->size() * components(), cplx(0.0));
}

CMat CurvatureField::block(std::size_t p, int i, int j) const {
  CMat m(r, r);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      m(a, b) = at(p, i, j, a, b);
  return m;
}

void CurvatureField::set_block(std::size_t p, int i, int j, const CMat &m) {
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      at(p, i, j, a, b) = m(a, b);
}

double CurvatureField::hermitian_defect() const {
  double d = 0.0;
  const int nn = n();
  for (std::size_t p = 0; p < geometry->size(); ++p)
    for (int i = 0; i < nn; ++i)
      for (int j = 0; j < nn; ++j)
        for (int a = 0; a < r; ++a)
          for (int b = 0; b < r; ++b)
            d = std::max(d, std::abs(at(p, i, j, a, b) - std::conj(at(p, j, i, b, a))));
  return d;
}

double CurvatureField::kahler_defect() const {
  if (kind != CurvatureKind::kahler)
    return 0.0;
  double d = 0.0;
  const int nn = n();
  for (std::size_t p = 0; p < geometry->size(); ++p)
    for (int i = 0; i < nn; ++i)
      for (int j = 0; j < nn; ++j)
        for (int k = 0; k < nn; ++k)
          for (int l = 0; l < nn; ++l) {
            const cplx v = at(p, i, j, k, l);
            d = std::max(d, std::abs(v - at(p, k, j, i, l)));
            d = std::max(d, std::abs(v - at(p, i, l, k, j)));
          }
  return d;
}

double CurvatureField::sup_norm() const {
  double m = 0.0;
  for (const auto &v : data)
    m = std::max(m, std::abs(v));
  return m;
}

CurvatureField curvature_from_metric(const MatrixField &h) {
  if (h.geom().n() != 2)
    throw ContractError("curvature_from_metric requires a T^4 geometry (n = 2)");
  const MatrixField hinv = inverse(h);
  const int n = 2;
  const int r = h.rank();
  std::vector<MatrixField> dh;
  for (int i = 1; i <= n; ++i)
    dh.push_back(derivative(h, i, DerivKind::holomorphic));

  CurvatureField R(CurvatureKind::bundle, h.geometry(), r);
  R.h = h;
  std::vector<MatrixField> M;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      MatrixField m = product(dh[i], hinv, adjoint(dh[j]));
      m -= derivative(derivative(h, j + 1, DerivKind::antiholomorphic), i + 1,
                      DerivKind::holomorphic);
      M.push_back(std::move(m));
    }
  for (std::size_t p = 0; p < h.points(); ++p)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const CMat sym = 0.5 * (M[i * n + j].value(p) + M[j * n + i].value(p).adjoint());
        R.set_block(p, i, j, sym);
      }
  return R;
}

} // namespace hym
