#pragma once

#include "hym/matrix_field.hpp"

namespace hym {

/// Model bundle E = L^{+r} with reference metric h0 = h_L * Id. Its HYM
/// endomorphism is Omega0 = F0 * Id, where F0 is a positive constant or
/// field.
struct BundleData {
  int r = 1;
  ScalarField F0;
  int degree = 0;

  static BundleData constant(const GeometryPtr &geometry, int r, double F0, int degree = 0);
  static BundleData field(int r, ScalarField F0, int degree = 0);

  /// Throws ContractError unless r is valid and F0 is real and > 0 everywhere.
  void validate() const;
  MatrixField omega0() const { return MatrixField::scalar_identity(F0, r); }
  double mean_F0() const;
};

/// Prescribed tensor through its endomorphism representative against h0.
struct HYMTarget {
  MatrixField phi_target;

  /// Throws ContractError unless phi_target is Hermitian-flagged and
  /// PositivityError unless its smallest eigenvalue is > 0 everywhere.
  void validate() const;
};

/// T_i = (d_i H) H^{-1}.
OneFormMatrixField connection_form(const MatrixField &H);

/// Representative against h0 of the HYM tensor of the metric H h0:
///   Phi_H = F0 H - Delta_g H + sum_k (d_k H) H^{-1} (dbar_k H),
/// which equals F0 H - sum_k dbar_k((d_k H) H^{-1}) H. Hermitian-flagged.
MatrixField hym_endomorphism(const MatrixField &H, const BundleData &bundle);

struct Residual {
  MatrixField field;
  double sup_norm = 0.0;
  double l2_norm = 0.0;
};

Residual hym_residual(const MatrixField &H, const HYMTarget &target, const BundleData &bundle);

/// Precomputed data of the linearization at a metric H, reused across many
/// applications inside a Krylov solve.
class Linearization {
public:
  /// omega1 = hym_endomorphism(H) H^{-1}.
  Linearization(const MatrixField &H, const MatrixField &omega1);

  /// Exact derivative of the discrete map K -> Phi(K H) H^{-1} at K = Id in
  /// direction Psi; with X = Psi H,
  ///   L(Psi) = omega1 Psi + [-Delta X + sum_k (d_k X H^{-1} dbar_k H
  ///            - d_k H H^{-1} X H^{-1} dbar_k H + d_k H H^{-1} dbar_k X)
  ///            - (Phi(H) - F0 H) H^{-1} X] H^{-1}.
  MatrixField apply(const MatrixField &psi) const;

  /// Weak form of the same operator,
  ///   L_w(Psi) = -sum_k [H dbar_k(H^{-1} A_k) + (dbar_k H) H^{-1} A_k] + omega1 Psi,
  ///   A_k = d_k(Psi H) H^{-1} - T_k Psi,
  /// which is self-adjoint in integrate(tr(Psi H Xi^* H^{-1})) exactly on the
  /// grid. It agrees with apply() up to aliasing error.
  MatrixField apply_weak(const MatrixField &psi) const;

  /// apply_weak in the frame Y = H^{-1/2} Psi H^{1/2}, where the pairing
  /// becomes the plain integrate(tr(Y Z^*)). Maps Hermitian to Hermitian.
  MatrixField apply_symmetric(const MatrixField &Y) const;

  const MatrixField &H() const { return H_; }
  const MatrixField &H_inv() const { return H_inv_; }
  const MatrixField &H_sqrt() const { return H_sqrt_; }
  const MatrixField &H_inv_sqrt() const { return H_inv_sqrt_; }
  const MatrixField &omega1() const { return omega1_; }

private:
  MatrixField H_, H_inv_, H_sqrt_, H_inv_sqrt_, omega1_;
  std::vector<MatrixField> dH_, dbarH_;
  MatrixField curvature_part_; ///< (Phi(H) - F0 H) H^{-1}, without the F0 term
};

/// Linearization(H, omega1).apply(psi).
MatrixField linearized_apply(const MatrixField &psi, const MatrixField &H,
                             const MatrixField &omega1);

struct LineCurvature {
  ScalarField s; ///< F0 + Delta_g phi
  ScalarField G; ///< e^{-phi} s
};

/// Curvature of the line metric e^{-phi} h0.
LineCurvature scalar_line_curvature(const ScalarField &phi, const ScalarField &F0);
LineCurvature scalar_line_curvature(const ScalarField &phi, double F0);

enum class CurvatureKind { bundle, kahler };

/// Sampled curvature tensor on T^4. Component (i, j, a, b) is R_{i jbar a bbar}
/// (bundle: a, b fiber indices; kahler: a = k, b = l tangent indices). Storage
/// is point-major, index ((i * n + j) * r + a) * r + b within a point.
struct CurvatureField {
  CurvatureKind kind = CurvatureKind::bundle;
  GeometryPtr geometry;
  int r = 0;     ///< fiber rank (n for kahler)
  std::vector<cplx> data;
  MatrixField h; ///< fiber metric (bundle only)

  CurvatureField() = default;
  CurvatureField(CurvatureKind kind, GeometryPtr geometry, int r);

  int n() const { return geometry->n(); }
  std::size_t components() const {
    return static_cast<std::size_t>(n()) * n() * r * r;
  }
  std::size_t index(std::size_t p, int i, int j, int a, int b) const {
    return p * components() + ((static_cast<std::size_t>(i) * n() + j) * r + a) * r + b;
  }
  cplx &at(std::size_t p, int i, int j, int a, int b) { return data[index(p, i, j, a, b)]; }
  cplx at(std::size_t p, int i, int j, int a, int b) const { return data[index(p, i, j, a, b)]; }
  /// r x r block R_{i jbar . .} at point p.
  CMat block(std::size_t p, int i, int j) const;
  void set_block(std::size_t p, int i, int j, const CMat &m);

  /// max |R_{i jbar a bbar} - conj(R_{j ibar b abar})|.
  double hermitian_defect() const;
  /// max violation of R_{i jbar k lbar} = R_{k jbar i lbar} = R_{i lbar k jbar}.
  double kahler_defect() const;
  double sup_norm() const;
};

/// Chern curvature R_{i jbar a bbar} of a fiber metric h on the trivial bundle
/// over T^4: Gamma_i = (d_i h) h^{-1}, R_{i jbar} = -dbar_j(Gamma_i) h, computed
/// as -d_i dbar_j h + (d_i h) h^{-1} (dbar_j h) and averaged with its
/// conjugate transpose partner to remove rounding asymmetry.
CurvatureField curvature_from_metric(const MatrixField &h);

} // namespace hym
