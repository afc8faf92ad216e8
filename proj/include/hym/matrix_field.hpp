#pragma once

#include <Eigen/Dense>

#include <functional>
#include <utility>
#include <vector>

#include "hym/torus.hpp"

namespace hym {

constexpr int max_rank = 8;

/// Small dense complex matrix used for the value of a field at one point.
using CMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, max_rank, max_rank>;
using RowMajorMap = Eigen::Map<Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstRowMajorMap =
    Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

/// Samples of an r x r complex matrix on every grid point. Storage is
/// point-major with each matrix row-major, entry (a, b) of point p at
/// data()[p * r * r + a * r + b]; this is exactly the interleaved layout that
/// TorusGeometry::apply expects with howmany = r * r.
///
/// The Hermitian flag is an assertion carried along with the data: it is set
/// by operations whose output is Hermitian by construction and required by
/// the eigenvalue-based operations.
class MatrixField {
public:
  MatrixField() = default;
  MatrixField(GeometryPtr geometry, int r);
  MatrixField(GeometryPtr geometry, int r, std::vector<cplx> data, bool hermitian = false);

  static MatrixField identity(GeometryPtr geometry, int r, double scale = 1.0);
  static MatrixField constant(GeometryPtr geometry, const CMat &value);
  /// f(x) * Id for a scalar field f; Hermitian when f is real.
  static MatrixField scalar_identity(const ScalarField &f, int r);
  static MatrixField from_function(GeometryPtr geometry, int r,
                                   const std::function<CMat(std::span<const double>)> &f);

  const GeometryPtr &geometry() const noexcept { return geometry_; }
  const TorusGeometry &geom() const { return *geometry_; }
  int rank() const noexcept { return r_; }
  std::size_t points() const noexcept { return geometry_ ? geometry_->size() : 0; }
  std::size_t stride() const noexcept { return static_cast<std::size_t>(r_) * r_; }

  std::span<const cplx> data() const noexcept { return data_; }
  std::span<cplx> data() noexcept { return data_; }

  ConstRowMajorMap at(std::size_t p) const { return {data_.data() + p * stride(), r_, r_}; }
  RowMajorMap at(std::size_t p) { return {data_.data() + p * stride(), r_, r_}; }
  CMat value(std::size_t p) const { return at(p); }

  cplx entry(std::size_t p, int a, int b) const { return data_[p * stride() + a * r_ + b]; }
  ScalarField component(int a, int b) const;
  void set_component(int a, int b, const ScalarField &f);

  bool is_hermitian() const noexcept { return hermitian_; }
  /// Assert Hermitian symmetry; throws ContractError if the data violate it
  /// beyond 1e-12 relative.
  MatrixField &mark_hermitian();
  /// Drop the assertion (after a mutation through data()).
  MatrixField &clear_hermitian() noexcept {
    hermitian_ = false;
    return *this;
  }
  /// max over points of the largest entry of |A - A^*|.
  double hermitian_defect() const;

  MatrixField &operator+=(const MatrixField &other);
  MatrixField &operator-=(const MatrixField &other);
  MatrixField &operator*=(double s);
  /// Pointwise multiplication by a scalar field.
  MatrixField &operator*=(const ScalarField &f);

  /// Largest absolute entry over all points and components.
  double sup_norm() const;
  /// sqrt(integrate(tr(A A^*))).
  double l2_norm() const;

private:
  GeometryPtr geometry_;
  int r_ = 0;
  std::vector<cplx> data_;
  bool hermitian_ = false;
};

MatrixField operator+(MatrixField a, const MatrixField &b);
MatrixField operator-(MatrixField a, const MatrixField &b);
MatrixField operator*(double s, MatrixField a);
MatrixField operator*(const ScalarField &f, MatrixField a);

void require_compatible(const MatrixField &a, const MatrixField &b, const char *op);

/// A = sum_i A_i dz^i, one matrix field per complex direction.
struct OneFormMatrixField {
  std::vector<MatrixField> components;

  int n() const noexcept { return static_cast<int>(components.size()); }
  const MatrixField &operator[](int i) const { return components.at(i); }
  MatrixField &operator[](int i) { return components.at(i); }
};

/// Pointwise matrix product A * B.
MatrixField product(const MatrixField &a, const MatrixField &b);
MatrixField product(const MatrixField &a, const MatrixField &b, const MatrixField &c);
/// Pointwise conjugate transpose.
MatrixField adjoint(const MatrixField &a);
/// (A + A^*) / 2 with the Hermitian flag set.
MatrixField hermitian_project(const MatrixField &a);
ScalarField trace(const MatrixField &a);

/// Pointwise smallest and largest eigenvalue of a Hermitian field.
std::pair<ScalarField, ScalarField> eigen_range(const MatrixField &a);
/// All eigenvalues in ascending order, r per point, point-major.
std::vector<double> eigenvalues(const MatrixField &a);

/// f applied to the eigenvalues, V f(Lambda) V^*. Requires a Hermitian field
/// whose eigenvalues are all > floor; throws PositivityError at the worst point.
MatrixField spectral_map(const MatrixField &a, const std::function<double(double)> &f,
                         double floor, const char *op);
MatrixField inverse(const MatrixField &a);
MatrixField sqrt(const MatrixField &a);
MatrixField inverse_sqrt(const MatrixField &a);
/// Matrix exponential of a Hermitian field (no positivity requirement).
MatrixField exp(const MatrixField &a);

/// Componentwise spectral derivative d/dz_i or d/dzbar_i (1-based i).
MatrixField derivative(const MatrixField &a, int i, DerivKind kind);
MatrixField laplacian(const MatrixField &a);
/// Componentwise mean-zero Poisson inverse (no solvability check).
MatrixField inverse_laplacian(const MatrixField &a);

/// Componentwise solve of (c - Delta_g) U = A, c > 0.
MatrixField shifted_laplacian_solve(const MatrixField &a, double c);

/// integrate(tr(A B^*)).
cplx inner(const MatrixField &a, const MatrixField &b);

} // namespace hym
