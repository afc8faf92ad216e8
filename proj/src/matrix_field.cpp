#include "hym/matrix_field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hym/errors.hpp"

namespace hym {

namespace {

using EigenSolver = Eigen::SelfAdjointEigenSolver<CMat>;

void check_rank(int r) {
  if (r < 1 || r > max_rank)
    throw ContractError("matrix rank must be between 1 and " + std::to_string(max_rank));
}

void require_hermitian(const MatrixField &a, const char *op) {
  if (!a.is_hermitian())
    throw ContractError(std::string(op) + ": input is not flagged Hermitian");
}

} // namespace

MatrixField::MatrixField(GeometryPtr geometry, int r) : geometry_(std::move(geometry)), r_(r) {
  if (!geometry_)
    throw ContractError("matrix field needs a geometry");
  check_rank(r_);
  data_.assign(geometry_->size() * stride(), cplx(0.0));
  hermitian_ = true;
}

MatrixField::MatrixField(GeometryPtr geometry, int r, std::vector<cplx> data, bool hermitian)
    : geometry_(std::move(geometry)), r_(r), data_(std::move(data)) {
  if (!geometry_)
    throw ContractError("matrix field needs a geometry");
  check_rank(r_);
  if (data_.size() != geometry_->size() * stride())
    throw ShapeError("matrix field sample count does not match grid and rank");
  if (hermitian)
    mark_hermitian();
}

MatrixField MatrixField::identity(GeometryPtr geometry, int r, double scale) {
  MatrixField out(std::move(geometry), r);
  for (std::size_t p = 0; p < out.points(); ++p)
    for (int a = 0; a < r; ++a)
      out.data_[p * out.stride() + a * r + a] = scale;
  return out;
}

MatrixField MatrixField::constant(GeometryPtr geometry, const CMat &value) {
  if (value.rows() != value.cols())
    throw ShapeError("constant matrix must be square");
  const int r = static_cast<int>(value.rows());
  MatrixField out(std::move(geometry), r);
  for (std::size_t p = 0; p < out.points(); ++p)
    out.at(p) = value;
  out.hermitian_ = false;
  if ((value - value.adjoint()).cwiseAbs().maxCoeff() == 0.0)
    out.hermitian_ = true;
  return out;
}

MatrixField MatrixField::scalar_identity(const ScalarField &f, int r) {
  MatrixField out(f.geometry(), r);
  for (std::size_t p = 0; p < out.points(); ++p)
    for (int a = 0; a < r; ++a)
      out.data_[p * out.stride() + a * r + a] = f[p];
  out.hermitian_ = f.is_real();
  return out;
}

MatrixField MatrixField::from_function(GeometryPtr geometry, int r,
                                       const std::function<CMat(std::span<const double>)> &f) {
  MatrixField out(geometry, r);
  out.hermitian_ = false;
  for (std::size_t p = 0; p < out.points(); ++p) {
    const auto x = geometry->coordinates(p);
    const CMat v = f(x);
    if (v.rows() != r || v.cols() != r)
      throw ShapeError("from_function: callback returned a matrix of the wrong size");
    out.at(p) = v;
  }
  return out;
}

ScalarField MatrixField::component(int a, int b) const {
  if (a < 0 || a >= r_ || b < 0 || b >= r_)
    throw IndexError("matrix component out of range");
  std::vector<cplx> v(points());
  for (std::size_t p = 0; p < v.size(); ++p)
    v[p] = data_[p * stride() + a * r_ + b];
  return ScalarField(geometry_, std::move(v), false);
}

void MatrixField::set_component(int a, int b, const ScalarField &f) {
  if (a < 0 || a >= r_ || b < 0 || b >= r_)
    throw IndexError("matrix component out of range");
  require_same_grid(*geometry_, f.geom(), "set_component");
  for (std::size_t p = 0; p < points(); ++p)
    data_[p * stride() + a * r_ + b] = f[p];
  hermitian_ = false;
}

double MatrixField::hermitian_defect() const {
  double d = 0.0;
  for (std::size_t p = 0; p < points(); ++p) {
    const cplx *m = data_.data() + p * stride();
    for (int a = 0; a < r_; ++a)
      for (int b = a; b < r_; ++b)
        d = std::max(d, std::abs(m[a * r_ + b] - std::conj(m[b * r_ + a])));
  }
  return d;
}

MatrixField &MatrixField::mark_hermitian() {
  const double defect = hermitian_defect();
  const double scale = sup_norm();
  if (defect > 1e-12 * scale) {
    std::ostringstream os;
    os << "matrix field is not Hermitian (defect " << defect << ", scale " << scale << ")";
    throw ContractError(os.str());
  }
  hermitian_ = true;
  return *this;
}

void require_compatible(const MatrixField &a, const MatrixField &b, const char *op) {
  if (!a.geometry() || !b.geometry())
    throw ContractError(std::string(op) + ": empty matrix field");
  require_same_grid(a.geom(), b.geom(), op);
  if (a.rank() != b.rank())
    throw ShapeError(std::string(op) + ": rank mismatch");
}

MatrixField &MatrixField::operator+=(const MatrixField &other) {
  require_compatible(*this, other, "matrix +");
  for (std::size_t i = 0; i < data_.size(); ++i)
    data_[i] += other.data_[i];
  hermitian_ = hermitian_ && other.hermitian_;
  return *this;
}

MatrixField &MatrixField::operator-=(const MatrixField &other) {
  require_compatible(*this, other, "matrix -");
  for (std::size_t i = 0; i < data_.size(); ++i)
    data_[i] -= other.data_[i];
  hermitian_ = hermitian_ && other.hermitian_;
  return *this;
}

MatrixField &MatrixField::operator*=(double s) {
  for (auto &v : data_)
    v *= s;
  return *this;
}

MatrixField &MatrixField::operator*=(const ScalarField &f) {
  require_same_grid(*geometry_, f.geom(), "matrix * scalar");
  const std::size_t s = stride();
  for (std::size_t p = 0; p < points(); ++p)
    for (std::size_t c = 0; c < s; ++c)
      data_[p * s + c] *= f[p];
  hermitian_ = hermitian_ && f.is_real();
  return *this;
}

double MatrixField::sup_norm() const {
  double m = 0.0;
  for (const auto &v : data_)
    m = std::max(m, std::abs(v));
  return m;
}

double MatrixField::l2_norm() const { return std::sqrt(std::max(0.0, inner(*this, *this).real())); }

MatrixField operator+(MatrixField a, const MatrixField &b) { return std::move(a += b); }
MatrixField operator-(MatrixField a, const MatrixField &b) { return std::move(a -= b); }
MatrixField operator*(double s, MatrixField a) { return std::move(a *= s); }
MatrixField operator*(const ScalarField &f, MatrixField a) { return std::move(a *= f); }

MatrixField product(const MatrixField &a, const MatrixField &b) {
  require_compatible(a, b, "product");
  MatrixField out(a.geometry(), a.rank());
  for (std::size_t p = 0; p < a.points(); ++p)
    out.at(p).noalias() = a.at(p) * b.at(p);
  out.clear_hermitian();
  return out;
}

MatrixField product(const MatrixField &a, const MatrixField &b, const MatrixField &c) {
  require_compatible(a, b, "product");
  require_compatible(a, c, "product");
  MatrixField out(a.geometry(), a.rank());
  for (std::size_t p = 0; p < a.points(); ++p)
    out.at(p).noalias() = a.at(p) * b.at(p) * c.at(p);
  out.clear_hermitian();
  return out;
}

MatrixField adjoint(const MatrixField &a) {
  MatrixField out(a.geometry(), a.rank());
  for (std::size_t p = 0; p < a.points(); ++p)
    out.at(p) = a.at(p).adjoint();
  out.clear_hermitian();
  if (a.is_hermitian())
    out.mark_hermitian();
  return out;
}

MatrixField hermitian_project(const MatrixField &a) {
  MatrixField out(a.geometry(), a.rank());
  const int r = a.rank();
  for (std::size_t p = 0; p < a.points(); ++p) {
    auto m = a.at(p);
    auto o = out.at(p);
    for (int i = 0; i < r; ++i) {
      o(i, i) = cplx(m(i, i).real(), 0.0);
      for (int j = i + 1; j < r; ++j) {
        const cplx v = 0.5 * (m(i, j) + std::conj(m(j, i)));
        o(i, j) = v;
        o(j, i) = std::conj(v);
      }
    }
  }
  return out; // constructed zero field carries the flag; entries are exactly Hermitian
}

ScalarField trace(const MatrixField &a) {
  std::vector<cplx> v(a.points());
  for (std::size_t p = 0; p < v.size(); ++p)
    v[p] = a.at(p).trace();
  ScalarField out(a.geometry(), std::move(v), false);
  if (a.is_hermitian())
    out.make_real();
  return out;
}

std::pair<ScalarField, ScalarField> eigen_range(const MatrixField &a) {
  require_hermitian(a, "eigen_range");
  ScalarField lo(a.geometry(), true), hi(a.geometry(), true);
  EigenSolver es(a.rank());
  for (std::size_t p = 0; p < a.points(); ++p) {
    es.compute(CMat(a.at(p)), Eigen::EigenvaluesOnly);
    lo[p] = es.eigenvalues()(0);
    hi[p] = es.eigenvalues()(a.rank() - 1);
  }
  return {std::move(lo), std::move(hi)};
}

std::vector<double> eigenvalues(const MatrixField &a) {
  require_hermitian(a, "eigenvalues");
  const int r = a.rank();
  std::vector<double> out(a.points() * r);
  EigenSolver es(r);
  for (std::size_t p = 0; p < a.points(); ++p) {
    es.compute(CMat(a.at(p)), Eigen::EigenvaluesOnly);
    for (int k = 0; k < r; ++k)
      out[p * r + k] = es.eigenvalues()(k);
  }
  return out;
}

MatrixField spectral_map(const MatrixField &a, const std::function<double(double)> &f,
                         double floor, const char *op) {
  require_hermitian(a, op);
  const int r = a.rank();
  MatrixField out(a.geometry(), r);
  EigenSolver es(r);
  double worst = std::numeric_limits<double>::infinity();
  std::size_t worst_point = 0;
  for (std::size_t p = 0; p < a.points(); ++p) {
    es.compute(CMat(a.at(p)), Eigen::ComputeEigenvectors);
    const auto &lam = es.eigenvalues();
    if (lam(0) < worst) {
      worst = lam(0);
      worst_point = p;
    }
    if (!(lam(0) > floor))
      continue;
    const auto &v = es.eigenvectors();
    CMat fv = v;
    for (int k = 0; k < r; ++k)
      fv.col(k) *= f(lam(k));
    out.at(p).noalias() = fv * v.adjoint();
  }
  if (!(worst > floor)) {
    std::ostringstream os;
    os << op << ": field is not positive definite; smallest eigenvalue " << worst
       << " at grid point " << worst_point;
    throw PositivityError(os.str(), worst_point, worst);
  }
  return hermitian_project(out);
}

MatrixField inverse(const MatrixField &a) {
  return spectral_map(a, [](double x) { return 1.0 / x; }, 0.0, "inverse");
}

MatrixField sqrt(const MatrixField &a) {
  return spectral_map(a, [](double x) { return std::sqrt(x); }, 0.0, "sqrt");
}

MatrixField inverse_sqrt(const MatrixField &a) {
  return spectral_map(a, [](double x) { return 1.0 / std::sqrt(x); }, 0.0, "inverse_sqrt");
}

MatrixField exp(const MatrixField &a) {
  return spectral_map(a, [](double x) { return std::exp(x); },
                      -std::numeric_limits<double>::infinity(), "exp");
}

MatrixField derivative(const MatrixField &a, int i, DerivKind kind) {
  const auto &g = a.geom();
  if (i < 1 || i > g.n())
    throw IndexError("derivative index " + std::to_string(i) + " outside 1.." +
                     std::to_string(g.n()));
  std::vector<cplx> v(a.data().begin(), a.data().end());
  g.apply(kind == DerivKind::holomorphic ? SpectralOp::dz : SpectralOp::dzbar, i - 1, v,
          a.stride());
  return MatrixField(a.geometry(), a.rank(), std::move(v), false);
}

MatrixField laplacian(const MatrixField &a) {
  std::vector<cplx> v(a.data().begin(), a.data().end());
  a.geom().apply(SpectralOp::laplacian, 0, v, a.stride());
  MatrixField out(a.geometry(), a.rank(), std::move(v), false);
  return a.is_hermitian() ? hermitian_project(out) : out;
}

MatrixField inverse_laplacian(const MatrixField &a) {
  std::vector<cplx> v(a.data().begin(), a.data().end());
  a.geom().apply(SpectralOp::inverse_laplacian, 0, v, a.stride());
  MatrixField out(a.geometry(), a.rank(), std::move(v), false);
  return a.is_hermitian() ? hermitian_project(out) : out;
}

MatrixField shifted_laplacian_solve(const MatrixField &a, double c) {
  std::vector<cplx> v(a.data().begin(), a.data().end());
  a.geom().solve_shifted(v, c, a.stride());
  MatrixField out(a.geometry(), a.rank(), std::move(v), false);
  return a.is_hermitian() ? hermitian_project(out) : out;
}

cplx inner(const MatrixField &a, const MatrixField &b) {
  require_compatible(a, b, "inner");
  std::vector<cplx> v(a.points());
  const std::size_t s = a.stride();
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t p = 0; p < v.size(); ++p) {
    cplx acc = 0.0;
    for (std::size_t c = 0; c < s; ++c)
      acc += da[p * s + c] * std::conj(db[p * s + c]);
    v[p] = acc;
  }
  return integrate(ScalarField(a.geometry(), std::move(v), false));
}

} // namespace hym
