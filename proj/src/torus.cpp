#include "hym/torus.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <utility>

#include "hym/errors.hpp"

namespace hym {

namespace detail {

// FFTW plans keyed by (howmany, sign). Planning is serialized; execution goes
// through fftw_execute_dft on fftw_malloc'd buffers, which is thread-safe.
class FftCache {
public:
  FftCache(std::vector<int> dims) : dims_(std::move(dims)) {
    size_ = 1;
    for (int d : dims_)
      size_ *= static_cast<std::size_t>(d);
  }
  FftCache(const FftCache &) = delete;
  FftCache &operator=(const FftCache &) = delete;
  ~FftCache() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    for (auto &[key, plan] : plans_)
      fftw_destroy_plan(plan);
  }

  void execute(std::span<cplx> data, std::size_t howmany, int sign) {
    const std::size_t total = size_ * howmany;
    auto *buf = static_cast<fftw_complex *>(fftw_malloc(sizeof(fftw_complex) * total));
    if (buf == nullptr)
      throw std::bad_alloc();
    std::copy(data.begin(), data.end(), reinterpret_cast<cplx *>(buf));
    fftw_plan plan = get(howmany, sign);
    fftw_execute_dft(plan, buf, buf);
    std::copy(reinterpret_cast<cplx *>(buf), reinterpret_cast<cplx *>(buf) + total,
              data.begin());
    fftw_free(buf);
  }

private:
  static std::mutex &planner_mutex() {
    static std::mutex m;
    return m;
  }

  fftw_plan get(std::size_t howmany, int sign) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    auto key = std::make_pair(howmany, sign);
    if (auto it = plans_.find(key); it != plans_.end())
      return it->second;
    const std::size_t total = size_ * howmany;
    auto *tmp = static_cast<fftw_complex *>(fftw_malloc(sizeof(fftw_complex) * total));
    const int stride = static_cast<int>(howmany);
    fftw_plan plan =
        fftw_plan_many_dft(static_cast<int>(dims_.size()), dims_.data(), stride, tmp, nullptr,
                           stride, 1, tmp, nullptr, stride, 1, sign, FFTW_ESTIMATE);
    fftw_free(tmp);
    if (plan == nullptr)
      throw std::runtime_error("FFTW failed to create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

  std::vector<int> dims_;
  std::size_t size_ = 0;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

} // namespace detail

TorusGeometry::TorusGeometry(int n, std::vector<std::size_t> dims, std::vector<double> periods)
    : n_(n), dims_(std::move(dims)), periods_(std::move(periods)) {
  if (n_ != 1 && n_ != 2)
    throw ContractError("torus complex dimension must be 1 or 2, got " + std::to_string(n_));
  if (dims_.size() != static_cast<std::size_t>(2 * n_) ||
      periods_.size() != static_cast<std::size_t>(2 * n_))
    throw ShapeError("torus needs exactly 2n grid sizes and periods");
  for (std::size_t a = 0; a < dims_.size(); ++a) {
    if (dims_[a] < 8 || dims_[a] % 2 != 0)
      throw ContractError("grid size on every axis must be even and at least 8");
    if (!(periods_[a] > 0.0) || !std::isfinite(periods_[a]))
      throw ContractError("torus periods must be positive");
  }

  size_ = 1;
  double prod_l = 1.0;
  for (std::size_t a = 0; a < dims_.size(); ++a) {
    size_ *= dims_[a];
    prod_l *= periods_[a];
  }
  volume_ = std::ldexp(prod_l, n_);
  cell_weight_ = volume_ / static_cast<double>(size_);

  // Wavenumbers per axis. Odd-order derivatives drop the Nyquist mode so that
  // real fields stay real; the Laplacian keeps it so that it is invertible on
  // every non-constant mode.
  const int naxes = axes();
  std::vector<std::vector<double>> k_full(naxes), k_odd(naxes);
  for (int a = 0; a < naxes; ++a) {
    const std::size_t na = dims_[a];
    k_full[a].resize(na);
    k_odd[a].resize(na);
    for (std::size_t i = 0; i < na; ++i) {
      const long m = i < na / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(na);
      const double k = 2.0 * std::numbers::pi * static_cast<double>(m) / periods_[a];
      k_full[a][i] = k;
      k_odd[a][i] = (i == na / 2) ? 0.0 : k;
    }
  }

  auto dz = std::make_shared<std::vector<std::vector<cplx>>>(n_, std::vector<cplx>(size_));
  auto dzbar = std::make_shared<std::vector<std::vector<cplx>>>(n_, std::vector<cplx>(size_));
  auto lap = std::make_shared<std::vector<cplx>>(size_);
  auto lap_inv = std::make_shared<std::vector<cplx>>(size_);

  std::vector<std::size_t> idx(naxes, 0);
  for (std::size_t p = 0; p < size_; ++p) {
    double ksq = 0.0;
    for (int a = 0; a < naxes; ++a)
      ksq += k_full[a][idx[a]] * k_full[a][idx[a]];
    for (int k = 0; k < n_; ++k) {
      const double kx = k_odd[2 * k][idx[2 * k]];
      const double ky = k_odd[2 * k + 1][idx[2 * k + 1]];
      (*dz)[k][p] = 0.5 * cplx(ky, kx);
      (*dzbar)[k][p] = 0.5 * cplx(-ky, kx);
    }
    const double symbol = -0.25 * ksq;
    (*lap)[p] = symbol;
    (*lap_inv)[p] = (p == 0) ? 0.0 : 1.0 / symbol;

    for (int a = naxes - 1; a >= 0; --a) {
      if (++idx[a] < dims_[a])
        break;
      idx[a] = 0;
    }
  }
  dz_symbols_ = std::move(dz);
  dzbar_symbols_ = std::move(dzbar);
  laplacian_symbol_ = std::move(lap);
  inverse_laplacian_symbol_ = std::move(lap_inv);

  std::vector<int> idims(dims_.begin(), dims_.end());
  fft_ = std::make_shared<detail::FftCache>(std::move(idims));
}

std::shared_ptr<const TorusGeometry> TorusGeometry::make(int n, std::size_t points_per_axis,
                                                         double period) {
  return std::make_shared<const TorusGeometry>(
      n, std::vector<std::size_t>(2 * n, points_per_axis), std::vector<double>(2 * n, period));
}

bool TorusGeometry::same_grid(const TorusGeometry &other) const noexcept {
  return this == &other || (n_ == other.n_ && dims_ == other.dims_ && periods_ == other.periods_);
}

double TorusGeometry::coordinate(std::size_t point, int axis) const {
  std::size_t stride = 1;
  for (int a = axes() - 1; a > axis; --a)
    stride *= dims_[a];
  const std::size_t i = (point / stride) % dims_[axis];
  return periods_[axis] * static_cast<double>(i) / static_cast<double>(dims_[axis]);
}

std::vector<double> TorusGeometry::coordinates(std::size_t point) const {
  std::vector<double> x(axes());
  std::size_t rest = point;
  for (int a = axes() - 1; a >= 0; --a) {
    const std::size_t i = rest % dims_[a];
    rest /= dims_[a];
    x[a] = periods_[a] * static_cast<double>(i) / static_cast<double>(dims_[a]);
  }
  return x;
}

std::size_t TorusGeometry::point_index(std::span<const std::size_t> multi_index) const {
  if (multi_index.size() != dims_.size())
    throw IndexError("multi-index has wrong length");
  std::size_t p = 0;
  for (std::size_t a = 0; a < dims_.size(); ++a) {
    if (multi_index[a] >= dims_[a])
      throw IndexError("multi-index out of range");
    p = p * dims_[a] + multi_index[a];
  }
  return p;
}

long TorusGeometry::wave_index(std::size_t mode, int axis) const {
  std::size_t stride = 1;
  for (int a = axes() - 1; a > axis; --a)
    stride *= dims_[a];
  const std::size_t na = dims_[axis];
  const std::size_t i = (mode / stride) % na;
  return i < na / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(na);
}

const std::vector<cplx> &TorusGeometry::symbol(SpectralOp op, int k) const {
  switch (op) {
  case SpectralOp::dz:
  case SpectralOp::dzbar:
    if (k < 0 || k >= n_)
      throw IndexError("complex direction out of range");
    return op == SpectralOp::dz ? (*dz_symbols_)[k] : (*dzbar_symbols_)[k];
  case SpectralOp::laplacian:
    return *laplacian_symbol_;
  case SpectralOp::inverse_laplacian:
    return *inverse_laplacian_symbol_;
  }
  throw ContractError("unknown spectral operator");
}

void TorusGeometry::apply(SpectralOp op, int k, std::span<cplx> data, std::size_t howmany) const {
  if (data.size() != size_ * howmany)
    throw ShapeError("spectral operator applied to data of the wrong size");
  const auto &sym = symbol(op, k);
  fft_->execute(data, howmany, FFTW_FORWARD);
  const double scale = 1.0 / static_cast<double>(size_);
  for (std::size_t p = 0; p < size_; ++p) {
    const cplx s = sym[p] * scale;
    for (std::size_t c = 0; c < howmany; ++c)
      data[p * howmany + c] *= s;
  }
  fft_->execute(data, howmany, FFTW_BACKWARD);
}

void TorusGeometry::solve_shifted(std::span<cplx> data, double c, std::size_t howmany) const {
  if (!(c > 0.0))
    throw ContractError("shifted Laplacian solve needs a positive shift");
  if (data.size() != size_ * howmany)
    throw ShapeError("shifted solve applied to data of the wrong size");
  const auto &lap = *laplacian_symbol_;
  fft_->execute(data, howmany, FFTW_FORWARD);
  const double scale = 1.0 / static_cast<double>(size_);
  for (std::size_t p = 0; p < size_; ++p) {
    const double s = scale / (c - lap[p].real());
    for (std::size_t k = 0; k < howmany; ++k)
      data[p * howmany + k] *= s;
  }
  fft_->execute(data, howmany, FFTW_BACKWARD);
}

void TorusGeometry::forward(std::span<cplx> data, std::size_t howmany) const {
  if (data.size() != size_ * howmany)
    throw ShapeError("transform applied to data of the wrong size");
  fft_->execute(data, howmany, FFTW_FORWARD);
}

void TorusGeometry::backward(std::span<cplx> data, std::size_t howmany) const {
  if (data.size() != size_ * howmany)
    throw ShapeError("transform applied to data of the wrong size");
  fft_->execute(data, howmany, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(size_);
  for (auto &v : data)
    v *= scale;
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(GeometryPtr geometry, bool real)
    : geometry_(std::move(geometry)), real_(real) {
  if (!geometry_)
    throw ContractError("scalar field needs a geometry");
  values_.assign(geometry_->size(), cplx(0.0));
}

ScalarField::ScalarField(GeometryPtr geometry, std::vector<cplx> values, bool real)
    : geometry_(std::move(geometry)), values_(std::move(values)), real_(real) {
  if (!geometry_)
    throw ContractError("scalar field needs a geometry");
  if (values_.size() != geometry_->size())
    throw ShapeError("sample count does not match the grid");
  if (real_)
    make_real();
}

ScalarField ScalarField::constant(GeometryPtr geometry, cplx value) {
  const std::size_t n = geometry->size();
  return ScalarField(std::move(geometry), std::vector<cplx>(n, value), value.imag() == 0.0);
}

ScalarField ScalarField::from_function(GeometryPtr geometry,
                                       const std::function<cplx(std::span<const double>)> &f,
                                       bool real) {
  std::vector<cplx> v(geometry->size());
  for (std::size_t p = 0; p < v.size(); ++p) {
    const auto x = geometry->coordinates(p);
    v[p] = f(x);
  }
  return ScalarField(std::move(geometry), std::move(v), real);
}

ScalarField ScalarField::from_real_function(
    GeometryPtr geometry, const std::function<double(std::span<const double>)> &f) {
  return from_function(
      std::move(geometry), [&](std::span<const double> x) { return cplx(f(x), 0.0); }, true);
}

ScalarField ScalarField::real_part() const {
  ScalarField out = *this;
  return std::move(out.make_real());
}

ScalarField &ScalarField::make_real() {
  for (auto &v : values_)
    v = cplx(v.real(), 0.0);
  real_ = true;
  return *this;
}

ScalarField ScalarField::map(const std::function<cplx(cplx)> &f, bool real_result) const {
  ScalarField out = *this;
  for (auto &v : out.values_)
    v = f(v);
  out.real_ = false;
  if (real_result)
    out.make_real();
  return out;
}

ScalarField ScalarField::map_real(const std::function<double(double)> &f) const {
  ScalarField out = *this;
  for (auto &v : out.values_)
    v = cplx(f(v.real()), 0.0);
  out.real_ = true;
  return out;
}

void require_same_grid(const TorusGeometry &a, const TorusGeometry &b, const char *op) {
  if (!a.same_grid(b))
    throw ShapeError(std::string(op) + ": operands live on different grids");
}

ScalarField &ScalarField::operator+=(const ScalarField &other) {
  require_same_grid(*geometry_, *other.geometry_, "scalar +");
  for (std::size_t i = 0; i < values_.size(); ++i)
    values_[i] += other.values_[i];
  real_ = real_ && other.real_;
  return *this;
}

ScalarField &ScalarField::operator-=(const ScalarField &other) {
  require_same_grid(*geometry_, *other.geometry_, "scalar -");
  for (std::size_t i = 0; i < values_.size(); ++i)
    values_[i] -= other.values_[i];
  real_ = real_ && other.real_;
  return *this;
}

ScalarField &ScalarField::operator*=(const ScalarField &other) {
  require_same_grid(*geometry_, *other.geometry_, "scalar *");
  for (std::size_t i = 0; i < values_.size(); ++i)
    values_[i] *= other.values_[i];
  real_ = real_ && other.real_;
  return *this;
}

ScalarField &ScalarField::operator*=(double s) {
  for (auto &v : values_)
    v *= s;
  return *this;
}

ScalarField &ScalarField::operator+=(double c) {
  for (auto &v : values_)
    v += c;
  return *this;
}

double ScalarField::sup_norm() const {
  double m = 0.0;
  for (const auto &v : values_)
    m = std::max(m, std::abs(v));
  return m;
}

double ScalarField::min_real() const {
  double m = values_.empty() ? 0.0 : values_[0].real();
  for (const auto &v : values_)
    m = std::min(m, v.real());
  return m;
}

double ScalarField::max_real() const {
  double m = values_.empty() ? 0.0 : values_[0].real();
  for (const auto &v : values_)
    m = std::max(m, v.real());
  return m;
}

ScalarField operator+(ScalarField a, const ScalarField &b) { return std::move(a += b); }
ScalarField operator-(ScalarField a, const ScalarField &b) { return std::move(a -= b); }
ScalarField operator*(ScalarField a, const ScalarField &b) { return std::move(a *= b); }
ScalarField operator*(double s, ScalarField a) { return std::move(a *= s); }
ScalarField operator-(ScalarField a) { return std::move(a *= -1.0); }

ScalarField derivative(const ScalarField &field, int i, DerivKind kind) {
  const auto &g = field.geom();
  if (i < 1 || i > g.n())
    throw IndexError("derivative index " + std::to_string(i) + " outside 1.." +
                     std::to_string(g.n()));
  std::vector<cplx> v(field.values().begin(), field.values().end());
  g.apply(kind == DerivKind::holomorphic ? SpectralOp::dz : SpectralOp::dzbar, i - 1, v);
  return ScalarField(field.geometry(), std::move(v), false);
}

ScalarField laplacian(const ScalarField &field) {
  std::vector<cplx> v(field.values().begin(), field.values().end());
  field.geom().apply(SpectralOp::laplacian, 0, v);
  return ScalarField(field.geometry(), std::move(v), field.is_real());
}

ScalarField poisson_solve(const ScalarField &rhs, double tol_mean) {
  const cplx total = integrate(rhs);
  const double scale = rhs.sup_norm() * rhs.geom().volume();
  if (std::abs(total) > tol_mean * scale) {
    std::ostringstream os;
    os << "poisson_solve: right-hand side is not mean-zero (integral = " << total.real();
    if (total.imag() != 0.0)
      os << (total.imag() < 0 ? " - " : " + ") << std::abs(total.imag()) << "i";
    os << ")";
    throw SolvabilityError(os.str(), std::abs(total));
  }
  std::vector<cplx> v(rhs.values().begin(), rhs.values().end());
  rhs.geom().apply(SpectralOp::inverse_laplacian, 0, v);
  return ScalarField(rhs.geometry(), std::move(v), rhs.is_real());
}

ScalarField shifted_laplacian_solve(const ScalarField &rhs, double c) {
  std::vector<cplx> v(rhs.values().begin(), rhs.values().end());
  rhs.geom().solve_shifted(v, c);
  return ScalarField(rhs.geometry(), std::move(v), rhs.is_real());
}

cplx integrate(const ScalarField &field) {
  // Pairwise summation keeps the rounding error at O(log N) ulps.
  std::vector<cplx> buf(field.values().begin(), field.values().end());
  std::size_t len = buf.size();
  while (len > 1) {
    const std::size_t half = len / 2;
    for (std::size_t i = 0; i < half; ++i)
      buf[i] = buf[2 * i] + buf[2 * i + 1];
    if (len % 2 == 1)
      buf[half] = buf[len - 1];
    len = half + len % 2;
  }
  const cplx sum = buf.empty() ? cplx(0.0) : buf[0];
  return sum * (field.geom().volume() / static_cast<double>(field.geom().size()));
}

double integrate_real(const ScalarField &field) { return integrate(field).real(); }

} // namespace hym
