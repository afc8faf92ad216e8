#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace hym {

using cplx = std::complex<double>;

namespace detail {
class FftCache;
}

/// Spectral multipliers available on a torus grid.
enum class SpectralOp {
  dz,        ///< holomorphic derivative d/dz_k = (d/dx_k - i d/dy_k) / 2
  dzbar,     ///< antiholomorphic derivative d/dzbar_k = (d/dx_k + i d/dy_k) / 2
  laplacian, ///< Delta_g = sum_k d/dz_k d/dzbar_k
  inverse_laplacian, ///< pseudo-inverse of Delta_g, zero mode mapped to zero
};

enum class DerivKind { holomorphic, antiholomorphic };

/// Flat torus T^{2n} = prod_k [0, L_k) with the metric g_{i jbar} = delta_{ij}.
///
/// Real axes are ordered (x_1, y_1, ..., x_n, y_n); samples are stored
/// row-major with the last axis varying fastest. The Kähler form is
/// omega = i sum dz^k ^ dzbar^k, so omega^n / n! = 2^n dx_1 dy_1 ... and the
/// total volume is 2^n prod L_k.
///
/// Copies share the FFT plan cache; all members are immutable after
/// construction, so a geometry may be used from several threads.
class TorusGeometry {
public:
  TorusGeometry(int n, std::vector<std::size_t> dims, std::vector<double> periods);

  /// Square grid with `points_per_axis` samples and edge length `period` on every axis.
  static std::shared_ptr<const TorusGeometry> make(int n, std::size_t points_per_axis,
                                                   double period = 1.0);

  int n() const noexcept { return n_; }
  int axes() const noexcept { return 2 * n_; }
  const std::vector<std::size_t> &dims() const noexcept { return dims_; }
  const std::vector<double> &periods() const noexcept { return periods_; }
  std::size_t size() const noexcept { return size_; }

  /// Total volume of omega^n / n!.
  double volume() const noexcept { return volume_; }
  /// Quadrature weight of one grid cell; size() * cell_weight() == volume().
  double cell_weight() const noexcept { return cell_weight_; }

  bool same_grid(const TorusGeometry &other) const noexcept;

  double coordinate(std::size_t point, int axis) const;
  std::vector<double> coordinates(std::size_t point) const;
  std::size_t point_index(std::span<const std::size_t> multi_index) const;

  /// Apply a spectral multiplier in place to `howmany` interleaved fields:
  /// component c of grid point p lives at data[p * howmany + c]. `k` is the
  /// zero-based complex direction for dz / dzbar and ignored otherwise.
  void apply(SpectralOp op, int k, std::span<cplx> data, std::size_t howmany = 1) const;

  /// Solve (c - Delta_g) u = data in place for c > 0.
  void solve_shifted(std::span<cplx> data, double c, std::size_t howmany = 1) const;

  /// Forward DFT (unnormalized) of `howmany` interleaved fields, in place.
  void forward(std::span<cplx> data, std::size_t howmany = 1) const;
  /// Inverse DFT including the 1/size() normalization, in place.
  void backward(std::span<cplx> data, std::size_t howmany = 1) const;

  /// Signed integer wavenumber index of Fourier mode `mode` along `axis`.
  long wave_index(std::size_t mode, int axis) const;

private:
  const std::vector<cplx> &symbol(SpectralOp op, int k) const;

  int n_;
  std::vector<std::size_t> dims_;
  std::vector<double> periods_;
  std::size_t size_ = 0;
  double volume_ = 0.0;
  double cell_weight_ = 0.0;

  std::shared_ptr<const std::vector<std::vector<cplx>>> dz_symbols_;
  std::shared_ptr<const std::vector<std::vector<cplx>>> dzbar_symbols_;
  std::shared_ptr<const std::vector<cplx>> laplacian_symbol_;
  std::shared_ptr<const std::vector<cplx>> inverse_laplacian_symbol_;
  std::shared_ptr<detail::FftCache> fft_;
};

using GeometryPtr = std::shared_ptr<const TorusGeometry>;

/// Complex samples of a function on the full grid. `is_real()` asserts the
/// imaginary parts are identically zero.
class ScalarField {
public:
  ScalarField() = default;
  explicit ScalarField(GeometryPtr geometry, bool real = false);
  ScalarField(GeometryPtr geometry, std::vector<cplx> values, bool real = false);

  static ScalarField constant(GeometryPtr geometry, cplx value);
  static ScalarField from_function(GeometryPtr geometry,
                                   const std::function<cplx(std::span<const double>)> &f,
                                   bool real = false);
  static ScalarField from_real_function(GeometryPtr geometry,
                                        const std::function<double(std::span<const double>)> &f);

  const GeometryPtr &geometry() const noexcept { return geometry_; }
  const TorusGeometry &geom() const { return *geometry_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool is_real() const noexcept { return real_; }

  std::span<const cplx> values() const noexcept { return values_; }
  std::span<cplx> values() noexcept { return values_; }
  cplx operator[](std::size_t i) const { return values_[i]; }
  cplx &operator[](std::size_t i) { return values_[i]; }

  double real_at(std::size_t i) const { return values_[i].real(); }

  /// Drop imaginary parts and mark real.
  ScalarField real_part() const;
  /// Mark real after zeroing imaginary parts (for fields known to be real).
  ScalarField &make_real();

  ScalarField map(const std::function<cplx(cplx)> &f, bool real_result) const;
  ScalarField map_real(const std::function<double(double)> &f) const;

  ScalarField &operator+=(const ScalarField &other);
  ScalarField &operator-=(const ScalarField &other);
  ScalarField &operator*=(const ScalarField &other);
  ScalarField &operator*=(double s);
  ScalarField &operator+=(double c);

  double sup_norm() const;
  double min_real() const;
  double max_real() const;

private:
  GeometryPtr geometry_;
  std::vector<cplx> values_;
  bool real_ = false;
};

ScalarField operator+(ScalarField a, const ScalarField &b);
ScalarField operator-(ScalarField a, const ScalarField &b);
ScalarField operator*(ScalarField a, const ScalarField &b);
ScalarField operator*(double s, ScalarField a);
ScalarField operator-(ScalarField a);

void require_same_grid(const TorusGeometry &a, const TorusGeometry &b, const char *op);

/// d/dz_i or d/dzbar_i with 1-based complex index i (spectral, exact on band-limited fields).
ScalarField derivative(const ScalarField &field, int i, DerivKind kind);

/// Delta_g f = g^{i jbar} d_i dbar_j f = (1/4) sum_k (d^2/dx_k^2 + d^2/dy_k^2) f.
ScalarField laplacian(const ScalarField &field);

/// Mean-zero solution u of Delta_g u = rhs. Throws SolvabilityError when
/// |integrate(rhs)| > tol_mean * sup|rhs| * volume.
ScalarField poisson_solve(const ScalarField &rhs, double tol_mean = 1e-8);

/// u with (c - Delta_g) u = rhs, c > 0.
ScalarField shifted_laplacian_solve(const ScalarField &rhs, double c);

/// Integral against omega^n / n! by the periodic rectangle rule.
cplx integrate(const ScalarField &field);
double integrate_real(const ScalarField &field);

} // namespace hym
