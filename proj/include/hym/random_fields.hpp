#pragma once

#include <cstdint>
#include <random>

#include "hym/matrix_field.hpp"

namespace hym {

using Rng = std::mt19937_64;

/// Random band-limited field with Fourier support |m_a| <= max_mode on every
/// axis, coefficients decaying like 1/(1+|m|^2), rescaled so that the sup
/// norm equals `amplitude`.
ScalarField random_smooth_scalar(const GeometryPtr &geometry, Rng &rng, int max_mode,
                                 double amplitude, bool real = true);

/// Same with the zero mode removed.
ScalarField random_mean_zero_scalar(const GeometryPtr &geometry, Rng &rng, int max_mode,
                                    double amplitude);

/// Hermitian band-limited matrix field, largest entry equal to `amplitude`.
MatrixField random_hermitian_field(const GeometryPtr &geometry, int r, Rng &rng, int max_mode,
                                   double amplitude);

/// General (non-Hermitian) band-limited matrix field.
MatrixField random_matrix_field(const GeometryPtr &geometry, int r, Rng &rng, int max_mode,
                                double amplitude);

/// exp(A) for a random Hermitian band-limited A with sup entry `amplitude`:
/// smooth and positive definite everywhere.
MatrixField random_positive_field(const GeometryPtr &geometry, int r, Rng &rng, int max_mode,
                                  double amplitude);

/// Random constant Hermitian matrix with entries of size ~1.
CMat random_hermitian_matrix(int r, Rng &rng);

} // namespace hym
