#pragma once

#include <cmath>
#include <functional>

#include "hym/matrix_field.hpp"

namespace hym {

/// Real part of the L2 pairing; the solvers work on real vector spaces of
/// real scalar fields or Hermitian matrix fields.
double real_dot(const ScalarField &a, const ScalarField &b);
double real_dot(const MatrixField &a, const MatrixField &b);

struct CgResult {
  int iterations = 0;
  double relative_residual = 1.0;
  bool converged = false;
  /// p^T A p <= 0 was met: the operator is not positive on the Krylov space.
  bool breakdown = false;
};

/// Preconditioned conjugate gradients for a self-adjoint positive operator.
/// Stops when |r| <= rtol |b| in the L2 pairing. x holds the initial guess
/// on entry and the iterate on exit.
template <class Vec>
CgResult pcg(const std::function<Vec(const Vec &)> &op, const std::function<Vec(const Vec &)> &precond,
             const Vec &b, Vec &x, double rtol, int max_iter) {
  CgResult res;
  const double bnorm = std::sqrt(real_dot(b, b));
  if (bnorm == 0.0) {
    x = 0.0 * b;
    res.converged = true;
    res.relative_residual = 0.0;
    return res;
  }
  Vec r = b - op(x);
  double rnorm = std::sqrt(real_dot(r, r));
  Vec z = precond(r);
  Vec p = z;
  double rz = real_dot(r, z);
  for (int it = 0; it < max_iter; ++it) {
    res.relative_residual = rnorm / bnorm;
    if (res.relative_residual <= rtol) {
      res.converged = true;
      return res;
    }
    const Vec ap = op(p);
    const double pap = real_dot(p, ap);
    if (!(pap > 0.0)) {
      res.breakdown = true;
      return res;
    }
    const double alpha = rz / pap;
    x = x + alpha * p;
    r = r - alpha * ap;
    rnorm = std::sqrt(real_dot(r, r));
    z = precond(r);
    const double rz_new = real_dot(r, z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
    res.iterations = it + 1;
  }
  res.relative_residual = rnorm / bnorm;
  res.converged = res.relative_residual <= rtol;
  return res;
}

} // namespace hym
