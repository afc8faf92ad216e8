#include "hym/krylov.hpp"

namespace hym {

double real_dot(const ScalarField &a, const ScalarField &b) {
  ScalarField prod = a;
  for (std::size_t i = 0; i < prod.size(); ++i)
    prod[i] *= std::conj(b[i]);
  return integrate_real(prod);
}

double real_dot(const MatrixField &a, const MatrixField &b) { return inner(a, b).real(); }

} // namespace hym
