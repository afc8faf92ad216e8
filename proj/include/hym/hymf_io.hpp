#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hym/curvature.hpp"

namespace hym {

// Binary grid files. Layout, all little-endian:
//   "HYMF" | version u32 | n u32 | r u32 | dims 2n x u32 | periods 2n x f64
//   version 2 only: kind u32 (0 bundle, 1 kahler) | ncomp u32
//   samples: point-major complex f64 pairs, r*r per point (version 1) or
//   ncomp per point (version 2), followed for bundle curvature by the fiber
//   metric h as r*r samples per point.
// A scalar field is stored as version 1 with r = 1.

struct HymfHeader {
  std::uint32_t version = 1;
  std::uint32_t n = 0;
  std::uint32_t r = 0;
  std::vector<std::size_t> dims;
  std::vector<double> periods;
  CurvatureKind kind = CurvatureKind::bundle; ///< version 2 only
  std::uint32_t ncomp = 0;                    ///< version 2 only
};

void write_hymf(const std::string &path, const MatrixField &field);
void write_hymf(const std::string &path, const ScalarField &field);
void write_hymf(const std::string &path, const CurvatureField &field);

/// All readers throw FormatError on a missing file, bad magic, unsupported
/// version, inconsistent header or truncated data.
HymfHeader read_hymf_header(const std::string &path);
/// The Hermitian flag is set when the stored samples are exactly Hermitian.
MatrixField read_matrix_field(const std::string &path);
/// Marked real when every stored imaginary part is zero.
ScalarField read_scalar_field(const std::string &path);
CurvatureField read_curvature_field(const std::string &path);

} // namespace hym
