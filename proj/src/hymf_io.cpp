#include "hym/hymf_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "hym/errors.hpp"

namespace hym {

namespace {

constexpr char magic[4] = {'H', 'Y', 'M', 'F'};

template <class T> void put(std::ostream &os, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(buf, buf + sizeof(T));
  os.write(buf, sizeof(T));
}

template <class T> T get(std::istream &is, const std::string &path) {
  char buf[sizeof(T)];
  if (!is.read(buf, sizeof(T)))
    throw FormatError(path + ": truncated HYMF file");
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

std::ofstream open_out(const std::string &path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os)
    throw FormatError(path + ": cannot open for writing");
  return os;
}

void put_geometry(std::ostream &os, std::uint32_t version, const TorusGeometry &g, int r) {
  os.write(magic, 4);
  put<std::uint32_t>(os, version);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.n()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(r));
  for (auto d : g.dims())
    put<std::uint32_t>(os, static_cast<std::uint32_t>(d));
  for (auto L : g.periods())
    put<double>(os, L);
}

void put_samples(std::ostream &os, std::span<const cplx> data) {
  for (const auto &v : data) {
    put<double>(os, v.real());
    put<double>(os, v.imag());
  }
}

void finish(std::ofstream &os, const std::string &path) {
  os.flush();
  if (!os)
    throw FormatError(path + ": write failed");
}

HymfHeader get_header(std::istream &is, const std::string &path) {
  char m[4];
  if (!is.read(m, 4) || !std::equal(m, m + 4, magic))
    throw FormatError(path + ": not a HYMF file (bad magic)");
  HymfHeader h;
  h.version = get<std::uint32_t>(is, path);
  if (h.version != 1 && h.version != 2)
    throw FormatError(path + ": unsupported HYMF version " + std::to_string(h.version));
  h.n = get<std::uint32_t>(is, path);
  h.r = get<std::uint32_t>(is, path);
  if (h.n < 1 || h.n > 2)
    throw FormatError(path + ": complex dimension must be 1 or 2");
  if (h.r < 1 || h.r > static_cast<std::uint32_t>(max_rank))
    throw FormatError(path + ": rank out of range");
  for (std::uint32_t a = 0; a < 2 * h.n; ++a)
    h.dims.push_back(get<std::uint32_t>(is, path));
  for (std::uint32_t a = 0; a < 2 * h.n; ++a)
    h.periods.push_back(get<double>(is, path));
  if (h.version == 2) {
    const auto kind = get<std::uint32_t>(is, path);
    if (kind > 1)
      throw FormatError(path + ": unknown curvature kind");
    h.kind = kind == 0 ? CurvatureKind::bundle : CurvatureKind::kahler;
    h.ncomp = get<std::uint32_t>(is, path);
    if (h.ncomp != h.n * h.n * h.r * h.r)
      throw FormatError(path + ": component count does not match n and r");
  }
  return h;
}

GeometryPtr make_geometry(const HymfHeader &h, const std::string &path) {
  try {
    return std::make_shared<const TorusGeometry>(static_cast<int>(h.n), h.dims, h.periods);
  } catch (const ContractError &e) {
    throw FormatError(path + ": invalid geometry: " + e.what());
  }
}

std::vector<cplx> get_samples(std::istream &is, std::size_t count, const std::string &path) {
  std::vector<cplx> out(count);
  for (auto &v : out) {
    const double re = get<double>(is, path);
    const double im = get<double>(is, path);
    v = {re, im};
  }
  return out;
}

void expect_end(std::istream &is, const std::string &path) {
  if (is.peek() != std::char_traits<char>::eof())
    throw FormatError(path + ": trailing data after samples");
}

std::ifstream open_in(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw FormatError(path + ": cannot open for reading");
  return is;
}

} // namespace

void write_hymf(const std::string &path, const MatrixField &field) {
  auto os = open_out(path);
  put_geometry(os, 1, field.geom(), field.rank());
  put_samples(os, field.data());
  finish(os, path);
}

void write_hymf(const std::string &path, const ScalarField &field) {
  auto os = open_out(path);
  put_geometry(os, 1, field.geom(), 1);
  put_samples(os, field.values());
  finish(os, path);
}

void write_hymf(const std::string &path, const CurvatureField &field) {
  auto os = open_out(path);
  put_geometry(os, 2, *field.geometry, field.r);
  put<std::uint32_t>(os, field.kind == CurvatureKind::bundle ? 0u : 1u);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(field.components()));
  put_samples(os, field.data);
  if (field.kind == CurvatureKind::bundle) {
    const MatrixField h =
        field.h.rank() == 0 ? MatrixField::identity(field.geometry, field.r) : field.h;
    put_samples(os, h.data());
  }
  finish(os, path);
}

HymfHeader read_hymf_header(const std::string &path) {
  auto is = open_in(path);
  return get_header(is, path);
}

MatrixField read_matrix_field(const std::string &path) {
  auto is = open_in(path);
  const HymfHeader h = get_header(is, path);
  if (h.version != 1)
    throw FormatError(path + ": holds a curvature field, not a matrix field");
  auto g = make_geometry(h, path);
  auto data = get_samples(is, g->size() * h.r * h.r, path);
  expect_end(is, path);
  MatrixField out(g, static_cast<int>(h.r), std::move(data), false);
  if (out.hermitian_defect() == 0.0)
    out.mark_hermitian();
  return out;
}

ScalarField read_scalar_field(const std::string &path) {
  auto is = open_in(path);
  const HymfHeader h = get_header(is, path);
  if (h.version != 1 || h.r != 1)
    throw FormatError(path + ": does not hold a scalar field (rank " + std::to_string(h.r) + ")");
  auto g = make_geometry(h, path);
  auto data = get_samples(is, g->size(), path);
  expect_end(is, path);
  const bool real = std::all_of(data.begin(), data.end(), [](cplx v) { return v.imag() == 0.0; });
  return ScalarField(g, std::move(data), real);
}

CurvatureField read_curvature_field(const std::string &path) {
  auto is = open_in(path);
  const HymfHeader h = get_header(is, path);
  if (h.version != 2)
    throw FormatError(path + ": does not hold a curvature field");
  auto g = make_geometry(h, path);
  CurvatureField out;
  try {
    out = CurvatureField(h.kind, g, static_cast<int>(h.r));
  } catch (const ContractError &e) {
    throw FormatError(path + ": " + e.what());
  }
  out.data = get_samples(is, g->size() * h.ncomp, path);
  if (h.kind == CurvatureKind::bundle) {
    MatrixField m(g, static_cast<int>(h.r), get_samples(is, g->size() * h.r * h.r, path), false);
    if (m.hermitian_defect() == 0.0)
      m.mark_hermitian();
    out.h = std::move(m);
  }
  expect_end(is, path);
  return out;
}

} // namespace hym
