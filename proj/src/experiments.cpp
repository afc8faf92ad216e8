#include "hym/experiments.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "hym/errors.hpp"

namespace hym {

double torus_distance(const TorusGeometry &geom, std::size_t p, std::size_t q) {
  if (p >= geom.size() || q >= geom.size())
    throw IndexError("torus_distance: grid index out of range");
  double acc = 0.0;
  for (int a = 0; a < geom.axes(); ++a) {
    const double L = geom.periods()[a];
    double d = std::fmod(std::abs(geom.coordinate(p, a) - geom.coordinate(q, a)), L);
    d = std::min(d, L - d);
    acc += d * d;
  }
  return std::sqrt(acc);
}

ScalarField build_cusp_profile(const GeometryPtr &geometry, std::size_t p, double amplitude) {
  if (!(amplitude > 0.0))
    throw ContractError("build_cusp_profile: amplitude must be positive");
  if (p >= geometry->size())
    throw IndexError("build_cusp_profile: cusp point out of range");
  ScalarField f(geometry, true);
  for (std::size_t q = 0; q < geometry->size(); ++q) {
    if (q == p)
      continue;
    f[q] = amplitude * std::exp(-1.0 / torus_distance(*geometry, p, q));
  }
  return f;
}

double Q_of_t(const ScalarField &f, double t) {
  if (!(t > 0.0))
    throw std::domain_error("Q_of_t: t must be positive");
  ScalarField q = laplacian(f).real_part();
  for (std::size_t p = 0; p < q.size(); ++p)
    q[p] /= std::expm1(f.real_at(p) + t);
  return integrate_real(q);
}

namespace {

std::vector<std::pair<double, double>> sample_Q(const ScalarField &f, double lo, double hi, int count) {
  std::vector<std::pair<double, double>> out;
  for (int k = 0; k < count; ++k) {
    const double s = count > 1 ? static_cast<double>(k) / (count - 1) : 0.0;
    const double t = lo * std::pow(hi / lo, s);
    out.emplace_back(t, Q_of_t(f, t));
  }
  return out;
}

} // namespace

CounterexampleArtifacts counterexample_pipeline(const GeometryPtr &geometry,
                                                const CounterexampleOptions &opts) {
  if (!(opts.F0 > 0.0))
    throw ContractError("counterexample_pipeline: F0 must be positive");
  if (!(opts.t_lo > 0.0) || !(opts.t_hi > opts.t_lo))
    throw ContractError("counterexample_pipeline: need 0 < t_lo < t_hi");
  CounterexampleArtifacts out;
  out.target = opts.F0 * geometry->volume();
  out.amplitude = opts.amplitude;

  double q_lo = 0.0, q_hi = 0.0;
  for (;; ++out.rescales) {
    out.f = build_cusp_profile(geometry, opts.point, out.amplitude);
    q_lo = Q_of_t(out.f, opts.t_lo);
    q_hi = Q_of_t(out.f, opts.t_hi);
    if (q_lo > out.target && q_hi < out.target)
      break;
    if (out.rescales == opts.max_rescales) {
      std::ostringstream os;
      os << std::setprecision(10) << "no bracket for Q(t) = " << out.target << " on [" << opts.t_lo
         << ", " << opts.t_hi << "] after " << out.rescales << " amplitude doublings (amplitude "
         << out.amplitude << "); Q samples:";
      for (auto [t, q] : sample_Q(out.f, opts.t_lo, opts.t_hi, 16))
        os << " (" << t << ", " << q << ")";
      throw BracketError(os.str());
    }
    out.amplitude *= 2.0;
  }

  // Q decreases in t and varies on a logarithmic scale, so bisect in log t.
  double lo = opts.t_lo, hi = opts.t_hi;
  double t = std::sqrt(lo * hi), q = 0.0;
  for (int it = 0; it < 200; ++it) {
    t = std::sqrt(lo * hi);
    q = Q_of_t(out.f, t);
    if (std::abs(q - out.target) <= opts.tol_bisect * out.target || hi / lo - 1.0 < 1e-15)
      break;
    (q > out.target ? lo : hi) = t;
  }
  out.t0 = t;
  out.Q_t0 = q;
  out.Q_samples = sample_Q(out.f, opts.t_lo, opts.t_hi, opts.q_samples);

  out.shift = out.f;
  out.shift += t;
  ScalarField ratio = laplacian(out.shift).real_part();
  for (std::size_t p = 0; p < ratio.size(); ++p)
    ratio[p] /= std::expm1(out.shift.real_at(p));
  ScalarField rhs = ScalarField::constant(geometry, opts.F0) - ratio;
  rhs.make_real();
  out.psi = poisson_solve(rhs).real_part();
  out.G = ratio;
  for (std::size_t p = 0; p < out.G.size(); ++p)
    out.G[p] *= std::exp(out.psi.real_at(p));
  out.phi1 = -out.psi;
  out.phi2 = out.shift - out.psi;
  out.phi1.make_real();
  out.phi2.make_real();
  out.residual1 = (scalar_line_curvature(out.phi1, opts.F0).G - out.G).sup_norm();
  out.residual2 = (scalar_line_curvature(out.phi2, opts.F0).G - out.G).sup_norm();
  return out;
}

std::string q_samples_csv(const CounterexampleArtifacts &a) {
  std::ostringstream os;
  os << std::setprecision(17) << "t,Q\n";
  for (auto [t, q] : a.Q_samples)
    os << t << ',' << q << '\n';
  return os.str();
}

NonexistenceReport nonexistence_demo(const ScalarField &G, const NonexistenceOptions &opts) {
  if (!G.is_real())
    throw ContractError("nonexistence_demo: G must be real");
  NonexistenceReport rep;
  rep.integral = integrate_real(G);
  const double scale = integrate_real(G.map_real([](double v) { return std::abs(v); }));
  rep.obstruction = rep.integral < -1e-12 * std::max(1.0, scale);
  std::ostringstream os;
  os << std::setprecision(12) << "integral of G = " << rep.integral << "; ";
  if (rep.obstruction)
    os << "obstruction: any solution phi of e^{-phi} Delta_g phi = G would give integral of G = "
          "integral of e^{-phi} |d phi|^2 >= 0, so no solution exists";
  else
    os << "no obstruction from the integral; existence is not claimed either way";
  rep.verdict = os.str();

  if (opts.run_solver) {
    SolveOptions so = opts.solver;
    so.check_contracts = false;
    rep.solve = solve_kazdan_warner(G, 0.0, so).second;
    rep.solver_ran = true;
  }
  return rep;
}

} // namespace hym
