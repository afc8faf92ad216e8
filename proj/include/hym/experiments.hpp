#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hym/solver.hpp"

namespace hym {

/// Flat distance between grid points p and q, minimized over lattice translates.
double torus_distance(const TorusGeometry &geom, std::size_t p, std::size_t q);

/// f(q) = amplitude * exp(-1 / d(p, q)) for q != p, f(p) = 0.
ScalarField build_cusp_profile(const GeometryPtr &geometry, std::size_t p, double amplitude);

/// integrate(Delta_g f / (e^{f + t} - 1)); throws std::domain_error for t <= 0.
double Q_of_t(const ScalarField &f, double t);

struct CounterexampleOptions {
  double F0 = 1.0;
  double amplitude = 1.0;
  std::size_t point = 0;     ///< grid index of the cusp point
  double t_lo = 1e-3;
  double t_hi = 20.0;
  int max_rescales = 20;     ///< amplitude doublings allowed to find a bracket
  double tol_bisect = 1e-12; ///< |Q(t0) - F0 vol| <= tol_bisect * F0 vol
  int q_samples = 64;        ///< log-spaced samples of Q written to the CSV
};

struct CounterexampleArtifacts {
  ScalarField f;
  double amplitude = 0.0; ///< amplitude actually used
  int rescales = 0;       ///< doublings applied to reach a bracket
  double target = 0.0;    ///< F0 * volume
  double t0 = 0.0;
  double Q_t0 = 0.0;
  std::vector<std::pair<double, double>> Q_samples;
  ScalarField shift; ///< f + t0
  ScalarField psi;
  ScalarField G;
  ScalarField phi1; ///< -psi
  ScalarField phi2; ///< shift - psi
  double residual1 = 0.0;
  double residual2 = 0.0;
};

/// Builds a sign-changing G on T^2 for which e^{-phi}(F0 + Delta_g phi) = G
/// has the two solutions phi1 and phi2. Throws BracketError (with the sampled
/// Q curve in the message) when no amplitude gives a bracket.
CounterexampleArtifacts counterexample_pipeline(const GeometryPtr &geometry,
                                                const CounterexampleOptions &opts = {});

std::string q_samples_csv(const CounterexampleArtifacts &a);

struct NonexistenceOptions {
  bool run_solver = false;
  SolveOptions solver; ///< check_contracts is forced off for the run
};

struct NonexistenceReport {
  double integral = 0.0;
  bool obstruction = false; ///< integral < 0: no solution can exist
  std::string verdict;
  bool solver_ran = false;
  SolveReport solve;
};

/// Trivial line bundle (F0 = 0): e^{-phi} Delta_g phi = G forces integrate(G) >= 0.
NonexistenceReport nonexistence_demo(const ScalarField &G, const NonexistenceOptions &opts = {});

} // namespace hym
