#include "hym/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hym/errors.hpp"
#include "hym/krylov.hpp"

namespace hym {

void SolveOptions::validate() const {
  if (!(tol_residual > 0.0) || !(stage_tol > 0.0) || !(forcing_max > 0.0))
    throw ContractError("solver tolerances must be positive");
  if (max_newton < 1 || continuation_steps < 1 || max_linear_iterations < 1 || max_picard < 0 ||
      max_stage_halvings < 0)
    throw ContractError("solver iteration limits must be at least 1");
  if (!(min_damping > 0.0) || !(initial_damping >= min_damping) || initial_damping > 1.0)
    throw ContractError("damping must satisfy 0 < min_damping <= initial_damping <= 1");
  if (!(positivity_floor > 0.0))
    throw ContractError("positivity floor must be positive");
}

const char *to_string(SolveStatus s) {
  switch (s) {
  case SolveStatus::converged:
    return "converged";
  case SolveStatus::obstruction:
    return "obstruction";
  case SolveStatus::max_iter:
    return "max_iter";
  case SolveStatus::positivity_breakdown:
    return "positivity_breakdown";
  }
  return "unknown";
}

namespace {

enum class StageOutcome { converged, stalled, positivity };

double mean(const ScalarField &f) { return integrate_real(f) / f.geom().volume(); }

// ---------------------------------------------------------------------------
// Matrix problem

struct MatrixState {
  MatrixField H;
  MatrixField phi; // hym_endomorphism(H)
};

IterateDiagnostics matrix_diagnostics(const MatrixField &H, double t, double residual,
                                      int linear_iterations, double damping) {
  IterateDiagnostics d;
  d.t = t;
  d.residual = residual;
  d.sup_trace = trace(H).max_real();
  const MatrixField Hinv = inverse(H);
  ScalarField torsion(H.geometry(), true);
  for (int k = 1; k <= H.geom().n(); ++k) {
    const MatrixField dH = derivative(H, k, DerivKind::holomorphic);
    torsion += trace(hermitian_project(product(product(dH, Hinv), adjoint(dH), Hinv))).real_part();
  }
  d.sup_torsion = torsion.max_real();
  auto [lo, hi] = eigen_range(H);
  d.lambda_min = lo.min_real();
  d.lambda_max = hi.max_real();
  d.linear_iterations = linear_iterations;
  d.damping = damping;
  return d;
}

double min_eigenvalue(const MatrixField &H) { return eigen_range(H).first.min_real(); }

// Damped Newton on Phi(H) = phi_t, linearized at the current iterate.
StageOutcome newton_stage(MatrixState &st, const MatrixField &phi_t, const BundleData &bundle,
                          double abs_tol, double scale, double t, const SolveOptions &o,
                          SolveReport &rep) {
  bool saw_positivity_failure = false;
  for (int it = 0; it < o.max_newton; ++it) {
    const MatrixField R = phi_t - st.phi;
    const double rsup = R.sup_norm();
    if (rsup <= abs_tol)
      return StageOutcome::converged;
    const double rel = rsup / scale;

    const MatrixField Hinv = inverse(st.H);
    Linearization lin(st.H, product(st.phi, Hinv));
    const MatrixField &Sinv = lin.H_inv_sqrt();
    const MatrixField &S = lin.H_sqrt();
    const MatrixField B = hermitian_project(product(Sinv, R, Sinv));

    // Shift of the preconditioner: mean of the pointwise smallest eigenvalue
    // of the zeroth-order term, kept positive.
    auto [lo, hi] = eigen_range(hermitian_project(product(Sinv, st.phi, Sinv)));
    const double shift = std::max(mean(lo), 1e-2 * std::max(mean(hi), 1e-12));

    const double eta = std::min(o.forcing_max, std::sqrt(rel));
    MatrixField Y(st.H.geometry(), st.H.rank());
    const std::function<MatrixField(const MatrixField &)> op = [&](const MatrixField &y) {
      return lin.apply_symmetric(y);
    };
    const std::function<MatrixField(const MatrixField &)> pre = [&](const MatrixField &y) {
      return shifted_laplacian_solve(y, shift);
    };
    const CgResult cg = pcg(op, pre, B, Y, eta, o.max_linear_iterations);
    if (cg.breakdown || !(cg.relative_residual < 1.0))
      return saw_positivity_failure ? StageOutcome::positivity : StageOutcome::stalled;

    const MatrixField dH = hermitian_project(product(S, Y, S));
    const double r0 = R.l2_norm();
    double alpha = o.initial_damping;
    bool accepted = false;
    while (alpha >= o.min_damping) {
      MatrixField Hn = hermitian_project(st.H + alpha * MatrixField(dH));
      if (!(min_eigenvalue(Hn) > o.positivity_floor)) {
        saw_positivity_failure = true;
        alpha *= 0.5;
        continue;
      }
      MatrixField phin = hym_endomorphism(Hn, bundle);
      if ((phi_t - phin).l2_norm() < r0) {
        st.H = std::move(Hn);
        st.phi = std::move(phin);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted)
      return saw_positivity_failure ? StageOutcome::positivity : StageOutcome::stalled;

    ++rep.newton_steps;
    const double new_rel = (phi_t - st.phi).sup_norm() / scale;
    rep.residual_history.push_back(new_rel);
    rep.diagnostics.push_back(matrix_diagnostics(st.H, t, new_rel, cg.iterations, alpha));
  }
  return (phi_t - st.phi).sup_norm() <= abs_tol ? StageOutcome::converged : StageOutcome::stalled;
}

// Fixed-operator iteration (F0 - Delta_g) dH = phi_t - Phi(H) with backtracking.
StageOutcome picard_stage(MatrixState &st, const MatrixField &phi_t, const BundleData &bundle,
                          double abs_tol, double scale, double t, const SolveOptions &o,
                          SolveReport &rep) {
  const double shift = bundle.mean_F0();
  bool saw_positivity_failure = false;
  for (int it = 0; it < o.max_picard; ++it) {
    const MatrixField R = phi_t - st.phi;
    if (R.sup_norm() <= abs_tol)
      return StageOutcome::converged;
    const MatrixField dH = shifted_laplacian_solve(hermitian_project(R), shift);
    const double r0 = R.l2_norm();
    double alpha = 1.0;
    bool accepted = false;
    while (alpha >= o.min_damping) {
      MatrixField Hn = hermitian_project(st.H + alpha * MatrixField(dH));
      if (!(min_eigenvalue(Hn) > o.positivity_floor)) {
        saw_positivity_failure = true;
        alpha *= 0.5;
        continue;
      }
      MatrixField phin = hym_endomorphism(Hn, bundle);
      if ((phi_t - phin).l2_norm() < r0) {
        st.H = std::move(Hn);
        st.phi = std::move(phin);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted)
      return saw_positivity_failure ? StageOutcome::positivity : StageOutcome::stalled;
    const double rel = (phi_t - st.phi).sup_norm() / scale;
    rep.residual_history.push_back(rel);
    rep.diagnostics.push_back(matrix_diagnostics(st.H, t, rel, 0, alpha));
  }
  return (phi_t - st.phi).sup_norm() <= abs_tol ? StageOutcome::converged : StageOutcome::stalled;
}

// Shared continuation driver. `Stage` runs the corrector at a given t and
// returns its outcome; `save`/`restore` snapshot the iterate.
template <class Stage, class Fallback, class Save, class Restore>
SolveStatus continuation(const SolveOptions &o, SolveReport &rep, Stage stage, Fallback fallback,
                         Save save, Restore restore) {
  double t = 0.0;
  const double dt0 = 1.0 / o.continuation_steps;
  double dt = dt0;
  int halvings = 0;
  while (t < 1.0) {
    const double tn = (t + dt >= 1.0 - 1e-12) ? 1.0 : t + dt;
    auto snapshot = save();
    const StageOutcome out = stage(tn);
    if (out == StageOutcome::converged) {
      t = tn;
      ++rep.stages;
      halvings = 0;
      dt = std::min(dt0, 2.0 * dt);
      continue;
    }
    restore(snapshot);
    if (halvings < o.max_stage_halvings) {
      ++halvings;
      dt *= 0.5;
      continue;
    }
    // Newton could not advance even with the smallest step.
    const StageOutcome fb = fallback(tn);
    if (fb == StageOutcome::converged) {
      rep.used_picard = true;
      t = tn;
      ++rep.stages;
      halvings = 0;
      continue;
    }
    restore(snapshot);
    std::ostringstream os;
    os << "continuation stalled at t = " << t << " (stage to " << tn << " failed)";
    rep.message = os.str();
    return (out == StageOutcome::positivity || fb == StageOutcome::positivity)
               ? SolveStatus::positivity_breakdown
               : SolveStatus::max_iter;
  }
  return SolveStatus::converged;
}

// ---------------------------------------------------------------------------
// Scalar problem

ScalarField kw_operator(const ScalarField &phi, const ScalarField &F0) {
  return scalar_line_curvature(phi, F0).G;
}

IterateDiagnostics scalar_diagnostics(const ScalarField &phi, double t, double residual,
                                      int linear_iterations, double damping) {
  IterateDiagnostics d;
  d.t = t;
  d.residual = residual;
  const auto h = phi.map_real([](double v) { return std::exp(-v); });
  d.sup_trace = h.max_real();
  d.lambda_min = h.min_real();
  d.lambda_max = h.max_real();
  ScalarField g(phi.geometry(), true);
  for (int k = 1; k <= phi.geom().n(); ++k) {
    const auto dphi = derivative(phi, k, DerivKind::holomorphic);
    for (std::size_t p = 0; p < g.size(); ++p)
      g[p] += std::norm(dphi[p]);
  }
  d.sup_torsion = g.max_real();
  d.linear_iterations = linear_iterations;
  d.damping = damping;
  return d;
}

StageOutcome kw_stage(ScalarField &phi, ScalarField &N, const ScalarField &Gt,
                      const ScalarField &F0, double abs_tol, double scale, double t,
                      const SolveOptions &o, SolveReport &rep) {
  for (int it = 0; it < o.max_newton; ++it) {
    const ScalarField R = N - Gt;
    const double rsup = R.sup_norm();
    if (rsup <= abs_tol)
      return StageOutcome::converged;
    const double rel = rsup / scale;
    // (-Delta + s) psi = e^{phi} (N - G_t), s = F0 + Delta phi.
    const ScalarField s = F0 + laplacian(phi);
    ScalarField rhs = R;
    for (std::size_t p = 0; p < rhs.size(); ++p)
      rhs[p] *= std::exp(phi.real_at(p));
    rhs.make_real();
    const double shift = std::max(mean(s), 1e-2 * std::max(1e-12, std::abs(mean(s))) + 1e-8);
    const std::function<ScalarField(const ScalarField &)> op = [&](const ScalarField &x) {
      ScalarField y = -laplacian(x);
      for (std::size_t p = 0; p < y.size(); ++p)
        y[p] += s[p] * x[p];
      return y.make_real();
    };
    const std::function<ScalarField(const ScalarField &)> pre = [&](const ScalarField &x) {
      return shifted_laplacian_solve(x, shift);
    };
    ScalarField psi(phi.geometry(), true);
    const double eta = std::min(o.forcing_max, std::sqrt(rel));
    const CgResult cg = pcg(op, pre, rhs, psi, eta, o.max_linear_iterations);
    if (cg.breakdown || !(cg.relative_residual < 1.0))
      return StageOutcome::stalled;

    const double r0 = std::sqrt(real_dot(R, R));
    double alpha = o.initial_damping;
    bool accepted = false;
    while (alpha >= o.min_damping) {
      ScalarField pn = phi + alpha * psi;
      pn.make_real();
      ScalarField Nn = kw_operator(pn, F0);
      const ScalarField Rn = Nn - Gt;
      if (std::sqrt(real_dot(Rn, Rn)) < r0) {
        phi = std::move(pn);
        N = std::move(Nn);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted)
      return StageOutcome::stalled;
    ++rep.newton_steps;
    const double new_rel = (N - Gt).sup_norm() / scale;
    rep.residual_history.push_back(new_rel);
    rep.diagnostics.push_back(scalar_diagnostics(phi, t, new_rel, cg.iterations, alpha));
  }
  return (N - Gt).sup_norm() <= abs_tol ? StageOutcome::converged : StageOutcome::stalled;
}

} // namespace

std::pair<MatrixField, SolveReport> solve_prescribed(const HYMTarget &target,
                                                     const BundleData &bundle,
                                                     const SolveOptions &opts,
                                                     const MatrixField *initial) {
  opts.validate();
  bundle.validate();
  require_same_grid(target.phi_target.geom(), bundle.F0.geom(), "solve_prescribed");
  if (target.phi_target.rank() != bundle.r)
    throw ShapeError("target rank does not match bundle rank");
  if (opts.check_contracts)
    target.validate();

  const auto &geometry = target.phi_target.geometry();
  const int r = bundle.r;
  MatrixState st;
  if (initial) {
    require_compatible(*initial, target.phi_target, "solve_prescribed initial guess");
    if (!initial->is_hermitian())
      throw ContractError("initial guess must be Hermitian");
    st.H = *initial;
  } else {
    const double c = mean(trace(target.phi_target)) / (r * bundle.mean_F0());
    if (!(c > 0.0))
      throw ContractError("initial guess scale must be positive");
    st.H = MatrixField::identity(geometry, r, c);
  }
  if (!(min_eigenvalue(st.H) > opts.positivity_floor))
    throw PositivityError("initial guess is not positive definite", 0, min_eigenvalue(st.H));
  st.phi = hym_endomorphism(st.H, bundle);

  SolveReport rep;
  const MatrixField phi0 = st.phi;
  const double scale = std::max(target.phi_target.sup_norm(), std::numeric_limits<double>::min());
  rep.residual_history.push_back((target.phi_target - st.phi).sup_norm() / scale);
  rep.diagnostics.push_back(matrix_diagnostics(st.H, 0.0, rep.residual_history.back(), 0, 0.0));

  auto path = [&](double t) { return (1.0 - t) * MatrixField(phi0) + t * MatrixField(target.phi_target); };
  auto stage_tol = [&](double t) {
    return (t >= 1.0 ? opts.tol_residual : std::max(opts.tol_residual, opts.stage_tol)) * scale;
  };
  const auto stage = [&](double t) {
    return newton_stage(st, path(t), bundle, stage_tol(t), scale, t, opts, rep);
  };
  const auto fallback = [&](double t) {
    if (!opts.picard_fallback)
      return StageOutcome::stalled;
    return picard_stage(st, path(t), bundle, stage_tol(t), scale, t, opts, rep);
  };
  const auto save = [&]() { return st; };
  const auto restore = [&](const MatrixState &s) { st = s; };

  rep.status = continuation(opts, rep, stage, fallback, save, restore);
  rep.final_residual = (target.phi_target - st.phi).sup_norm() / scale;
  if (rep.status == SolveStatus::converged && rep.final_residual > opts.tol_residual)
    rep.status = SolveStatus::max_iter;
  if (rep.message.empty())
    rep.message = rep.status == SolveStatus::converged ? "converged" : "did not converge";
  return {std::move(st.H), std::move(rep)};
}

std::pair<ScalarField, SolveReport> solve_kazdan_warner(const ScalarField &G, const ScalarField &F0,
                                                        const SolveOptions &opts) {
  opts.validate();
  require_same_grid(G.geom(), F0.geom(), "solve_kazdan_warner");
  if (!G.is_real() || !F0.is_real())
    throw ContractError("solve_kazdan_warner: G and F0 must be real");
  if (opts.check_contracts) {
    if (!(G.min_real() > 0.0)) {
      std::ostringstream os;
      os << "solve_kazdan_warner: G must be positive everywhere (min " << G.min_real()
         << "); for sign-changing data see the counterexample and nonexistence tools";
      throw ContractError(os.str());
    }
    if (!(F0.min_real() > 0.0))
      throw ContractError("solve_kazdan_warner: F0 must be positive");
  }

  const double mF = mean(F0), mG = mean(G);
  const double phi0 = (mF > 0.0 && mG > 0.0) ? std::log(mF / mG) : 0.0;
  ScalarField phi = ScalarField::constant(G.geometry(), phi0);
  phi.make_real();
  ScalarField N = kw_operator(phi, F0);
  const ScalarField G0 = N;

  SolveReport rep;
  const double scale = std::max(G.sup_norm(), std::numeric_limits<double>::min());
  rep.residual_history.push_back((N - G).sup_norm() / scale);
  rep.diagnostics.push_back(scalar_diagnostics(phi, 0.0, rep.residual_history.back(), 0, 0.0));

  auto path = [&](double t) {
    ScalarField g = (1.0 - t) * ScalarField(G0) + t * ScalarField(G);
    return g.make_real();
  };
  const auto stage = [&](double t) {
    const double tol = (t >= 1.0 ? opts.tol_residual : std::max(opts.tol_residual, opts.stage_tol)) * scale;
    return kw_stage(phi, N, path(t), F0, tol, scale, t, opts, rep);
  };
  const auto fallback = [](double) { return StageOutcome::stalled; };
  const auto save = [&]() { return std::make_pair(phi, N); };
  const auto restore = [&](const std::pair<ScalarField, ScalarField> &s) {
    phi = s.first;
    N = s.second;
  };
  rep.status = continuation(opts, rep, stage, fallback, save, restore);
  rep.final_residual = (N - G).sup_norm() / scale;
  if (rep.status == SolveStatus::converged && rep.final_residual > opts.tol_residual)
    rep.status = SolveStatus::max_iter;
  if (rep.message.empty())
    rep.message = rep.status == SolveStatus::converged ? "converged" : "did not converge";
  return {std::move(phi), std::move(rep)};
}

std::pair<ScalarField, SolveReport> solve_kazdan_warner(const ScalarField &G, double F0,
                                                        const SolveOptions &opts) {
  ScalarField f = ScalarField::constant(G.geometry(), F0);
  f.make_real();
  return solve_kazdan_warner(G, f, opts);
}

Normalization normalize_reference(const MatrixField &omega) {
  Normalization out;
  out.kappa = eigen_range(omega).first;
  const double total = integrate_real(out.kappa);
  if (!(total > 0.0)) {
    std::ostringstream os;
    os << "normalization impossible: integral of the smallest eigenvalue is " << total
       << " (must be positive)";
    throw ObstructionError(os.str(), total);
  }
  out.lambda0 = total / omega.geom().volume();
  ScalarField rhs = ScalarField::constant(omega.geometry(), out.lambda0) - out.kappa;
  rhs.make_real();
  out.f = poisson_solve(rhs);
  return out;
}

bool comparison_check(const MatrixField &H, double lambda) {
  return eigen_range(H).second.max_real() <= lambda + 1e-6;
}

} // namespace hym
