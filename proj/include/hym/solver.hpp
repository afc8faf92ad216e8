#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hym/curvature.hpp"

namespace hym {

struct SolveOptions {
  double tol_residual = 1e-9;    ///< relative sup-norm residual at the final stage
  double stage_tol = 1e-6;       ///< looser tolerance for intermediate continuation stages
  int max_newton = 50;           ///< Newton iterations per continuation stage
  int continuation_steps = 8;    ///< uniform stages in t before any halving
  int max_stage_halvings = 6;    ///< halvings of a failed stage before giving up
  double initial_damping = 1.0;
  double min_damping = 1.0 / 4096.0;
  double forcing_max = 0.1;      ///< eta_k = min(forcing_max, sqrt(residual))
  int max_linear_iterations = 400;
  double positivity_floor = 1e-10;
  bool picard_fallback = true;
  int max_picard = 400;
  /// Reject non-positive data up front. Disabled only by diagnostic tools.
  bool check_contracts = true;

  void validate() const;
};

enum class SolveStatus { converged, obstruction, max_iter, positivity_breakdown };

const char *to_string(SolveStatus s);

/// State of one accepted iterate.
struct IterateDiagnostics {
  double t = 0.0;               ///< continuation parameter of the stage
  double residual = 0.0;        ///< sup residual relative to the stage target scale
  double sup_trace = 0.0;       ///< sup tr H (matrix) or sup phi (scalar)
  double sup_torsion = 0.0;     ///< sup sum_k |(d_k H) H^{-1}|_h^2 (matrix) or sup |d phi|^2
  double lambda_min = 0.0;      ///< min over the grid of lambda_min(H) (scalar: min e^{-phi})
  double lambda_max = 0.0;
  int linear_iterations = 0;
  double damping = 0.0;
};

struct SolveReport {
  SolveStatus status = SolveStatus::max_iter;
  /// Relative sup residual of every accepted iterate against the final target.
  std::vector<double> residual_history;
  std::vector<IterateDiagnostics> diagnostics;
  int newton_steps = 0;
  int stages = 0;
  bool used_picard = false;
  double final_residual = 0.0;  ///< relative sup residual against the final target
  std::string message;
};

/// Solve hym_endomorphism(H) = target.phi_target for a positive Hermitian H
/// by damped Newton along the path Phi_t = (1 - t) Phi(H_init) + t Phi_target.
/// Without an initial guess, H_init = (mean tr Phi_target / (r mean F0)) Id.
std::pair<MatrixField, SolveReport> solve_prescribed(const HYMTarget &target,
                                                     const BundleData &bundle,
                                                     const SolveOptions &opts = {},
                                                     const MatrixField *initial = nullptr);

/// Solve e^{-phi} (F0 + Delta_g phi) = G for real phi along
/// G_t = (1 - t) e^{-phi_0} F0 + t G, phi_0 = log(mean F0 / mean G).
std::pair<ScalarField, SolveReport> solve_kazdan_warner(const ScalarField &G, const ScalarField &F0,
                                                        const SolveOptions &opts = {});
std::pair<ScalarField, SolveReport> solve_kazdan_warner(const ScalarField &G, double F0,
                                                        const SolveOptions &opts = {});

struct Normalization {
  ScalarField f;
  double lambda0 = 0.0;
  ScalarField kappa; ///< lambda_min(Omega) before the shift
};

/// f mean-zero with lambda_min(Omega + Delta_g f Id) = lambda0 constant.
/// Throws ObstructionError when integrate(lambda_min(Omega)) <= 0.
Normalization normalize_reference(const MatrixField &omega);

/// sup over the grid of lambda_max(H) <= lambda + 1e-6.
bool comparison_check(const MatrixField &H, double lambda);

} // namespace hym
