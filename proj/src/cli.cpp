#include "hym/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "hym/chern.hpp"
#include "hym/errors.hpp"
#include "hym/experiments.hpp"
#include "hym/hymf_io.hpp"
#include "hym/random_fields.hpp"
#include "hym/solver.hpp"

namespace hym {

namespace {

namespace fs = std::filesystem;

struct Common {
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 1;
  std::optional<double> tol;
  std::size_t grid = 0; ///< 0: 64 on T^2, 16 on T^4
  double period = 1.0;
  int n = 1;
  int max_newton = 0;
  int continuation_steps = 0;
};

void add_common(CLI::App *sub, Common &c, bool with_dimension) {
  sub->add_option("--config", c.config, "Read options from a key = value config file");
  sub->add_option("--out", c.out, "Output directory")->capture_default_str();
  sub->add_option("--seed", c.seed, "Seed of the random generators")->capture_default_str();
  sub->add_option("--tol", c.tol, "Relative residual tolerance of the solver");
  sub->add_option("--grid", c.grid, "Grid points per real axis (even, >= 8)");
  sub->add_option("--period", c.period, "Period of every real axis")->capture_default_str();
  if (with_dimension)
    sub->add_option("--n", c.n, "Complex dimension of the torus")
        ->check(CLI::IsMember({1, 2}))
        ->capture_default_str();
  sub->add_option("--max-newton", c.max_newton, "Newton iterations per continuation stage");
  sub->add_option("--continuation-steps", c.continuation_steps, "Uniform continuation stages");
}

// Splices the options of a `--config` file in front of the command-line ones,
// so explicit flags win. Keys are long option names without dashes.
std::vector<std::string> expand_config(const std::vector<std::string> &args) {
  std::vector<std::string> rest;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size())
      path = args[++i];
    else if (args[i].rfind("--config=", 0) == 0)
      path = args[i].substr(9);
    else
      rest.push_back(args[i]);
  }
  if (path.empty() || rest.empty())
    return args;
  std::vector<std::string> from_file;
  for (const auto &item : CLI::ConfigINI().from_file(path)) {
    if (item.name == "++" || item.name == "--")
      continue; // section markers
    std::string key = "--" + item.fullname();
    if (item.inputs.size() == 1)
      from_file.push_back(key + "=" + item.inputs.front());
    else {
      from_file.push_back(key);
      from_file.insert(from_file.end(), item.inputs.begin(), item.inputs.end());
    }
  }
  std::vector<std::string> out{rest.front()};
  out.insert(out.end(), from_file.begin(), from_file.end());
  out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

GeometryPtr make_geometry(const Common &c, int n) {
  const std::size_t N = c.grid ? c.grid : (n == 1 ? 64 : 16);
  return TorusGeometry::make(n, N, c.period);
}

SolveOptions solve_options(const Common &c) {
  SolveOptions o;
  if (c.tol)
    o.tol_residual = *c.tol;
  if (c.max_newton > 0)
    o.max_newton = c.max_newton;
  if (c.continuation_steps > 0)
    o.continuation_steps = c.continuation_steps;
  return o;
}

fs::path out_dir(const Common &c) {
  fs::path p(c.out);
  fs::create_directories(p);
  return p;
}

void write_text(const fs::path &path, const std::string &text) {
  std::ofstream os(path);
  if (!os)
    throw FormatError(path.string() + ": cannot open for writing");
  os << text;
}

std::string solve_summary(const SolveReport &rep) {
  std::ostringstream os;
  os << std::setprecision(12);
  os << "status: " << to_string(rep.status) << "\n";
  os << "final_residual: " << rep.final_residual << "\n";
  os << "newton_steps: " << rep.newton_steps << "\n";
  os << "stages: " << rep.stages << "\n";
  os << "used_picard: " << (rep.used_picard ? "true" : "false") << "\n";
  os << "message: " << rep.message << "\n";
  return os.str();
}

std::string history_csv(const SolveReport &rep) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "iterate,t,residual,sup_trace,sup_torsion,lambda_min,lambda_max,linear_iterations,damping\n";
  for (std::size_t k = 0; k < rep.diagnostics.size(); ++k) {
    const auto &d = rep.diagnostics[k];
    os << k << ',' << d.t << ',' << d.residual << ',' << d.sup_trace << ',' << d.sup_torsion << ','
       << d.lambda_min << ',' << d.lambda_max << ',' << d.linear_iterations << ',' << d.damping
       << '\n';
  }
  return os.str();
}

int status_code(const SolveReport &rep) {
  switch (rep.status) {
  case SolveStatus::converged:
    return exit_ok;
  case SolveStatus::obstruction:
    return exit_obstruction;
  default:
    return exit_no_convergence;
  }
}

// --- solve -----------------------------------------------------------------

struct SolveArgs {
  Common c;
  int rank = 2;
  double F0 = 1.0;
  std::string target = "constant";
  double target_scale = 1.0;
  std::string target_file;
  std::string initial_file;
  int max_mode = 2;
  double amplitude = 0.5;
};

int run_solve(const SolveArgs &a, std::ostream &out) {
  const fs::path dir = out_dir(a.c);
  GeometryPtr g;
  MatrixField phi;
  std::optional<MatrixField> H_star;
  BundleData bundle;
  if (a.target == "file") {
    if (a.target_file.empty())
      throw ContractError("solve: --target file needs --target-file");
    phi = read_matrix_field(a.target_file);
    g = phi.geometry();
    bundle = BundleData::constant(g, phi.rank(), a.F0);
  } else {
    g = make_geometry(a.c, a.c.n);
    bundle = BundleData::constant(g, a.rank, a.F0);
    if (a.target == "constant") {
      phi = MatrixField::identity(g, a.rank, a.target_scale);
    } else {
      Rng rng(a.c.seed);
      H_star = random_positive_field(g, a.rank, rng, a.max_mode, a.amplitude);
      phi = hym_endomorphism(*H_star, bundle);
    }
  }
  std::optional<MatrixField> initial;
  if (!a.initial_file.empty())
    initial = read_matrix_field(a.initial_file);

  auto [H, rep] = solve_prescribed(HYMTarget{phi}, bundle, solve_options(a.c),
                                   initial ? &*initial : nullptr);
  write_hymf((dir / "H.hymf").string(), H);
  write_hymf((dir / "residual.hymf").string(), hym_residual(H, HYMTarget{phi}, bundle).field);
  std::string summary = solve_summary(rep);
  if (H_star) {
    write_hymf((dir / "H_star.hymf").string(), *H_star);
    std::ostringstream os;
    os << std::setprecision(12) << "recovery_error: " << (H - *H_star).sup_norm() << "\n";
    summary += os.str();
  }
  write_text(dir / "report.txt", summary);
  write_text(dir / "residual_history.csv", history_csv(rep));
  out << summary;
  return status_code(rep);
}

// --- kazdan-warner -----------------------------------------------------------

struct KwArgs {
  Common c;
  double F0 = 1.0;
  std::string G = "constant";
  double G_value = 1.0;
  std::string G_file;
  int max_mode = 2;
  double amplitude = 0.5;
};

int run_kw(const KwArgs &a, std::ostream &out) {
  const fs::path dir = out_dir(a.c);
  ScalarField G;
  std::optional<ScalarField> phi_star;
  if (a.G == "file") {
    if (a.G_file.empty())
      throw ContractError("kazdan-warner: --G file needs --G-file");
    G = read_scalar_field(a.G_file);
  } else {
    auto g = make_geometry(a.c, a.c.n);
    if (a.G == "constant") {
      G = ScalarField::constant(g, a.G_value);
      G.make_real();
    } else {
      Rng rng(a.c.seed);
      phi_star = random_smooth_scalar(g, rng, a.max_mode, a.amplitude);
      G = scalar_line_curvature(*phi_star, a.F0).G;
    }
  }
  auto [phi, rep] = solve_kazdan_warner(G, a.F0, solve_options(a.c));
  write_hymf((dir / "phi.hymf").string(), phi);
  std::string summary = solve_summary(rep);
  if (phi_star) {
    write_hymf((dir / "phi_star.hymf").string(), *phi_star);
    std::ostringstream os;
    os << std::setprecision(12) << "recovery_error: " << (phi - *phi_star).sup_norm() << "\n";
    summary += os.str();
  }
  write_text(dir / "report.txt", summary);
  write_text(dir / "residual_history.csv", history_csv(rep));
  out << summary;
  return status_code(rep);
}

// --- normalize ---------------------------------------------------------------

struct NormalizeArgs {
  Common c;
  int rank = 2;
  std::string omega_file;
  double omega_shift = 1.0;
  int max_mode = 2;
  double amplitude = 0.5;
};

int run_normalize(const NormalizeArgs &a, std::ostream &out) {
  const fs::path dir = out_dir(a.c);
  MatrixField omega;
  if (!a.omega_file.empty()) {
    omega = read_matrix_field(a.omega_file);
    if (!omega.is_hermitian())
      throw ContractError("normalize: reference field must be Hermitian");
  } else {
    auto g = make_geometry(a.c, a.c.n);
    Rng rng(a.c.seed);
    omega = hermitian_project(random_hermitian_field(g, a.rank, rng, a.max_mode, a.amplitude) +
                              MatrixField::identity(g, a.rank, a.omega_shift));
  }
  const Normalization nrm = normalize_reference(omega);
  write_hymf((dir / "f.hymf").string(), nrm.f);
  write_hymf((dir / "kappa.hymf").string(), nrm.kappa);
  const MatrixField shifted =
      hermitian_project(omega + MatrixField::scalar_identity(laplacian(nrm.f).real_part(), omega.rank()));
  const auto lo = eigen_range(shifted).first;
  std::ostringstream os;
  os << std::setprecision(12);
  os << "lambda0: " << nrm.lambda0 << "\n";
  os << "kappa_min: " << nrm.kappa.min_real() << "\n";
  os << "kappa_max: " << nrm.kappa.max_real() << "\n";
  os << "normalized_deviation: "
     << std::max(std::abs(lo.max_real() - nrm.lambda0), std::abs(lo.min_real() - nrm.lambda0))
     << "\n";
  write_text(dir / "report.txt", os.str());
  out << os.str();
  return exit_ok;
}

// --- chern -------------------------------------------------------------------

struct ChernArgs {
  Common c;
  std::string input;
  int rank = 2;
  int max_mode = 1;
  double amplitude = 0.3;
  std::optional<double> a, b;
};

int finish_chern(const ChernArgs &a, const ChernReport &rep, std::ostream &out) {
  const fs::path dir = out_dir(a.c);
  write_text(dir / "chern_report.txt", format_report(rep));
  write_text(dir / "chern_report.csv", report_csv(rep));
  out << format_report(rep);
  return rep.pass ? exit_ok : exit_check_failed;
}

EigenBounds bounds_of(const ChernArgs &a) {
  if (a.a.has_value() != a.b.has_value())
    throw ContractError("eigenvalue bounds need both --a and --b");
  if (!a.a)
    return std::nullopt;
  return std::make_pair(*a.a, *a.b);
}

int run_chern_bundle(const ChernArgs &a, std::ostream &out) {
  CurvatureField R;
  if (!a.input.empty()) {
    R = read_curvature_field(a.input);
  } else {
    auto g = make_geometry(a.c, 2);
    Rng rng(a.c.seed);
    R = curvature_from_metric(random_positive_field(g, a.rank, rng, a.max_mode, a.amplitude));
    write_hymf((out_dir(a.c) / "curvature.hymf").string(), R);
  }
  return finish_chern(a, bundle_inequality_check(R, bounds_of(a)), out);
}

int run_chern_kahler(const ChernArgs &a, std::ostream &out) {
  CurvatureField R;
  if (!a.input.empty()) {
    R = read_curvature_field(a.input);
  } else {
    auto g = make_geometry(a.c, 2);
    Rng rng(a.c.seed);
    R = random_kahler_curvature(g, rng, a.max_mode, a.amplitude);
    write_hymf((out_dir(a.c) / "curvature.hymf").string(), R);
  }
  return finish_chern(a, kahler_invariants_and_check(R, bounds_of(a)), out);
}

// --- counterexample ----------------------------------------------------------

struct CounterexampleArgs {
  Common c;
  CounterexampleOptions o;
};

int run_counterexample(const CounterexampleArgs &a, std::ostream &out) {
  const fs::path dir = out_dir(a.c);
  auto g = make_geometry(a.c, 1);
  const auto art = counterexample_pipeline(g, a.o);
  write_hymf((dir / "f.hymf").string(), art.f);
  write_hymf((dir / "shift.hymf").string(), art.shift);
  write_hymf((dir / "psi.hymf").string(), art.psi);
  write_hymf((dir / "G.hymf").string(), art.G);
  write_hymf((dir / "phi1.hymf").string(), art.phi1);
  write_hymf((dir / "phi2.hymf").string(), art.phi2);
  write_text(dir / "Q_samples.csv", q_samples_csv(art));
  std::ostringstream os;
  os << std::setprecision(12);
  os << "amplitude: " << art.amplitude << "\n";
  os << "amplitude_doublings: " << art.rescales << "\n";
  os << "target: " << art.target << "\n";
  os << "t0: " << art.t0 << "\n";
  os << "Q_t0: " << art.Q_t0 << "\n";
  os << "G_min: " << art.G.min_real() << "\n";
  os << "G_max: " << art.G.max_real() << "\n";
  os << "residual1: " << art.residual1 << "\n";
  os << "residual2: " << art.residual2 << "\n";
  os << "solution_gap: " << (art.phi1 - art.phi2).sup_norm() << "\n";
  write_text(dir / "report.txt", os.str());
  out << os.str();
  return exit_ok;
}

// --- nonexistence-demo -------------------------------------------------------

struct NonexistenceArgs {
  Common c;
  std::string G_file;
  double G_value = -1.0;
  bool run_solver = false;
};

int run_nonexistence(const NonexistenceArgs &a, std::ostream &out) {
  const fs::path dir = out_dir(a.c);
  ScalarField G;
  if (!a.G_file.empty()) {
    G = read_scalar_field(a.G_file);
  } else {
    G = ScalarField::constant(make_geometry(a.c, a.c.n), a.G_value);
    G.make_real();
  }
  NonexistenceOptions o;
  o.run_solver = a.run_solver;
  o.solver = solve_options(a.c);
  const auto rep = nonexistence_demo(G, o);
  std::ostringstream os;
  os << std::setprecision(12);
  os << "integral_G: " << rep.integral << "\n";
  os << "obstruction: " << (rep.obstruction ? "true" : "false") << "\n";
  os << "verdict: " << rep.verdict << "\n";
  if (rep.solver_ran) {
    os << "solver_status: " << to_string(rep.solve.status) << "\n";
    os << "solver_final_residual: " << rep.solve.final_residual << "\n";
    os << "solver_message: " << rep.solve.message << "\n";
    write_text(dir / "residual_history.csv", history_csv(rep.solve));
  }
  write_text(dir / "report.txt", os.str());
  out << os.str();
  return rep.obstruction ? exit_obstruction : exit_ok;
}

// --- compare -----------------------------------------------------------------

struct CompareArgs {
  Common c;
  std::string first, second;
  double lambda = 1.0;
};

int run_compare(const CompareArgs &a, std::ostream &out) {
  MatrixField H = read_matrix_field(a.first);
  if (!a.second.empty()) {
    const MatrixField ref = read_matrix_field(a.second);
    require_compatible(H, ref, "compare");
    const MatrixField s = inverse_sqrt(ref);
    H = hermitian_project(product(s, H, s));
  } else if (!H.is_hermitian()) {
    throw ContractError("compare: field must be Hermitian");
  }
  const bool ok = comparison_check(H, a.lambda);
  std::ostringstream os;
  os << std::setprecision(12);
  os << "lambda: " << a.lambda << "\n";
  os << "sup_lambda_max: " << eigen_range(H).second.max_real() << "\n";
  os << "comparison: " << (ok ? "PASS" : "FAIL") << "\n";
  out << os.str();
  return ok ? exit_ok : exit_check_failed;
}

} // namespace

int cli_dispatch(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Prescribed Hermitian-Yang-Mills tensor solver and experiments on flat tori",
               "hym_cli"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  SolveArgs solve;
  auto *s = app.add_subcommand("solve", "Solve the matrix HYM equation for a prescribed target");
  add_common(s, solve.c, true);
  s->add_option("--rank", solve.rank, "Bundle rank")->capture_default_str();
  s->add_option("--F0", solve.F0, "Reference curvature constant")->capture_default_str();
  s->add_option("--target", solve.target, "Target kind")
      ->check(CLI::IsMember({"constant", "manufactured", "file"}))
      ->capture_default_str();
  s->add_option("--target-scale", solve.target_scale, "Constant target multiple of Id")
      ->capture_default_str();
  s->add_option("--target-file", solve.target_file, "HYMF file holding the target");
  s->add_option("--initial-file", solve.initial_file, "HYMF file holding the initial metric");
  s->add_option("--max-mode", solve.max_mode, "Fourier cutoff of generated data")->capture_default_str();
  s->add_option("--amplitude", solve.amplitude, "Amplitude of generated data")->capture_default_str();

  KwArgs kw;
  auto *k = app.add_subcommand("kazdan-warner", "Solve e^{-phi}(F0 + Delta phi) = G");
  add_common(k, kw.c, true);
  k->add_option("--F0", kw.F0, "Reference curvature constant")->capture_default_str();
  k->add_option("--G", kw.G, "Right-hand side kind")
      ->check(CLI::IsMember({"constant", "manufactured", "file"}))
      ->capture_default_str();
  k->add_option("--G-value", kw.G_value, "Constant right-hand side")->capture_default_str();
  k->add_option("--G-file", kw.G_file, "HYMF file holding G");
  k->add_option("--max-mode", kw.max_mode, "Fourier cutoff of generated data")->capture_default_str();
  k->add_option("--amplitude", kw.amplitude, "Amplitude of generated data")->capture_default_str();

  NormalizeArgs nrm;
  auto *nm = app.add_subcommand("normalize", "Make the smallest eigenvalue of a reference constant");
  add_common(nm, nrm.c, true);
  nm->add_option("--rank", nrm.rank, "Rank of the generated reference")->capture_default_str();
  nm->add_option("--omega-file", nrm.omega_file, "HYMF file holding the reference field");
  nm->add_option("--omega-shift", nrm.omega_shift, "Multiple of Id added to generated data")
      ->capture_default_str();
  nm->add_option("--max-mode", nrm.max_mode, "Fourier cutoff of generated data")->capture_default_str();
  nm->add_option("--amplitude", nrm.amplitude, "Amplitude of generated data")->capture_default_str();

  ChernArgs cb, ck;
  ck.amplitude = 1.0;
  auto add_chern = [](CLI::App *sub, ChernArgs &c, bool bundle) {
    add_common(sub, c.c, false);
    sub->add_option("--input", c.input, "HYMF curvature file");
    if (bundle)
      sub->add_option("--rank", c.rank, "Rank of the generated metric")->capture_default_str();
    sub->add_option("--max-mode", c.max_mode, "Fourier cutoff of generated data")->capture_default_str();
    sub->add_option("--amplitude", c.amplitude, "Amplitude of generated data")->capture_default_str();
    sub->add_option("--a", c.a, "Lower eigenvalue bound (overrides the measured one)");
    sub->add_option("--b", c.b, "Upper eigenvalue bound (overrides the measured one)");
  };
  auto *chb = app.add_subcommand("chern-bundle", "Chern number inequality for a bundle on T^4");
  add_chern(chb, cb, true);
  auto *chk = app.add_subcommand("chern-kahler", "Chern number inequality for Kähler curvature on T^4");
  add_chern(chk, ck, false);

  CounterexampleArgs ce;
  auto *cx = app.add_subcommand("counterexample", "Two solutions for a sign-changing G on T^2");
  add_common(cx, ce.c, false);
  cx->add_option("--F0", ce.o.F0, "Reference curvature constant")->capture_default_str();
  cx->add_option("--amplitude", ce.o.amplitude, "Cusp amplitude")->capture_default_str();
  cx->add_option("--point", ce.o.point, "Grid index of the cusp point")->capture_default_str();
  cx->add_option("--t-lo", ce.o.t_lo, "Lower end of the t bracket")->capture_default_str();
  cx->add_option("--t-hi", ce.o.t_hi, "Upper end of the t bracket")->capture_default_str();
  cx->add_option("--max-rescales", ce.o.max_rescales, "Amplitude doublings allowed")
      ->capture_default_str();
  cx->add_option("--q-samples", ce.o.q_samples, "Samples of Q written to CSV")->capture_default_str();

  NonexistenceArgs ne;
  auto *nx = app.add_subcommand("nonexistence-demo", "Integral obstruction on the trivial bundle");
  add_common(nx, ne.c, true);
  nx->add_option("--G-file", ne.G_file, "HYMF file holding G");
  nx->add_option("--G-value", ne.G_value, "Constant G")->capture_default_str();
  nx->add_flag("--run-solver", ne.run_solver, "Also run the scalar solver without contract checks");

  CompareArgs cmp;
  auto *cp = app.add_subcommand("compare", "Check H <= lambda H0 pointwise");
  add_common(cp, cmp.c, false);
  cp->add_option("--first", cmp.first, "HYMF file holding H")->required();
  cp->add_option("--second", cmp.second, "HYMF file holding H0 (default Id)");
  cp->add_option("--lambda", cmp.lambda, "Comparison constant")->capture_default_str();

  try {
    const std::vector<std::string> full = expand_config(args);
    std::vector<std::string> rev(full.rbegin(), full.rend());
    app.parse(rev);
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() == 0)
      return app.exit(e, out, err);
    err << e.what() << "\n\n" << app.help();
    return exit_usage;
  }

  try {
    if (s->parsed())
      return run_solve(solve, out);
    if (k->parsed())
      return run_kw(kw, out);
    if (nm->parsed())
      return run_normalize(nrm, out);
    if (chb->parsed())
      return run_chern_bundle(cb, out);
    if (chk->parsed())
      return run_chern_kahler(ck, out);
    if (cx->parsed())
      return run_counterexample(ce, out);
    if (nx->parsed())
      return run_nonexistence(ne, out);
    if (cp->parsed())
      return run_compare(cmp, out);
  } catch (const ObstructionError &e) {
    err << "obstruction: " << e.what() << "\n";
    return exit_obstruction;
  } catch (const BracketError &e) {
    err << "no bracket: " << e.what() << "\n";
    return exit_no_convergence;
  } catch (const ContractError &e) {
    err << "contract violation: " << e.what() << "\n";
    return exit_contract;
  } catch (const FormatError &e) {
    err << "bad input file: " << e.what() << "\n";
    return exit_contract;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return exit_contract;
  }
  err << app.help();
  return exit_usage;
}

} // namespace hym
