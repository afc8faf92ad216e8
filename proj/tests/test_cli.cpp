#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unistd.h>

#include "hym/cli.hpp"
#include "hym/hymf_io.hpp"

using namespace hym;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string &tag) {
    path = fs::temp_directory_path() / ("hym_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str(const std::string &name = "") const { return (path / name).string(); }
};

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string &p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

} // namespace

TEST_CASE("usage errors exit with 64") {
  CHECK(run({}).code == exit_usage);
  CHECK(run({"frobnicate"}).code == exit_usage);
  auto r = run({"solve", "--no-such-flag"});
  CHECK(r.code == exit_usage);
  CHECK(r.err.find("solve") != std::string::npos);
  CHECK(run({"solve", "--target", "bogus"}).code == exit_usage);
  CHECK(run({"--help"}).code == exit_ok);
}

TEST_CASE("solve with a config file reproduces the constant closed form") {
  TempDir dir("solve");
  {
    std::ofstream cfg(dir.str("constant_target.cfg"));
    cfg << "# constant target\nF0 = 2\ntarget-scale = 3\nrank = 2\nout = " << dir.str("out") << "\n";
  }
  auto r = run({"solve", "--config", dir.str("constant_target.cfg")});
  REQUIRE(r.code == exit_ok);
  CHECK(r.out.find("status: converged") != std::string::npos);
  const MatrixField H = read_matrix_field(dir.str("out/H.hymf"));
  CHECK(H.geom().dims()[0] == 64);
  CHECK((H - MatrixField::identity(H.geometry(), 2, 1.5)).sup_norm() <= 1e-9);
  CHECK(fs::exists(dir.str("out/report.txt")));
  CHECK(fs::exists(dir.str("out/residual_history.csv")));
  CHECK(fs::exists(dir.str("out/residual.hymf")));

  auto o = run({"solve", "--config", dir.str("constant_target.cfg"), "--grid", "16", "--target-scale",
                "4", "--out", dir.str("override")});
  REQUIRE(o.code == exit_ok);
  const MatrixField H2 = read_matrix_field(dir.str("override/H.hymf"));
  CHECK(H2.geom().dims()[0] == 16);
  CHECK((H2 - MatrixField::identity(H2.geometry(), 2, 2.0)).sup_norm() <= 1e-9);
  CHECK(run({"solve", "--config", dir.str("missing.cfg")}).code == exit_usage);
}

TEST_CASE("solve on manufactured data is deterministic") {
  TempDir dir("manufactured");
  std::vector<std::string> base = {"solve", "--target", "manufactured", "--grid", "16",
                                   "--period", "6.283185307179586", "--seed", "5"};
  auto a = base;
  a.insert(a.end(), {"--out", dir.str("a")});
  auto b = base;
  b.insert(b.end(), {"--out", dir.str("b")});
  auto ra = run(a);
  auto rb = run(b);
  REQUIRE(ra.code == exit_ok);
  REQUIRE(rb.code == exit_ok);
  CHECK(ra.out.find("recovery_error") != std::string::npos);
  CHECK(slurp(dir.str("a/H.hymf")) == slurp(dir.str("b/H.hymf")));
  CHECK_FALSE(slurp(dir.str("a/H.hymf")).empty());
}

TEST_CASE("solve rejects a non-positive target with exit 2") {
  TempDir dir("neg");
  auto r = run({"solve", "--grid", "16", "--target-scale", "-1", "--out", dir.str()});
  CHECK(r.code == exit_contract);
  CHECK(r.err.find("positive") != std::string::npos);
  CHECK(run({"solve", "--target", "file", "--out", dir.str()}).code == exit_contract);
  CHECK(run({"solve", "--target", "file", "--target-file", dir.str("missing.hymf"), "--out",
             dir.str()})
            .code == exit_contract);
}

TEST_CASE("kazdan-warner subcommand") {
  TempDir dir("kw");
  auto r = run({"kazdan-warner", "--grid", "16", "--F0", "2", "--G-value", "0.5", "--out", dir.str()});
  REQUIRE(r.code == exit_ok);
  const ScalarField phi = read_scalar_field(dir.str("phi.hymf"));
  CHECK(std::abs(phi.max_real() - std::log(4.0)) <= 1e-12);
  CHECK(run({"kazdan-warner", "--grid", "16", "--G-value", "-1", "--out", dir.str()}).code ==
        exit_contract);
}

TEST_CASE("normalize subcommand and its obstruction") {
  TempDir dir("norm");
  auto r = run({"normalize", "--grid", "16", "--out", dir.str()});
  REQUIRE(r.code == exit_ok);
  CHECK(r.out.find("lambda0") != std::string::npos);
  CHECK(fs::exists(dir.str("f.hymf")));
  CHECK(run({"normalize", "--grid", "16", "--omega-shift", "-2", "--out", dir.str()}).code ==
        exit_obstruction);
}

TEST_CASE("chern subcommands") {
  TempDir dir("chern");
  auto r = run({"chern-bundle", "--grid", "8", "--out", dir.str("b")});
  REQUIRE(r.code == exit_ok);
  CHECK(r.out.find("PASS") != std::string::npos);
  CHECK(fs::exists(dir.str("b/chern_report.csv")));
  CHECK(run({"chern-bundle", "--input", dir.str("b/curvature.hymf"), "--out", dir.str("b2")}).code ==
        exit_ok);
  auto k = run({"chern-kahler", "--grid", "8", "--out", dir.str("k")});
  CHECK(k.code == exit_ok);
  CHECK(run({"chern-kahler", "--input", dir.str("b/curvature.hymf"), "--out", dir.str("k2")}).code ==
        exit_contract);
  CHECK(run({"chern-bundle", "--grid", "8", "--a", "1", "--out", dir.str("b3")}).code ==
        exit_contract);
  auto w = run({"chern-bundle", "--grid", "8", "--a", "0", "--b", "0", "--out", dir.str("b4")});
  CHECK(w.out.find("warning") != std::string::npos);
}

TEST_CASE("counterexample subcommand writes its artifacts") {
  TempDir dir("ce");
  auto r = run({"counterexample", "--grid", "64", "--out", dir.str("ce")});
  REQUIRE(r.code == exit_ok);
  for (const char *f : {"f.hymf", "shift.hymf", "psi.hymf", "G.hymf", "phi1.hymf", "phi2.hymf",
                        "Q_samples.csv", "report.txt"})
    CHECK(fs::exists(dir.str(std::string("ce/") + f)));
  CHECK(slurp(dir.str("ce/Q_samples.csv")).rfind("t,Q\n", 0) == 0);
  CHECK(run({"counterexample", "--grid", "32", "--t-lo", "10", "--t-hi", "20", "--max-rescales",
             "1", "--out", dir.str("bad")})
            .code == exit_no_convergence);
}

TEST_CASE("nonexistence-demo exit codes") {
  TempDir dir("ne");
  auto r = run({"nonexistence-demo", "--grid", "16", "--out", dir.str()});
  CHECK(r.code == exit_obstruction);
  CHECK(r.out.find("integral_G: -2") != std::string::npos);
  CHECK(run({"nonexistence-demo", "--grid", "16", "--G-value", "1", "--out", dir.str()}).code ==
        exit_ok);
  auto s = run({"nonexistence-demo", "--grid", "16", "--run-solver", "--out", dir.str()});
  CHECK(s.code == exit_obstruction);
  CHECK(s.out.find("solver_status") != std::string::npos);
}

TEST_CASE("compare subcommand") {
  TempDir dir("cmp");
  auto g = TorusGeometry::make(1, 8);
  write_hymf(dir.str("half.hymf"), MatrixField::identity(g, 2, 0.5));
  write_hymf(dir.str("two.hymf"), MatrixField::identity(g, 2, 2.0));
  CHECK(run({"compare", "--first", dir.str("half.hymf")}).code == exit_ok);
  CHECK(run({"compare", "--first", dir.str("half.hymf"), "--lambda", "0.4"}).code ==
        exit_check_failed);
  CHECK(run({"compare", "--first", dir.str("two.hymf"), "--second", dir.str("half.hymf"),
             "--lambda", "4"})
            .code == exit_ok);
  CHECK(run({"compare", "--first", dir.str("two.hymf"), "--second", dir.str("half.hymf")}).code ==
        exit_check_failed);
  CHECK(run({"compare"}).code == exit_usage);
}
