#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "catch_amalgamated.hpp"
#include "nonbiloc/cli.hpp"

using namespace nonbiloc;
using nonbiloc::io::json;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

namespace fs = std::filesystem;

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("nonbiloc_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string write_state(const std::string& name, const DensityOperator& rho) {
  return write(name, io::state_to_json(rho, name).dump());
}

cli::Options options() {
  cli::Options o;
  o.optimizer.seed = 1;
  return o;
}

json report(const cli::Output& out) {
  REQUIRE(out.exit_code == cli::kSuccess);
  return json::parse(out.out);
}

int run_exe(const std::string& args) {
  const std::string cmd = std::string(NONBILOC_EXE) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("compute nb on two Bell pairs", "[cli]") {
  const std::string bell = write_state("bell.json", bell_state(BellKind::PhiPlus));
  const json r = report(cli::cmd_compute("nb", bell, bell, options()));
  CHECK_THAT(r["result"]["value"].get<double>(), WithinAbs(0.75, 1e-12));
  CHECK(r["result"]["method"] == "pure_closed_form");
  CHECK(r["config"]["seed"] == 1);
  CHECK(r["inputs"][0]["label"] == "bell.json");
  CHECK(r["inputs"][0]["hash"].get<std::string>().starts_with("fnv1a64:"));
  CHECK(r["version"] == io::kVersion);
}

TEST_CASE("compute nb on classical states runs the optimizer", "[cli]") {
  const std::string rc = write_state("classical.json", classical_correlated());
  const json r = report(cli::cmd_compute("nb", rc, rc, options()));
  CHECK_THAT(r["result"]["value"].get<double>(), WithinAbs(0.75, 1e-6));
  CHECK(r["result"]["method"] == "optimizer");
  CHECK(r["result"]["diagnostics"]["restarts"] == 16);
}

TEST_CASE("compute min and friends", "[cli]") {
  const std::string b =
      write_state("beta.json", bell_diagonal({1.0 / 3, 1.0 / 3, 1.0 / 3, 0.0}));
  CHECK_THAT(report(cli::cmd_compute("min", b, std::nullopt, options()))["result"]["value"]
                 .get<double>(),
             WithinAbs(1.0 / 6, 1e-9));
  for (const char* kind : {"min_original", "discord", "discord_modified"}) {
    const json r = report(cli::cmd_compute(kind, b, std::nullopt, options()));
    CHECK(r["result"]["value"].get<double>() >= 0.0);
  }
  CHECK(cli::cmd_compute("bogus", b, std::nullopt, options()).exit_code == cli::kInvalidInput);
  CHECK(cli::cmd_compute("nb", b, std::nullopt, options()).exit_code == cli::kInvalidInput);
}

TEST_CASE("bound reports the exact value when a closed form applies", "[cli]") {
  const std::string rc = write_state("classical.json", classical_correlated());
  const json r = report(cli::cmd_bound(rc, rc, options()));
  CHECK_THAT(r["result"]["bound"].get<double>(), WithinAbs(1.0, 1e-12));
  CHECK(r["result"]["exact"].is_null());

  const DensityOperator beta = bell_diagonal({1.0 / 3, 1.0 / 3, 1.0 / 3, 0.0});
  const std::string ba = write_state("beta_ba.json", swap_parties(beta));
  const std::string ab = write_state("beta_ab.json", beta);
  CHECK_THAT(report(cli::cmd_bound(ba, ab, options()))["result"]["bound"].get<double>(),
             WithinAbs(35.0 / 36, 1e-12));

  Rng rng(91);
  const DensityOperator p = product_state(random_density({2}, 2, rng), random_density({2}, 2, rng));
  const std::string prod = write_state("product.json", p);
  const json pr = report(cli::cmd_bound(prod, prod, options()));
  CHECK_THAT(pr["result"]["exact"].get<double>(), WithinAbs(0.0, 1e-9));
  CHECK(pr["result"]["exact"].get<double>() <= pr["result"]["bound"].get<double>() + 1e-12);
}

TEST_CASE("bilocality command", "[cli]") {
  const std::string bell = write_state("bell.json", bell_state(BellKind::PhiPlus));
  const std::string settings = write("settings.json", cli::cmd_make_settings().out);
  const json r = report(cli::cmd_bilocality(bell, bell, settings, options()));
  CHECK_THAT(r["result"]["S"].get<double>(), WithinAbs(2.0 * std::sqrt(2.0), 1e-9));
  CHECK(r["result"]["violation"] == true);

  const std::string mixed = write_state("mixed.json", maximally_mixed({2, 2}));
  CHECK_THAT(report(cli::cmd_bilocality(mixed, mixed, settings, options()))["result"]["S"]
                 .get<double>(),
             WithinAbs(0.0, 1e-12));

  json bad = json::parse(cli::cmd_make_settings().out);
  bad["a0"] = io::matrix_to_json(2.0 * identity(2));
  const cli::Output out = cli::cmd_bilocality(bell, bell, write("bad.json", bad.dump()), options());
  CHECK(out.exit_code == cli::kInvalidInput);
  CHECK_THAT(out.err, ContainsSubstring("eigenvalues"));
}

TEST_CASE("exit codes for invalid input and dimension mismatch", "[cli]") {
  const std::string nonpsd = write(
      "nonpsd.json", R"({"dims": [2], "matrix": [[[1.5, 0], [0, 0]], [[0, 0], [-0.5, 0]]]})");
  const cli::Output out = cli::cmd_compute("min", nonpsd, std::nullopt, options());
  CHECK(out.exit_code == cli::kInvalidInput);
  CHECK_THAT(out.err, ContainsSubstring("eigenvalue"));
  const std::string tri = write_state("tri.json", maximally_mixed({2, 2, 2}));
  CHECK(cli::cmd_compute("min", tri, std::nullopt, options()).exit_code ==
        cli::kDimensionIncompatible);
  const std::string bell = write_state("bell.json", bell_state(BellKind::PhiPlus));
  CHECK(cli::cmd_compute("nb", bell, tri, options()).exit_code == cli::kDimensionIncompatible);
  CHECK(cli::cmd_bound(bell, tri, options()).exit_code == cli::kDimensionIncompatible);
  const std::string qutrit = write_state("qutrit.json", maximally_mixed({3, 3}));
  const std::string settings = write("settings.json", cli::cmd_make_settings().out);
  CHECK(cli::cmd_bilocality(qutrit, qutrit, settings, options()).exit_code ==
        cli::kDimensionIncompatible);
  CHECK(cli::cmd_compute("min", (scratch() / "missing.json").string(), std::nullopt, options())
            .exit_code == cli::kInvalidInput);
}

TEST_CASE("examples are byte-identical across runs", "[cli]") {
  cli::Options o = options();
  o.format = cli::Format::json;
  const cli::Output first = cli::cmd_examples(o);
  const cli::Output second = cli::cmd_examples(o);
  CHECK(first.exit_code == cli::kSuccess);
  CHECK(first.out == second.out);
  const json j = json::parse(first.out);
  CHECK(j["passed"] == true);
  CHECK(j["checks"].size() >= 10);
  o.format = cli::Format::text;
  const std::string text = cli::cmd_examples(o).out;
  CHECK_THAT(text, ContainsSubstring("PASS example1.pure_closed_form"));
  CHECK_THAT(text, !ContainsSubstring("FAIL"));
}

TEST_CASE("make-state writes loadable files", "[cli]") {
  const cli::Output out = cli::cmd_make_state("bell_diagonal", {0.25, 0.25, 0.25, 0.25}, "");
  REQUIRE(out.exit_code == cli::kSuccess);
  const DensityOperator rho = io::state_from_json(json::parse(out.out));
  CHECK(max_abs(ComplexMatrix(rho.matrix() - identity(4) / 4.0)) < 1e-15);
  CHECK(cli::cmd_make_state("werner", {}, "").exit_code == cli::kInvalidInput);
  CHECK(cli::cmd_make_state("nope", {}, "").exit_code == cli::kInvalidInput);
}

TEST_CASE("text rendering", "[cli]") {
  const std::string bell = write_state("bell.json", bell_state(BellKind::PhiPlus));
  cli::Options o = options();
  o.format = cli::Format::text;
  const cli::Output out = cli::cmd_compute("nb", bell, bell, o);
  CHECK_THAT(out.out, ContainsSubstring("method: \"pure_closed_form\""));
  CHECK_THAT(out.out, ContainsSubstring("seed 1"));
}

TEST_CASE("executable exit codes", "[cli]") {
  const std::string bell = write_state("bell.json", bell_state(BellKind::PhiPlus));
  const std::string tri = write_state("tri.json", maximally_mixed({2, 2, 2}));
  const std::string garbage = write("garbage.json", "{\"dims\": [2], ");
  CHECK(run_exe("compute nb --a " + bell + " --b " + bell) == 0);
  CHECK(run_exe("compute min --a " + garbage) == 2);
  CHECK(run_exe("compute min --a " + tri) == 3);
  CHECK(run_exe("compute nope --a " + bell) == 2);
  CHECK(run_exe("--help") == 0);
}
