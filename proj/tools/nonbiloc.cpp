// nonbiloc: measurement-induced nonbilocality from the command line.
//
//   nonbiloc compute nb --a ab.json --b cd.json [--restarts N --seed S]
//   nonbiloc compute min --a ab.json [--side A|B]
//   nonbiloc bound --a ab.json --b cd.json
//   nonbiloc bilocality --a ab.json --b cd.json --settings s.json
//   nonbiloc examples [--json]
//   nonbiloc make-state bell_diagonal 0.3333 0.3333 0.3333 0
//   nonbiloc make-settings

#include <iostream>

#include "CLI11.hpp"
#include "nonbiloc/cli.hpp"

namespace {

using namespace nonbiloc;

struct Flags {
  std::size_t restarts = 16;
  std::uint64_t seed = 0;
  double tol = kHermitianTol;
  std::size_t max_sweeps = 500;
  std::size_t threads = 0;
  bool json = false;
  bool text = false;
  bool no_closed_forms = false;
  std::string side = "A";
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--restarts", f.restarts, "optimizer restarts")->capture_default_str();
  cmd->add_option("--seed", f.seed, "base seed for random restarts")->capture_default_str();
  cmd->add_option("--tol", f.tol, "state validation tolerance")->capture_default_str();
  cmd->add_option("--max-sweeps", f.max_sweeps, "sweep cap per restart")->capture_default_str();
  cmd->add_option("--threads", f.threads, "worker threads (0: NONBILOC_THREADS or all cores)");
  cmd->add_flag("--json", f.json, "JSON report");
  cmd->add_flag("--text", f.text, "human-readable summary");
}

cli::Options to_options(const Flags& f, cli::Format fallback) {
  cli::Options o;
  o.optimizer.restarts = f.restarts;
  o.optimizer.seed = f.seed;
  o.optimizer.max_sweeps = f.max_sweeps;
  o.optimizer.threads = f.threads;
  o.optimizer.use_closed_forms = !f.no_closed_forms;
  o.tol = f.tol;
  o.side = f.side == "B" ? Side::B : Side::A;
  o.format = f.json ? cli::Format::json : f.text ? cli::Format::text : fallback;
  return o;
}

int finish(const cli::Output& out) {
  std::cout << out.out;
  std::cerr << out.err;
  return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"measurement-induced nonbilocality of entanglement swapping networks"};
  app.set_version_flag("--version", std::string(io::kVersion));
  app.require_subcommand(1);
  Flags flags;

  std::string kind, path_a, path_b, settings;
  auto* compute = app.add_subcommand("compute", "evaluate a quantifier");
  compute->add_option("kind", kind, "nb | min | min_original | discord | discord_modified")
      ->required()
      ->check(CLI::IsMember({"nb", "min", "min_original", "discord", "discord_modified"}));
  compute->add_option("--a", path_a, "state file (rho_AB)")->required();
  compute->add_option("--b", path_b, "second state file (rho_CD), nb only");
  compute->add_option("--side", flags.side, "measured party for local quantifiers")
      ->check(CLI::IsMember({"A", "B"}));
  compute->add_flag("--no-closed-forms", flags.no_closed_forms, "always run the optimizer");
  add_common(compute, flags);

  auto* bound = app.add_subcommand("bound", "spectral upper bound on N_H^b");
  bound->add_option("--a", path_a, "state file (rho_AB)")->required();
  bound->add_option("--b", path_b, "state file (rho_CD)")->required();
  add_common(bound, flags);

  auto* biloc = app.add_subcommand("bilocality", "bilocality inequality value S");
  biloc->add_option("--a", path_a, "state file (rho_AB)")->required();
  biloc->add_option("--b", path_b, "state file (rho_CD)")->required();
  biloc->add_option("--settings", settings, "observables and BSM bits")->required();
  add_common(biloc, flags);

  auto* examples = app.add_subcommand("examples", "regression run of the reference examples");
  add_common(examples, flags);

  std::string state_name, label;
  std::vector<double> params;
  auto* make_state = app.add_subcommand("make-state", "write a catalog state file");
  make_state->add_option("name", state_name,
                         "phi+ phi- psi+ psi- classical bell_diagonal werner mixed")
      ->required();
  make_state->add_option("params", params, "state parameters");
  make_state->add_option("--label", label, "label stored in the file");

  auto* make_settings =
      app.add_subcommand("make-settings", "write the standard bilocality settings file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kInvalidInput;
  }

  if (*compute) {
    const std::optional<std::string> b =
        path_b.empty() ? std::nullopt : std::optional<std::string>(path_b);
    return finish(cli::cmd_compute(kind, path_a, b, to_options(flags, cli::Format::json)));
  }
  if (*bound) return finish(cli::cmd_bound(path_a, path_b, to_options(flags, cli::Format::json)));
  if (*biloc) {
    return finish(
        cli::cmd_bilocality(path_a, path_b, settings, to_options(flags, cli::Format::json)));
  }
  if (*examples) return finish(cli::cmd_examples(to_options(flags, cli::Format::text)));
  if (*make_state) return finish(cli::cmd_make_state(state_name, params, label));
  if (*make_settings) return finish(cli::cmd_make_settings());
  return cli::kInvalidInput;
}
