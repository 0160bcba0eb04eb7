#pragma once

// Command implementations behind tools/nonbiloc. Each command returns its
// exit code and rendered output instead of printing, so tests drive them
// directly.

#include <chrono>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nonbiloc/io.hpp"

namespace nonbiloc::cli {

using io::json;

enum ExitCode : int {
  kSuccess = 0,
  kRegressionFailure = 1,
  kInvalidInput = 2,
  kDimensionIncompatible = 3,
};

enum class Format { json, text };

struct Options {
  OptimizerConfig optimizer;
  double tol = kHermitianTol;  // state validation tolerance
  Format format = Format::json;
  Side side = Side::A;
};

struct Output {
  int exit_code = kSuccess;
  std::string out;
  std::string err;
};

namespace detail {

inline io::ReportConfig report_config(const Options& o) {
  return io::ReportConfig{o.optimizer.seed,         o.optimizer.restarts,
                          o.tol,                    o.optimizer.max_sweeps,
                          o.optimizer.convergence_tol, o.optimizer.degeneracy_tol};
}

inline std::string shortest(double x) { return json(x).dump(); }

inline Output fail(int code, const std::string& message) {
  return Output{code, {}, "error: " + message + "\n"};
}

// Loads a state; any rejection is an invalid-input failure.
inline std::optional<io::LoadedState> load(const std::string& path, double tol,
                                           Output& failure) {
  try {
    return io::load_state(path, tol);
  } catch (const Error& e) {
    failure = fail(kInvalidInput, path + ": " + e.what());
    return std::nullopt;
  }
}

inline bool bipartite(const io::LoadedState& s) { return s.state.dims().size() == 2; }

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline std::string render_text(const io::Report& r) {
  std::ostringstream os;
  os << r.command << "\n";
  for (const auto& in : r.inputs) {
    os << "  input " << in.role << ": " << in.path;
    if (!in.label.empty()) os << " [" << in.label << "]";
    os << "\n";
  }
  for (auto it = r.result.begin(); it != r.result.end(); ++it) {
    if (it.key() == "certificate") continue;
    os << "  " << it.key() << ": " << it.value().dump() << "\n";
  }
  os << "  seed " << r.config.seed << ", restarts " << r.config.restarts << ", "
     << r.duration_seconds << " s\n";
  return os.str();
}

inline Output emit(const io::Report& r, Format f) {
  if (f == Format::text) return Output{kSuccess, render_text(r), {}};
  return Output{kSuccess, json(r).dump(2) + "\n", {}};
}

}  // namespace detail

/// kind: nb | min | min_original | discord | discord_modified.
inline Output cmd_compute(const std::string& kind, const std::string& path_a,
                          const std::optional<std::string>& path_b, const Options& opt) {
  const detail::Stopwatch clock;
  Output failure;
  const auto a = detail::load(path_a, opt.tol, failure);
  if (!a) return failure;
  io::Report report;
  report.command = "compute " + kind;
  report.config = detail::report_config(opt);
  report.inputs.push_back({"a", path_a, a->label, a->hash});

  QuantifierResult result;
  try {
    if (kind == "nb") {
      if (!path_b) return detail::fail(kInvalidInput, "compute nb needs --b");
      const auto b = detail::load(*path_b, opt.tol, failure);
      if (!b) return failure;
      report.inputs.push_back({"b", *path_b, b->label, b->hash});
      if (!detail::bipartite(*a) || !detail::bipartite(*b)) {
        return detail::fail(kDimensionIncompatible, "nb needs two bipartite states");
      }
      result = nb_optimize(a->state, b->state, opt.optimizer);
    } else {
      if (!detail::bipartite(*a)) {
        return detail::fail(kDimensionIncompatible, kind + " needs a bipartite state");
      }
      if (kind == "min") {
        result = min_modified(a->state, opt.side, opt.optimizer);
      } else if (kind == "min_original") {
        result = min_original(a->state, opt.side, opt.optimizer);
      } else if (kind == "discord") {
        result = discord_geometric(a->state, DiscordVariant::plain, opt.side, opt.optimizer);
      } else if (kind == "discord_modified") {
        result = discord_geometric(a->state, DiscordVariant::modified, opt.side, opt.optimizer);
      } else {
        return detail::fail(kInvalidInput, "unknown quantity '" + kind + "'");
      }
    }
  } catch (const Error& e) {
    const bool dims = e.kind() == ErrorKind::DimensionMismatch ||
                      e.kind() == ErrorKind::NotBipartite;
    return detail::fail(dims ? kDimensionIncompatible : kInvalidInput, e.what());
  }
  report.result = io::result_to_json(result);
  report.duration_seconds = clock.seconds();
  return detail::emit(report, opt.format);
}

/// Upper bound 1 - (sum of the nu smallest eigenvalues of Gamma Gamma^t), with
/// the exact value alongside when a closed form applies.
inline Output cmd_bound(const std::string& path_a, const std::string& path_b,
                        const Options& opt) {
  const detail::Stopwatch clock;
  Output failure;
  const auto a = detail::load(path_a, opt.tol, failure);
  if (!a) return failure;
  const auto b = detail::load(path_b, opt.tol, failure);
  if (!b) return failure;
  if (!detail::bipartite(*a) || !detail::bipartite(*b)) {
    return detail::fail(kDimensionIncompatible, "bound needs two bipartite states");
  }
  io::Report report;
  report.command = "bound";
  report.config = detail::report_config(opt);
  report.inputs = {{"a", path_a, a->label, a->hash}, {"b", path_b, b->label, b->hash}};
  const double bound = nb_bound(a->state, b->state);
  json r;
  r["bound"] = bound;
  r["method"] = std::string(to_string(Method::bound_only));
  r["exact"] = nullptr;
  OptimizerConfig cfg = opt.optimizer;
  cfg.use_closed_forms = true;
  const QuantifierResult q = nb_optimize(a->state, b->state, cfg);
  if (q.method != Method::optimizer) {
    r["exact"] = q.value;
    r["exact_method"] = std::string(to_string(q.method));
  }
  report.result = std::move(r);
  report.duration_seconds = clock.seconds();
  return detail::emit(report, opt.format);
}

inline Output cmd_bilocality(const std::string& path_a, const std::string& path_b,
                             const std::string& settings_path, const Options& opt) {
  const detail::Stopwatch clock;
  Output failure;
  const auto a = detail::load(path_a, opt.tol, failure);
  if (!a) return failure;
  const auto b = detail::load(path_b, opt.tol, failure);
  if (!b) return failure;
  std::optional<io::Settings> settings;
  std::string settings_text;
  try {
    settings_text = io::read_file(settings_path);
    settings = io::settings_from_json(io::parse_json(settings_text, settings_path));
  } catch (const Error& e) {
    const bool dims = e.kind() == ErrorKind::DimensionMismatch;
    return detail::fail(dims ? kDimensionIncompatible : kInvalidInput,
                        settings_path + ": " + e.what());
  }
  io::Report report;
  report.command = "bilocality";
  report.config = detail::report_config(opt);
  report.inputs = {{"a", path_a, a->label, a->hash},
                   {"b", path_b, b->label, b->hash},
                   {"settings", settings_path, "", io::fnv1a64(settings_text)}};
  try {
    const BilocalityReport br =
        evaluate_bilocality(a->state, b->state, settings->a0, settings->a1, settings->bsm,
                            settings->c0, settings->c1);
    report.result = json{{"I", br.i}, {"J", br.j}, {"S", br.s.s}, {"violation", br.s.violation}};
  } catch (const Error& e) {
    const bool dims = e.kind() == ErrorKind::DimensionMismatch ||
                      e.kind() == ErrorKind::NotBipartite;
    return detail::fail(dims ? kDimensionIncompatible : kInvalidInput, e.what());
  }
  report.duration_seconds = clock.seconds();
  return detail::emit(report, opt.format);
}

/// Named catalog states: bell (phi+ | phi- | psi+ | psi-), classical,
/// bell_diagonal (4 weights), werner (visibility), mixed (d_a, d_b).
inline DensityOperator catalog_state(const std::string& name,
                                     const std::vector<double>& params) {
  auto need = [&](std::size_t n) {
    if (params.size() != n) {
      throw Error(ErrorKind::BadParameter,
                  name + " takes " + std::to_string(n) + " parameter(s)");
    }
  };
  if (name == "phi+" || name == "bell") return bell_state(BellKind::PhiPlus);
  if (name == "phi-") return bell_state(BellKind::PhiMinus);
  if (name == "psi+") return bell_state(BellKind::PsiPlus);
  if (name == "psi-") return bell_state(BellKind::PsiMinus);
  if (name == "classical") return classical_correlated();
  if (name == "bell_diagonal") {
    need(4);
    return bell_diagonal({params[0], params[1], params[2], params[3]});
  }
  if (name == "werner") {
    need(1);
    return werner(params[0]);
  }
  if (name == "mixed") {
    need(2);
    if (params[0] < 1 || params[1] < 1) throw Error(ErrorKind::BadParameter, "bad dims");
    return maximally_mixed({static_cast<std::size_t>(params[0]),
                            static_cast<std::size_t>(params[1])});
  }
  throw Error(ErrorKind::BadParameter, "unknown catalog state '" + name + "'");
}

inline Output cmd_make_state(const std::string& name, const std::vector<double>& params,
                             const std::string& label) {
  try {
    const DensityOperator rho = catalog_state(name, params);
    return Output{kSuccess, io::state_to_json(rho, label.empty() ? name : label).dump(2) + "\n",
                  {}};
  } catch (const Error& e) {
    return detail::fail(kInvalidInput, e.what());
  }
}

/// Settings file with A0 = C0 = (Z + X)/sqrt2, A1 = C1 = (Z - X)/sqrt2 and the
/// standard Bell state measurement.
inline Output cmd_make_settings() {
  const double r = 1.0 / std::sqrt(2.0);
  ComplexMatrix plus(2, 2), minus(2, 2);
  plus << r, r, r, -r;
  minus << r, -r, -r, -r;
  const json j = io::settings_to_json(plus, minus, plus, minus, standard_bsm().bit_values);
  return Output{kSuccess, j.dump(2) + "\n", {}};
}

struct RegressionCheck {
  std::string name;
  double computed = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  std::string relation;  // "eq": |c - e| <= tol, "ge": c >= e - tol
  bool pass = false;
};

inline RegressionCheck make_check(std::string name, double computed, double expected,
                                  double tolerance, std::string relation = "eq") {
  const bool pass = relation == "eq" ? std::abs(computed - expected) <= tolerance
                                     : computed >= expected - tolerance;
  return RegressionCheck{std::move(name), computed, expected, tolerance,
                         std::move(relation), pass};
}

/// Hadamard-rotated product basis H (x) H on two qubits.
inline ProjectiveMeasurement hadamard_product_measurement() {
  ComplexMatrix h(2, 2);
  h << 1, 1, 1, -1;
  h /= std::sqrt(2.0);
  return ProjectiveMeasurement::from_basis(tensor(h, h));
}

inline std::vector<RegressionCheck> run_examples(const OptimizerConfig& base) {
  std::vector<RegressionCheck> checks;
  OptimizerConfig forced = base;
  forced.use_closed_forms = false;

  // Two Bell pairs.
  {
    const DensityOperator bell = bell_state(BellKind::PhiPlus);
    const auto closed = nb_optimize(bell, bell, base);
    checks.push_back(make_check("example1.pure_closed_form", closed.value, 0.75, 1e-12));
    const auto search = nb_optimize(bell, bell, forced);
    checks.push_back(make_check("example1.optimizer", search.value, 0.75, 1e-9));
  }
  // Classically correlated inputs.
  {
    const DensityOperator rc = classical_correlated();
    const auto search = nb_optimize(rc, rc, forced);
    checks.push_back(make_check("example2.optimizer", search.value, 0.75, 1e-6));
    checks.push_back(make_check("example2.hadamard_objective",
                                nb_objective(rc, rc, hadamard_product_measurement()),
                                0.25, 1e-12));
    checks.push_back(make_check("example2.bound", nb_bound(rc, rc), 1.0, 1e-12));
  }
  // Bell-diagonal beta with weights (1/3, 1/3, 1/3, 0).
  {
    const DensityOperator beta = bell_diagonal({1.0 / 3, 1.0 / 3, 1.0 / 3, 0.0});
    const auto closed = min_modified(beta, Side::A, base);
    checks.push_back(make_check("example3.min_modified.closed_form", closed.value,
                                1.0 / 6, 1e-9));
    const auto search = min_modified(beta, Side::A, forced);
    checks.push_back(make_check("example3.min_modified.optimizer", search.value,
                                1.0 / 6, 1e-9));
    const double min_obj = 1.0 - closed.value;
    const double squared = 1.0 - min_obj * min_obj;
    checks.push_back(make_check("example3.squared_minimum", squared, 11.0 / 36, 1e-9));
    const double bsm_obj = nb_objective(swap_parties(beta), beta, standard_bsm().projectors);
    checks.push_back(make_check("example3.bsm_objective", bsm_obj, 7.0 / 12, 1e-12));
    const auto nb = nb_optimize(swap_parties(beta), beta, base);
    checks.push_back(make_check("example3.nb_lower_bound", nb.value, 5.0 / 12, 1e-6, "ge"));
    checks.push_back(make_check("example3.chain.nb_ge_squared", nb.value, squared, 1e-9, "ge"));
    checks.push_back(make_check("example3.chain.squared_ge_min", squared, closed.value,
                                1e-9, "ge"));
    checks.push_back(make_check("example3.bound_dominates", nb_bound(swap_parties(beta), beta),
                                nb.value, 1e-9, "ge"));
  }
  return checks;
}

inline Output cmd_examples(const Options& opt) {
  const std::vector<RegressionCheck> checks = run_examples(opt.optimizer);
  bool all = true;
  for (const auto& c : checks) all = all && c.pass;
  Output out;
  out.exit_code = all ? kSuccess : kRegressionFailure;
  if (opt.format == Format::json) {
    json arr = json::array();
    for (const auto& c : checks) {
      arr.push_back({{"name", c.name},
                     {"computed", c.computed},
                     {"expected", c.expected},
                     {"tolerance", c.tolerance},
                     {"relation", c.relation},
                     {"pass", c.pass}});
    }
    json j{{"command", "examples"},
           {"config", detail::report_config(opt)},
           {"checks", arr},
           {"passed", all},
           {"version", io::kVersion}};
    out.out = j.dump(2) + "\n";
  } else {
    std::ostringstream os;
    for (const auto& c : checks) {
      os << (c.pass ? "PASS " : "FAIL ") << c.name << "  computed=" << detail::shortest(c.computed)
         << (c.relation == "eq" ? "  expected=" : "  expected>=")
         << detail::shortest(c.expected) << "  tol=" << c.tolerance << "\n";
    }
    os << (all ? "all examples passed\n" : "example regression FAILED\n");
    out.out = os.str();
  }
  return out;
}

}  // namespace nonbiloc::cli
