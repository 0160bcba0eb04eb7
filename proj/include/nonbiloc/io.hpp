#pragma once

// JSON encodings shared by the command line front end.
//
//   state file:    {"label": str?, "dims": [int, ...], "matrix": [[[re, im], ...], ...]}
//   settings file: {"a0": M, "a1": M, "c0": M, "c1": M, "bsm_bits": [[b0, b1] x 4],
//                   "bsm_basis": M?}   (bsm_basis columns are Bob's outcome vectors;
//                                       default Phi+, Phi-, Psi+, Psi-)

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nonbiloc/bilocality.hpp"
#include "nonbiloc/quantifiers.hpp"

namespace nonbiloc::io {

using json = nlohmann::json;

inline json matrix_to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back({m(i, j).real(), m(i, j).imag()});
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline ComplexMatrix matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) {
    throw Error(ErrorKind::ParseError, what + ": matrix must be a non-empty array of rows");
  }
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) throw Error(ErrorKind::ParseError, what + ": empty matrix row");
  ComplexMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw Error(ErrorKind::ParseError, what + ": ragged matrix rows");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      const json& e = j[r][c];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
        throw Error(ErrorKind::ParseError,
                    what + ": entries must be [re, im] number pairs");
      }
      m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  }
  return m;
}

inline json vector_to_json(const ComplexVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v[i].real(), v[i].imag()});
  return out;
}

struct LoadedState {
  DensityOperator state;
  std::string label;
  std::string hash;
};

inline std::string fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, "cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, what + ": " + e.what());
  }
}

/// Parses and validates; anything that is not a valid density operator is
/// rejected here.
inline DensityOperator state_from_json(const json& j, double tol = kHermitianTol) {
  if (!j.is_object() || !j.contains("dims") || !j.contains("matrix")) {
    throw Error(ErrorKind::ParseError, "state file needs \"dims\" and \"matrix\"");
  }
  Dims dims;
  for (const auto& d : j.at("dims")) {
    if (!d.is_number_integer() || d.get<long long>() < 1) {
      throw Error(ErrorKind::ParseError, "dims must be positive integers");
    }
    dims.push_back(d.get<std::size_t>());
  }
  return validate_density(matrix_from_json(j.at("matrix"), "state"), std::move(dims), tol);
}

inline json state_to_json(const DensityOperator& rho, const std::string& label = {}) {
  json j;
  if (!label.empty()) j["label"] = label;
  j["dims"] = rho.dims();
  j["matrix"] = matrix_to_json(rho.matrix());
  return j;
}

inline LoadedState load_state(const std::string& path, double tol = kHermitianTol) {
  const std::string text = read_file(path);
  const json j = parse_json(text, path);
  LoadedState out{state_from_json(j, tol), j.value("label", std::string{}), fnv1a64(text)};
  return out;
}

struct Settings {
  DichotomicObservable a0, a1, c0, c1;
  BsmAssignment bsm;
};

inline json settings_to_json(const ComplexMatrix& a0, const ComplexMatrix& a1,
                             const ComplexMatrix& c0, const ComplexMatrix& c1,
                             const std::vector<BitPair>& bits) {
  json j;
  j["a0"] = matrix_to_json(a0);
  j["a1"] = matrix_to_json(a1);
  j["c0"] = matrix_to_json(c0);
  j["c1"] = matrix_to_json(c1);
  json b = json::array();
  for (const auto& [b0, b1] : bits) b.push_back({b0, b1});
  j["bsm_bits"] = b;
  return j;
}

inline Settings settings_from_json(const json& j) {
  for (const char* key : {"a0", "a1", "c0", "c1", "bsm_bits"}) {
    if (!j.contains(key)) {
      throw Error(ErrorKind::ParseError, std::string("settings file missing \"") + key + "\"");
    }
  }
  std::vector<BitPair> bits;
  for (const auto& b : j.at("bsm_bits")) {
    if (!b.is_array() || b.size() != 2 || !b[0].is_number_integer() ||
        !b[1].is_number_integer()) {
      throw Error(ErrorKind::ParseError, "bsm_bits entries must be [b0, b1] integer pairs");
    }
    bits.emplace_back(b[0].get<int>(), b[1].get<int>());
  }
  ProjectiveMeasurement pm = standard_bsm().projectors;
  if (j.contains("bsm_basis")) {
    pm = ProjectiveMeasurement::from_basis(matrix_from_json(j.at("bsm_basis"), "bsm_basis"));
  }
  return Settings{DichotomicObservable(matrix_from_json(j.at("a0"), "a0")),
                  DichotomicObservable(matrix_from_json(j.at("a1"), "a1")),
                  DichotomicObservable(matrix_from_json(j.at("c0"), "c0")),
                  DichotomicObservable(matrix_from_json(j.at("c1"), "c1")),
                  BsmAssignment(std::move(pm), std::move(bits))};
}

inline json measurement_to_json(const ProjectiveMeasurement& pm) {
  json vs = json::array();
  for (const auto& v : pm.vectors()) vs.push_back(vector_to_json(v));
  return vs;
}

inline json result_to_json(const QuantifierResult& r) {
  json j;
  j["value"] = r.value;
  j["method"] = std::string(to_string(r.method));
  j["bound"] = r.bound ? json(*r.bound) : json(nullptr);
  j["certificate"] = r.certificate ? measurement_to_json(*r.certificate) : json(nullptr);
  j["diagnostics"] = {{"restarts", r.diagnostics.restarts},
                      {"iterations", r.diagnostics.iterations},
                      {"objective", r.diagnostics.objective},
                      {"admissibility_residual", r.diagnostics.residual}};
  return j;
}

struct InputInfo {
  std::string role;
  std::string path;
  std::string label;
  std::string hash;
  bool operator==(const InputInfo&) const = default;
};

struct ReportConfig {
  std::uint64_t seed = 0;
  std::size_t restarts = 16;
  double tol = kHermitianTol;
  std::size_t max_sweeps = 500;
  double convergence_tol = 1e-12;
  double degeneracy_tol = kDegeneracyTol;
  bool operator==(const ReportConfig&) const = default;
};

inline constexpr const char* kVersion = "0.1.0";

struct Report {
  std::string command;
  std::vector<InputInfo> inputs;
  json result;
  ReportConfig config;
  double duration_seconds = 0.0;
  std::string version = kVersion;
  bool operator==(const Report&) const = default;
};

inline void to_json(json& j, const InputInfo& in) {
  j = json{{"role", in.role}, {"path", in.path}, {"label", in.label}, {"hash", in.hash}};
}
inline void from_json(const json& j, InputInfo& in) {
  j.at("role").get_to(in.role);
  j.at("path").get_to(in.path);
  j.at("label").get_to(in.label);
  j.at("hash").get_to(in.hash);
}
inline void to_json(json& j, const ReportConfig& c) {
  j = json{{"seed", c.seed},
           {"restarts", c.restarts},
           {"tol", c.tol},
           {"max_sweeps", c.max_sweeps},
           {"convergence_tol", c.convergence_tol},
           {"degeneracy_tol", c.degeneracy_tol}};
}
inline void from_json(const json& j, ReportConfig& c) {
  j.at("seed").get_to(c.seed);
  j.at("restarts").get_to(c.restarts);
  j.at("tol").get_to(c.tol);
  j.at("max_sweeps").get_to(c.max_sweeps);
  j.at("convergence_tol").get_to(c.convergence_tol);
  j.at("degeneracy_tol").get_to(c.degeneracy_tol);
}
inline void to_json(json& j, const Report& r) {
  j = json{{"command", r.command},
           {"inputs", r.inputs},
           {"result", r.result},
           {"config", r.config},
           {"duration_seconds", r.duration_seconds},
           {"version", r.version}};
}
inline void from_json(const json& j, Report& r) {
  j.at("command").get_to(r.command);
  j.at("inputs").get_to(r.inputs);
  r.result = j.at("result");
  j.at("config").get_to(r.config);
  j.at("duration_seconds").get_to(r.duration_seconds);
  j.at("version").get_to(r.version);
}

}  // namespace nonbiloc::io
