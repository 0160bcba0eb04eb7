#pragma once

// Correlation quantifiers built on Hilbert-Schmidt disturbance by admissible
// local measurements:
//   nonbilocality N_H^b(rho_AB (x) rho_CD), measured on the middle pair B, C;
//   modified MIN N_H and original MIN N, measured on one party;
//   geometric discord D and its square-root variant D_H.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nonbiloc/optimizer.hpp"

namespace nonbiloc {

enum class Method {
  pure_closed_form,
  both_nondegenerate,
  qubit_closed_form,
  optimizer,
  bound_only,
};

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::pure_closed_form: return "pure_closed_form";
    case Method::both_nondegenerate: return "both_nondegenerate";
    case Method::qubit_closed_form: return "qubit_closed_form";
    case Method::optimizer: return "optimizer";
    case Method::bound_only: return "bound_only";
  }
  return "unknown";
}

struct Diagnostics {
  std::size_t restarts = 0;
  std::size_t iterations = 0;  // optimizer sweeps summed over restarts
  double objective = 0.0;      // tr S Pi(S) at the certificate
  double residual = 0.0;       // admissibility residual of the certificate
};

struct QuantifierResult {
  double value = 0.0;
  Method method = Method::optimizer;
  std::optional<ProjectiveMeasurement> certificate;
  std::optional<double> bound;
  Diagnostics diagnostics;
};

enum class Side { A, B };
enum class DiscordVariant { plain, modified };

inline constexpr double kMaximallyMixedTol = 1e-8;

namespace detail {

inline double clamp_unit(double x) { return std::clamp(x, 0.0, 1.0); }

inline void require_bipartite(const DensityOperator& rho, const char* name) {
  if (rho.dims().size() != 2) {
    throw Error(ErrorKind::NotBipartite,
                std::string(name) + " must have exactly two subsystems");
  }
}

inline bool is_maximally_mixed_qubit(const ComplexMatrix& m) {
  return m.rows() == 2 &&
         max_abs(ComplexMatrix(m - identity(2) / 2.0)) <= kMaximallyMixedTol;
}

inline double sum_fourth_powers(const std::vector<double>& c) {
  double s = 0.0;
  for (double x : c) s += x * x * x * x;
  return s;
}

// ||C Gamma||_F^2 with c_fk = <f|Z_k|f>: the dephased overlap of a local
// measurement on the factor indexing Gamma's rows.
inline double local_overlap(const RealMatrix& gamma, const ProjectiveMeasurement& pm,
                            const HermitianBasis& basis) {
  RealMatrix c(pm.size(), basis.operators.size());
  for (std::size_t f = 0; f < pm.size(); ++f) {
    const ComplexVector& v = pm.vectors()[f];
    for (std::size_t k = 0; k < basis.operators.size(); ++k) {
      c(f, k) = v.dot(basis.operators[k] * v).real();
    }
  }
  return (c * gamma).squaredNorm();
}

// Qubit measurement {(I +- n.sigma)/2} as an orthonormal basis.
inline ProjectiveMeasurement bloch_measurement(const RealVector& n) {
  ComplexMatrix ns(2, 2);
  ns << Complex(n[2]), Complex(n[0], -n[1]), Complex(n[0], n[1]), Complex(-n[2]);
  const Spectrum s = eig_hermitian(ns);
  ComplexMatrix basis(2, 2);
  basis.col(0) = s.eigenvectors.col(1);  // +n
  basis.col(1) = s.eigenvectors.col(0);  // -n
  return ProjectiveMeasurement::from_basis(basis);
}

struct QubitSideOptimum {
  double overlap;  // ||r||^2 + r_min
  ProjectiveMeasurement measurement;
};

// Minimal dephased overlap on a maximally mixed qubit whose Gamma rows are
// (r; R): min over Bloch directions c of ||r||^2 + c R R^t c^t.
inline QubitSideOptimum qubit_side_optimum(const CorrelationMatrix& gamma) {
  const FirstRowSplit split = split_first_row(gamma);
  const Eigen::Matrix3d rrt = split.R * split.R.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(rrt);
  const RealVector c = es.eigenvectors().col(0);
  return {split.r.squaredNorm() + es.eigenvalues()[0], bloch_measurement(c)};
}

// Network operator sqrt(rho_AB) (x) sqrt(rho_CD) reordered to (B C) (x) (A D).
inline MeasurementProblem network_problem(const DensityOperator& rho_ab,
                                          const DensityOperator& rho_cd) {
  const ComplexMatrix s = tensor(psd_sqrt(rho_ab.matrix()), psd_sqrt(rho_cd.matrix()));
  const Dims dims{rho_ab.dims()[0], rho_ab.dims()[1], rho_cd.dims()[0], rho_cd.dims()[1]};
  return MeasurementProblem{permute_systems(s, dims, {1, 2, 0, 3}),
                            dims[1] * dims[2], dims[0] * dims[3]};
}

inline ComplexMatrix middle_marginal(const DensityOperator& rho_ab,
                                     const DensityOperator& rho_cd) {
  return tensor(partial_trace(rho_ab.matrix(), rho_ab.dims(), {1}),
                partial_trace(rho_cd.matrix(), rho_cd.dims(), {0}));
}

// `op` on a bipartite space reordered so that the measured party comes first.
inline MeasurementProblem local_problem(const ComplexMatrix& op, const Dims& dims,
                                        Side side) {
  if (side == Side::A) return MeasurementProblem{op, dims[0], dims[1]};
  return MeasurementProblem{permute_systems(op, dims, {1, 0}), dims[1], dims[0]};
}

inline ComplexMatrix measured_marginal(const DensityOperator& rho, Side side) {
  return partial_trace(rho.matrix(), rho.dims(), {side == Side::A ? 0u : 1u});
}

inline QuantifierResult from_search(SearchResult&& sr, const ComplexMatrix& marginal,
                                    double value) {
  QuantifierResult out;
  out.value = clamp_unit(value);
  out.method = Method::optimizer;
  ComplexMatrix basis(sr.vectors.front().size(), sr.vectors.size());
  for (std::size_t h = 0; h < sr.vectors.size(); ++h) {
    basis.col(static_cast<Eigen::Index>(h)) = sr.vectors[h];
  }
  out.certificate = ProjectiveMeasurement::from_basis(basis);
  out.diagnostics.restarts = sr.restarts;
  out.diagnostics.iterations = sr.sweeps;
  out.diagnostics.objective = sr.objective;
  out.diagnostics.residual = is_admissible(*out.certificate, marginal).residual();
  return out;
}

}  // namespace detail

/// tr S Pi(S) for S on A (x) B (x) C (x) D and a measurement on B (x) C that
/// must leave rho_bc undisturbed. The nonbilocality contribution of the
/// measurement is 1 - objective.
inline double objective(const ComplexMatrix& sqrt_joint, const Dims& dims4,
                        const ProjectiveMeasurement& pm, const ComplexMatrix& rho_bc) {
  const Admissibility adm = is_admissible(pm, rho_bc);
  if (!adm.admissible) {
    throw Error(ErrorKind::InadmissibleMeasurement,
                "measurement disturbs the B C marginal, residual " +
                    std::to_string(adm.residual()),
                adm.residual());
  }
  return hs_inner(sqrt_joint, apply_measurement(pm, sqrt_joint, dims4)).real();
}

inline double nb_objective(const DensityOperator& rho_ab, const DensityOperator& rho_cd,
                           const ProjectiveMeasurement& pm) {
  detail::require_bipartite(rho_ab, "rho_AB");
  detail::require_bipartite(rho_cd, "rho_CD");
  const ComplexMatrix s = tensor(psd_sqrt(rho_ab.matrix()), psd_sqrt(rho_cd.matrix()));
  const Dims dims{rho_ab.dims()[0], rho_ab.dims()[1], rho_cd.dims()[0], rho_cd.dims()[1]};
  return objective(s, dims, pm, detail::middle_marginal(rho_ab, rho_cd));
}

/// Closed form for pure inputs: 1 - (sum_i lambda_i^4)(sum_j mu_j^4), with
/// Schmidt amplitudes lambda, mu.
inline double nb_pure(const std::vector<double>& lambda, const std::vector<double>& mu) {
  for (const auto* c : {&lambda, &mu}) {
    double s = 0.0;
    for (double x : *c) s += x * x;
    if (std::abs(s - 1.0) > 1e-10) {
      throw Error(ErrorKind::NotNormalized,
                  "Schmidt coefficients squared sum to " + std::to_string(s),
                  std::abs(s - 1.0));
    }
  }
  return 1.0 - detail::sum_fourth_powers(lambda) * detail::sum_fourth_powers(mu);
}

/// 1 minus the sum of the nu smallest eigenvalues of Gamma Gamma^t.
inline double nb_bound(const CorrelationMatrix& gamma_bcad, std::size_t nu) {
  const auto rows = static_cast<std::size_t>(gamma_bcad.gamma.rows());
  if (nu == 0 || rows != nu * nu) {
    throw Error(ErrorKind::DimensionMismatch,
                "nb_bound: Gamma has " + std::to_string(rows) +
                    " rows, expected nu^2 = " + std::to_string(nu * nu));
  }
  const Eigen::MatrixXd ggt = gamma_bcad.gamma * gamma_bcad.gamma.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ggt, Eigen::EigenvaluesOnly);
  return 1.0 - es.eigenvalues().head(static_cast<Eigen::Index>(nu)).sum();
}

inline CorrelationMatrix state_gamma(const DensityOperator& rho) {
  return correlation_matrix(psd_sqrt(rho.matrix()), build_basis(rho.dims()[0]),
                            build_basis(rho.dims()[1]));
}

inline double nb_bound(const DensityOperator& rho_ab, const DensityOperator& rho_cd) {
  detail::require_bipartite(rho_ab, "rho_AB");
  detail::require_bipartite(rho_cd, "rho_CD");
  return nb_bound(gamma_bcad(state_gamma(rho_ab), state_gamma(rho_cd)),
                  rho_ab.dims()[1] * rho_cd.dims()[0]);
}

/// Both middle marginals nondegenerate: the spectral product measurement
/// {|e><e| (x) |f><f|} and
///   N = 1 - tr B Gamma_AB^t Gamma_AB B^t * tr C Gamma_CD Gamma_CD^t C^t.
/// The value is exact whenever rho_B (x) rho_C has no repeated eigenvalue
/// across different (e, f).
inline QuantifierResult nb_both_nondegenerate(const DensityOperator& rho_ab,
                                              const DensityOperator& rho_cd,
                                              double degeneracy_tol = kDegeneracyTol) {
  detail::require_bipartite(rho_ab, "rho_AB");
  detail::require_bipartite(rho_cd, "rho_CD");
  const ComplexMatrix rho_b = partial_trace(rho_ab.matrix(), rho_ab.dims(), {1});
  const ComplexMatrix rho_c = partial_trace(rho_cd.matrix(), rho_cd.dims(), {0});
  const EigenspaceBlocks bb = eigenspace_blocks(rho_b, degeneracy_tol);
  const EigenspaceBlocks bc = eigenspace_blocks(rho_c, degeneracy_tol);
  if (!bb.nondegenerate() || !bc.nondegenerate()) {
    throw Error(ErrorKind::DegenerateMarginal,
                "rho_B and rho_C must both be nondegenerate");
  }
  const ProjectiveMeasurement pb = spectral_measurement(bb);
  const ProjectiveMeasurement pc = spectral_measurement(bc);
  const HermitianBasis basis_b = build_basis(rho_ab.dims()[1]);
  const HermitianBasis basis_c = build_basis(rho_cd.dims()[0]);
  const CorrelationMatrix g_ab = state_gamma(rho_ab);
  const CorrelationMatrix g_cd = state_gamma(rho_cd);
  const RealMatrix g_ab_t = g_ab.gamma.transpose();
  const double fb = detail::local_overlap(g_ab_t, pb, basis_b);
  const double fc = detail::local_overlap(g_cd.gamma, pc, basis_c);

  QuantifierResult out;
  out.value = detail::clamp_unit(1.0 - fb * fc);
  out.method = Method::both_nondegenerate;
  out.certificate = product_measurement(pb, pc);
  out.diagnostics.objective = fb * fc;
  out.diagnostics.residual =
      is_admissible(*out.certificate, detail::middle_marginal(rho_ab, rho_cd)).residual();
  return out;
}

/// rho_B nondegenerate and rho_C the maximally mixed qubit:
///   N = 1 - tr B Gamma_AB^t Gamma_AB B^t * (||r_CD||^2 + r_min),
/// the optimal measurement on C being along the minimal eigenvector of R R^t.
inline QuantifierResult nb_qubit_free_side(const DensityOperator& rho_ab,
                                           const DensityOperator& rho_cd,
                                           double degeneracy_tol = kDegeneracyTol) {
  detail::require_bipartite(rho_ab, "rho_AB");
  detail::require_bipartite(rho_cd, "rho_CD");
  const ComplexMatrix rho_b = partial_trace(rho_ab.matrix(), rho_ab.dims(), {1});
  const ComplexMatrix rho_c = partial_trace(rho_cd.matrix(), rho_cd.dims(), {0});
  const EigenspaceBlocks bb = eigenspace_blocks(rho_b, degeneracy_tol);
  if (!bb.nondegenerate()) {
    throw Error(ErrorKind::PreconditionViolated, "rho_B must be nondegenerate");
  }
  if (!detail::is_maximally_mixed_qubit(rho_c)) {
    throw Error(ErrorKind::PreconditionViolated,
                "rho_C must be the maximally mixed qubit state");
  }
  const ProjectiveMeasurement pb = spectral_measurement(bb);
  const CorrelationMatrix g_ab = state_gamma(rho_ab);
  const RealMatrix g_ab_t = g_ab.gamma.transpose();
  const double fb = detail::local_overlap(g_ab_t, pb, build_basis(rho_ab.dims()[1]));
  const detail::QubitSideOptimum qc = detail::qubit_side_optimum(state_gamma(rho_cd));

  QuantifierResult out;
  out.value = detail::clamp_unit(1.0 - fb * qc.overlap);
  out.method = Method::qubit_closed_form;
  out.certificate = product_measurement(pb, qc.measurement);
  out.diagnostics.objective = fb * qc.overlap;
  out.diagnostics.residual =
      is_admissible(*out.certificate, detail::middle_marginal(rho_ab, rho_cd)).residual();
  return out;
}

/// N_H^b by block-Givens search over admissible measurements on B (x) C. With
/// closed forms enabled, the route is: pure inputs; nondegenerate rho_B (x)
/// rho_C; one nondegenerate middle marginal with the other the maximally
/// mixed qubit; otherwise the optimizer. Optimizer values are lower bounds on
/// the maximum and are capped by nb_bound.
inline QuantifierResult nb_optimize(const DensityOperator& rho_ab,
                                    const DensityOperator& rho_cd,
                                    const OptimizerConfig& cfg = {}) {
  detail::require_bipartite(rho_ab, "rho_AB");
  detail::require_bipartite(rho_cd, "rho_CD");
  const double bound = nb_bound(rho_ab, rho_cd);
  const ComplexMatrix rho_bc = detail::middle_marginal(rho_ab, rho_cd);
  const EigenspaceBlocks blocks = eigenspace_blocks(rho_bc, cfg.degeneracy_tol);

  auto finish = [&](QuantifierResult r) {
    r.bound = bound;
    return r;
  };

  if (cfg.use_closed_forms) {
    const auto psi = as_pure(rho_ab);
    const auto phi = as_pure(rho_cd);
    if (psi && phi) {
      QuantifierResult out;
      out.value = detail::clamp_unit(nb_pure(schmidt_decompose(*psi).coefficients,
                                             schmidt_decompose(*phi).coefficients));
      out.method = Method::pure_closed_form;
      out.certificate = spectral_measurement(blocks);
      out.diagnostics.objective = 1.0 - out.value;
      out.diagnostics.residual = is_admissible(*out.certificate, rho_bc).residual();
      return finish(std::move(out));
    }
    if (blocks.nondegenerate()) {
      return finish(nb_both_nondegenerate(rho_ab, rho_cd, cfg.degeneracy_tol));
    }
    const ComplexMatrix rho_b = partial_trace(rho_ab.matrix(), rho_ab.dims(), {1});
    const ComplexMatrix rho_c = partial_trace(rho_cd.matrix(), rho_cd.dims(), {0});
    const bool b_nondeg = eigenspace_blocks(rho_b, cfg.degeneracy_tol).nondegenerate();
    const bool c_nondeg = eigenspace_blocks(rho_c, cfg.degeneracy_tol).nondegenerate();
    if (b_nondeg && detail::is_maximally_mixed_qubit(rho_c)) {
      return finish(nb_qubit_free_side(rho_ab, rho_cd, cfg.degeneracy_tol));
    }
    if (c_nondeg && detail::is_maximally_mixed_qubit(rho_b)) {
      // Relabel the network as rho_DC (x) rho_BA; the middle pair becomes C, B.
      QuantifierResult out = nb_qubit_free_side(swap_parties(rho_cd), swap_parties(rho_ab),
                                                cfg.degeneracy_tol);
      out.certificate = swap_factors(*out.certificate, rho_cd.dims()[0], rho_ab.dims()[1]);
      out.diagnostics.residual = is_admissible(*out.certificate, rho_bc).residual();
      return finish(std::move(out));
    }
  }

  SearchResult sr = optimize_measurement(detail::network_problem(rho_ab, rho_cd), blocks,
                                         Sense::Minimize, cfg);
  const double value = std::min(1.0 - sr.objective, bound);
  return finish(detail::from_search(std::move(sr), rho_bc, value));
}

/// Modified MIN N_H(rho) = 1 - min tr sqrt(rho) Pi(sqrt(rho)) over admissible
/// measurements on the chosen party.
inline QuantifierResult min_modified(const DensityOperator& rho, Side side = Side::A,
                                     const OptimizerConfig& cfg = {}) {
  detail::require_bipartite(rho, "rho");
  const ComplexMatrix marginal = detail::measured_marginal(rho, side);
  const EigenspaceBlocks blocks = eigenspace_blocks(marginal, cfg.degeneracy_tol);
  const ComplexMatrix sq = psd_sqrt(rho.matrix());

  if (cfg.use_closed_forms) {
    if (const auto psi = as_pure(rho)) {
      QuantifierResult out;
      const double s4 = detail::sum_fourth_powers(schmidt_decompose(*psi).coefficients);
      out.value = detail::clamp_unit(1.0 - s4);
      out.method = Method::pure_closed_form;
      out.certificate = spectral_measurement(blocks);
      out.diagnostics.objective = s4;
      out.diagnostics.residual = is_admissible(*out.certificate, marginal).residual();
      return out;
    }
    if (detail::is_maximally_mixed_qubit(marginal)) {
      const MeasurementProblem p = detail::local_problem(sq, rho.dims(), side);
      const Dims pd{p.measured_dim, p.rest_dim};
      const detail::QubitSideOptimum q = detail::qubit_side_optimum(
          correlation_matrix(p.op, build_basis(pd[0]), build_basis(pd[1])));
      QuantifierResult out;
      out.value = detail::clamp_unit(1.0 - q.overlap);
      out.method = Method::qubit_closed_form;
      out.certificate = q.measurement;
      out.diagnostics.objective = q.overlap;
      out.diagnostics.residual = is_admissible(*out.certificate, marginal).residual();
      return out;
    }
  }
  SearchResult sr = optimize_measurement(detail::local_problem(sq, rho.dims(), side),
                                         blocks, Sense::Minimize, cfg);
  const double value = 1.0 - sr.objective;
  return detail::from_search(std::move(sr), marginal, value);
}

/// Original MIN N(rho) = max ||rho - Pi(rho)||^2 = tr rho^2 - min tr rho Pi(rho).
inline QuantifierResult min_original(const DensityOperator& rho, Side side = Side::A,
                                     const OptimizerConfig& cfg = {}) {
  detail::require_bipartite(rho, "rho");
  const ComplexMatrix marginal = detail::measured_marginal(rho, side);
  const EigenspaceBlocks blocks = eigenspace_blocks(marginal, cfg.degeneracy_tol);
  const double purity = rho.matrix().squaredNorm();
  SearchResult sr = optimize_measurement(detail::local_problem(rho.matrix(), rho.dims(), side),
                                         blocks, Sense::Minimize, cfg);
  const double value = purity - sr.objective;
  return detail::from_search(std::move(sr), marginal, value);
}

/// Geometric discord: min ||X - Pi(X)||^2 with X = rho (plain) or sqrt(rho)
/// (modified), over measurements that leave the measured marginal undisturbed.
inline QuantifierResult discord_geometric(const DensityOperator& rho,
                                          DiscordVariant variant = DiscordVariant::plain,
                                          Side side = Side::A,
                                          const OptimizerConfig& cfg = {}) {
  detail::require_bipartite(rho, "rho");
  const ComplexMatrix marginal = detail::measured_marginal(rho, side);
  const EigenspaceBlocks blocks = eigenspace_blocks(marginal, cfg.degeneracy_tol);
  const ComplexMatrix x =
      variant == DiscordVariant::plain ? rho.matrix() : psd_sqrt(rho.matrix());
  const double norm_sq = x.squaredNorm();
  SearchResult sr = optimize_measurement(detail::local_problem(x, rho.dims(), side),
                                         blocks, Sense::Maximize, cfg);
  const double value = norm_sq - sr.objective;
  return detail::from_search(std::move(sr), marginal, value);
}

/// The lower-bound chain for rho_BA (x) rho_AB:
///   N_H^b >= 1 - (min obj)^2 >= 1 - min obj = N_H(rho_AB),
/// where min obj is the minimal dephased overlap of sqrt(rho_AB) under
/// admissible measurements on A.
struct BilocalChain {
  double nonbilocality = 0.0;   // N_H^b(rho_BA (x) rho_AB)
  double squared_minimum = 0.0; // 1 - (min obj)^2
  double modified_min = 0.0;    // N_H(rho_AB) = 1 - min obj
  bool holds(double tol) const {
    return nonbilocality >= squared_minimum - tol && squared_minimum >= modified_min - tol;
  }
};

inline BilocalChain bilocal_chain(const DensityOperator& rho_ab,
                                  const OptimizerConfig& cfg = {}) {
  const QuantifierResult nh = min_modified(rho_ab, Side::A, cfg);
  const double min_obj = 1.0 - nh.value;
  const QuantifierResult nb = nb_optimize(swap_parties(rho_ab), rho_ab, cfg);
  return BilocalChain{nb.value, 1.0 - min_obj * min_obj, nh.value};
}

}  // namespace nonbiloc
