#pragma once

// Complete rank-1 projective measurements, the non-disturbance constraint
// sum_h P_h rho P_h = rho, eigenspace-block parametrization of the admissible
// set, and the G matrix g_{h,(jk)} = tr P_h (Y_j (x) Z_k).

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "nonbiloc/opbasis.hpp"
#include "nonbiloc/states.hpp"

namespace nonbiloc {

inline constexpr double kProjectorTol = 1e-10;
inline constexpr double kAdmissibleTol = 1e-9;
inline constexpr double kDegeneracyTol = 1e-8;

/// A von Neumann measurement: an orthonormal basis {w_h}, projectors
/// P_h = |w_h><w_h|.
class ProjectiveMeasurement {
 public:
  /// Columns of `basis` are the measurement vectors. Throws NotUnitary if
  /// they are not orthonormal within kProjectorTol.
  static ProjectiveMeasurement from_basis(const ComplexMatrix& basis) {
    if (basis.rows() != basis.cols() || basis.rows() == 0) {
      throw Error(ErrorKind::DimensionMismatch, "measurement basis must be square");
    }
    const double res = max_abs(ComplexMatrix(basis.adjoint() * basis) -
                               identity(basis.rows()));
    if (res > kProjectorTol) {
      throw Error(ErrorKind::NotUnitary,
                  "measurement vectors not orthonormal, residual " +
                      std::to_string(res), res);
    }
    ProjectiveMeasurement pm;
    pm.vectors_.reserve(basis.cols());
    for (Eigen::Index k = 0; k < basis.cols(); ++k) pm.vectors_.emplace_back(basis.col(k));
    return pm;
  }

  /// Accepts rank-1 projectors and checks idempotency, orthogonality and
  /// completeness.
  static ProjectiveMeasurement from_projectors(const std::vector<ComplexMatrix>& ps) {
    if (ps.empty()) throw Error(ErrorKind::DimensionMismatch, "empty measurement");
    const auto d = ps.front().rows();
    if (static_cast<std::size_t>(d) != ps.size()) {
      throw Error(ErrorKind::DimensionMismatch,
                  "a complete rank-1 measurement needs as many projectors as "
                  "the space dimension");
    }
    ComplexMatrix sum = ComplexMatrix::Zero(d, d);
    ComplexMatrix basis(d, d);
    for (std::size_t h = 0; h < ps.size(); ++h) {
      const ComplexMatrix& p = ps[h];
      if (p.rows() != d || p.cols() != d) {
        throw Error(ErrorKind::DimensionMismatch, "projector shapes differ");
      }
      const double idem = max_abs(ComplexMatrix(p * p - p));
      if (idem > kProjectorTol || hermiticity_residual(p) > kProjectorTol) {
        throw Error(ErrorKind::NotUnitary, "operator is not a projector", idem);
      }
      for (std::size_t g = 0; g < h; ++g) {
        const double overlap = max_abs(ComplexMatrix(p * ps[g]));
        if (overlap > kProjectorTol) {
          throw Error(ErrorKind::NotUnitary, "projectors are not orthogonal", overlap);
        }
      }
      sum += p;
      const Spectrum s = eig_hermitian(p);
      basis.col(static_cast<Eigen::Index>(h)) = s.eigenvectors.col(d - 1);
    }
    const double completeness = max_abs(ComplexMatrix(sum - identity(d)));
    if (completeness > kProjectorTol) {
      throw Error(ErrorKind::NotUnitary, "projectors do not sum to identity",
                  completeness);
    }
    return from_basis(basis);
  }

  std::size_t size() const noexcept { return vectors_.size(); }
  std::size_t dim() const noexcept {
    return vectors_.empty() ? 0 : static_cast<std::size_t>(vectors_.front().size());
  }
  const std::vector<ComplexVector>& vectors() const noexcept { return vectors_; }
  ComplexMatrix projector(std::size_t h) const { return outer(vectors_.at(h)); }
  std::vector<ComplexMatrix> projectors() const {
    std::vector<ComplexMatrix> out;
    out.reserve(vectors_.size());
    for (const auto& v : vectors_) out.push_back(outer(v));
    return out;
  }
  ComplexMatrix basis() const {
    ComplexMatrix b(dim(), size());
    for (std::size_t h = 0; h < size(); ++h) b.col(static_cast<Eigen::Index>(h)) = vectors_[h];
    return b;
  }

 private:
  std::vector<ComplexVector> vectors_;
};

/// Product measurement {P_e (x) Q_f}, outcome index e * |Q| + f.
inline ProjectiveMeasurement product_measurement(const ProjectiveMeasurement& a,
                                                 const ProjectiveMeasurement& b) {
  return ProjectiveMeasurement::from_basis(tensor(a.basis(), b.basis()));
}

/// Move a measurement on factors (X, Y) to factors (Y, X).
inline ProjectiveMeasurement swap_factors(const ProjectiveMeasurement& pm,
                                          std::size_t dx, std::size_t dy) {
  ComplexMatrix b = pm.basis();
  ComplexMatrix out(b.rows(), b.cols());
  for (std::size_t x = 0; x < dx; ++x) {
    for (std::size_t y = 0; y < dy; ++y) out.row(y * dx + x) = b.row(x * dy + y);
  }
  return ProjectiveMeasurement::from_basis(out);
}

struct EigenspaceBlocks {
  std::vector<double> eigenvalues;        // one representative per block, ascending
  std::vector<std::size_t> multiplicities;
  std::vector<ComplexMatrix> bases;       // d x m_k, orthonormal columns

  std::size_t dim() const {
    std::size_t d = 0;
    for (auto m : multiplicities) d += m;
    return d;
  }
  bool nondegenerate() const {
    return std::all_of(multiplicities.begin(), multiplicities.end(),
                       [](std::size_t m) { return m == 1; });
  }
};

/// Groups ascending eigenvalues whose consecutive gap is at most
/// tol * max(|lambda_max|, 1e-300).
inline EigenspaceBlocks eigenspace_blocks(const ComplexMatrix& m,
                                          double tol = kDegeneracyTol) {
  const Spectrum s = eig_hermitian(m, 1e-9);
  const auto n = s.eigenvalues.size();
  const double scale =
      std::max(s.eigenvalues.cwiseAbs().maxCoeff(), 1e-300);
  EigenspaceBlocks out;
  Eigen::Index start = 0;
  for (Eigen::Index k = 1; k <= n; ++k) {
    if (k == n || s.eigenvalues[k] - s.eigenvalues[k - 1] > tol * scale) {
      const Eigen::Index mult = k - start;
      out.eigenvalues.push_back(s.eigenvalues.segment(start, mult).mean());
      out.multiplicities.push_back(static_cast<std::size_t>(mult));
      out.bases.push_back(s.eigenvectors.middleCols(start, mult));
      start = k;
    }
  }
  return out;
}

inline EigenspaceBlocks eigenspace_blocks(const DensityOperator& rho,
                                          double tol = kDegeneracyTol) {
  return eigenspace_blocks(rho.matrix(), tol);
}

struct Admissibility {
  bool admissible = false;
  double disturbance = 0.0;  // max |sum_h P_h rho P_h - rho|
  double commutator = 0.0;   // max_h max |[P_h, rho]|
  double residual() const { return std::max(disturbance, commutator); }
};

inline Admissibility is_admissible(const ProjectiveMeasurement& pm,
                                   const ComplexMatrix& rho,
                                   double tol = kAdmissibleTol) {
  if (pm.dim() != static_cast<std::size_t>(rho.rows())) {
    throw Error(ErrorKind::DimensionMismatch,
                "measurement acts on dimension " + std::to_string(pm.dim()) +
                    ", state has dimension " + std::to_string(rho.rows()));
  }
  ComplexMatrix dephased = ComplexMatrix::Zero(rho.rows(), rho.cols());
  Admissibility a;
  for (const auto& w : pm.vectors()) {
    const ComplexMatrix p = outer(w);
    dephased += p * rho * p;
    a.commutator = std::max(a.commutator, max_abs(ComplexMatrix(p * rho - rho * p)));
  }
  a.disturbance = max_abs(ComplexMatrix(dephased - rho));
  a.admissible = a.disturbance <= tol && a.commutator <= tol;
  return a;
}

inline Admissibility is_admissible(const ProjectiveMeasurement& pm,
                                   const DensityOperator& rho,
                                   double tol = kAdmissibleTol) {
  return is_admissible(pm, rho.matrix(), tol);
}

/// Measurement vectors are the columns of bases[k] * rotations[k], block by
/// block in ascending eigenvalue order.
inline ProjectiveMeasurement admissible_from_unitaries(
    const EigenspaceBlocks& blocks, const std::vector<ComplexMatrix>& rotations) {
  if (rotations.size() != blocks.bases.size()) {
    throw Error(ErrorKind::DimensionMismatch, "one rotation per block required");
  }
  const auto d = static_cast<Eigen::Index>(blocks.dim());
  ComplexMatrix basis(d, d);
  Eigen::Index col = 0;
  for (std::size_t k = 0; k < rotations.size(); ++k) {
    const auto m = static_cast<Eigen::Index>(blocks.multiplicities[k]);
    const ComplexMatrix& u = rotations[k];
    if (u.rows() != m || u.cols() != m) {
      throw Error(ErrorKind::DimensionMismatch,
                  "rotation " + std::to_string(k) + " has wrong size");
    }
    const double res = max_abs(ComplexMatrix(u.adjoint() * u) - identity(m));
    if (res > kProjectorTol) {
      throw Error(ErrorKind::NotUnitary,
                  "block rotation " + std::to_string(k) + " not unitary", res);
    }
    basis.middleCols(col, m) = blocks.bases[k] * u;
    col += m;
  }
  return ProjectiveMeasurement::from_basis(basis);
}

inline ProjectiveMeasurement spectral_measurement(const EigenspaceBlocks& blocks) {
  std::vector<ComplexMatrix> rotations;
  for (auto m : blocks.multiplicities) rotations.push_back(identity(m));
  return admissible_from_unitaries(blocks, rotations);
}

struct GMatrix {
  RealMatrix g;  // rows: outcomes h; columns: (jk) = j * u^2 + k
};

inline GMatrix g_matrix(const ProjectiveMeasurement& pm,
                        const HermitianBasis& basis_b,
                        const HermitianBasis& basis_c) {
  if (pm.dim() != basis_b.dim * basis_c.dim) {
    throw Error(ErrorKind::DimensionMismatch,
                "g_matrix: measurement dimension does not match bases");
  }
  const std::size_t nb = basis_b.operators.size(), nc = basis_c.operators.size();
  GMatrix out{RealMatrix(pm.size(), nb * nc)};
  std::vector<ComplexMatrix> ops;
  ops.reserve(nb * nc);
  for (std::size_t j = 0; j < nb; ++j) {
    for (std::size_t k = 0; k < nc; ++k) {
      ops.push_back(tensor(basis_b.operators[j], basis_c.operators[k]));
    }
  }
  for (std::size_t h = 0; h < pm.size(); ++h) {
    const ComplexVector& w = pm.vectors()[h];
    for (std::size_t c = 0; c < ops.size(); ++c) {
      out.g(h, c) = w.dot(ops[c] * w).real();  // dot conjugates the left operand
    }
  }
  return out;
}

/// sum_h (I (x) P_h (x) I) S (I (x) P_h (x) I), the measurement acting on the
/// contiguous factors [first, first + count) of `dims`.
inline ComplexMatrix apply_measurement(const ProjectiveMeasurement& pm,
                                       const ComplexMatrix& s, const Dims& dims,
                                       std::size_t first, std::size_t count) {
  detail::check_square_dims(s, dims, "apply_measurement");
  if (first + count > dims.size() || count == 0) {
    throw Error(ErrorKind::DimensionMismatch, "measured factor range out of bounds");
  }
  std::size_t left = 1, mid = 1, right = 1;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (k < first) left *= dims[k];
    else if (k < first + count) mid *= dims[k];
    else right *= dims[k];
  }
  if (pm.dim() != mid) {
    throw Error(ErrorKind::DimensionMismatch,
                "measurement dimension does not match measured factors");
  }
  ComplexMatrix out = ComplexMatrix::Zero(s.rows(), s.cols());
  const ComplexMatrix il = identity(left), ir = identity(right);
  for (const auto& w : pm.vectors()) {
    const ComplexMatrix p = outer(w);
    const ComplexMatrix lifted = tensor(tensor(il, p), ir);
    out += lifted * s * lifted;
  }
  return out;
}

/// Measurement on factors B, C of A (x) B (x) C (x) D.
inline ComplexMatrix apply_measurement(const ProjectiveMeasurement& pm,
                                       const ComplexMatrix& s, const Dims& dims4) {
  if (dims4.size() != 4) {
    throw Error(ErrorKind::DimensionMismatch, "expected four subsystems A, B, C, D");
  }
  return apply_measurement(pm, s, dims4, 1, 2);
}

}  // namespace nonbiloc
