#pragma once

// Quantum state model: validated density operators, bipartite pure states,
// Schmidt decomposition and the fixture catalog.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "nonbiloc/linalg.hpp"

namespace nonbiloc {

class DensityOperator {
 public:
  const ComplexMatrix& matrix() const noexcept { return matrix_; }
  const Dims& dims() const noexcept { return dims_; }
  std::size_t dim() const noexcept {
    return static_cast<std::size_t>(matrix_.rows());
  }

  friend DensityOperator validate_density(ComplexMatrix matrix, Dims dims,
                                          double tol);

 private:
  DensityOperator(ComplexMatrix m, Dims d)
      : matrix_(std::move(m)), dims_(std::move(d)) {}

  ComplexMatrix matrix_;
  Dims dims_;
};

/// The only way to obtain a DensityOperator. Throws Error naming the violated
/// invariant together with its measured residual. The stored matrix is the
/// Hermitian part of the input.
inline DensityOperator validate_density(ComplexMatrix matrix, Dims dims,
                                        double tol = kHermitianTol) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) {
    throw Error(ErrorKind::NotSquare, "density matrix must be square");
  }
  if (dims.empty()) dims = {static_cast<std::size_t>(matrix.rows())};
  for (auto d : dims) {
    if (d == 0) throw Error(ErrorKind::DimensionMismatch, "zero subsystem dimension");
  }
  if (product(dims) != static_cast<std::size_t>(matrix.rows())) {
    throw Error(ErrorKind::DimensionMismatch,
                "product of dims (" + std::to_string(product(dims)) +
                    ") != matrix size (" + std::to_string(matrix.rows()) + ")");
  }
  const double herm = hermiticity_residual(matrix);
  if (herm > tol) {
    throw Error(ErrorKind::NotHermitian,
                "max |rho - rho^dagger| = " + std::to_string(herm), herm);
  }
  matrix = 0.5 * (matrix + matrix.adjoint()).eval();
  const double trace_defect = std::abs(matrix.trace() - Complex(1.0));
  if (trace_defect > tol) {
    throw Error(ErrorKind::TraceNotOne,
                "|tr rho - 1| = " + std::to_string(trace_defect), trace_defect);
  }
  const Spectrum s = eig_hermitian(matrix, tol);
  if (s.eigenvalues[0] < -tol) {
    throw Error(ErrorKind::NotPSD,
                "smallest eigenvalue " + std::to_string(s.eigenvalues[0]),
                -s.eigenvalues[0]);
  }
  return DensityOperator(std::move(matrix), std::move(dims));
}

struct PureState {
  ComplexVector amplitudes;
  Dims dims;
};

inline PureState make_pure_state(ComplexVector amplitudes, Dims dims) {
  if (product(dims) != static_cast<std::size_t>(amplitudes.size())) {
    throw Error(ErrorKind::DimensionMismatch,
                "pure state: product of dims != amplitude count");
  }
  const double defect = std::abs(amplitudes.norm() - 1.0);
  if (defect > 1e-12) {
    throw Error(ErrorKind::NotNormalized,
                "| ||psi|| - 1 | = " + std::to_string(defect), defect);
  }
  return PureState{std::move(amplitudes), std::move(dims)};
}

inline DensityOperator to_density(const PureState& psi) {
  return validate_density(outer(psi.amplitudes), psi.dims);
}

/// Coefficients are amplitudes (not probabilities), descending.
struct SchmidtDecomposition {
  std::vector<double> coefficients;
  std::vector<ComplexVector> left_basis;
  std::vector<ComplexVector> right_basis;
};

inline constexpr double kSchmidtDropTol = 1e-12;

inline SchmidtDecomposition schmidt_decompose(const PureState& psi) {
  if (psi.dims.size() != 2) {
    throw Error(ErrorKind::NotBipartite,
                "Schmidt decomposition needs exactly two subsystems, got " +
                    std::to_string(psi.dims.size()));
  }
  const auto m = static_cast<Eigen::Index>(psi.dims[0]);
  const auto n = static_cast<Eigen::Index>(psi.dims[1]);
  Eigen::MatrixXcd coeffs(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) coeffs(i, j) = psi.amplitudes[i * n + j];
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(coeffs,
                                         Eigen::ComputeFullU | Eigen::ComputeFullV);
  SchmidtDecomposition out;
  const auto& sv = svd.singularValues();  // descending
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv[k] < kSchmidtDropTol) continue;
    out.coefficients.push_back(sv[k]);
    out.left_basis.emplace_back(svd.matrixU().col(k));
    // psi = sum_k s_k u_k (x) conj(v_k) since coeffs = U S V^dagger.
    out.right_basis.emplace_back(svd.matrixV().col(k).conjugate());
  }
  return out;
}

inline ComplexVector reconstruct(const SchmidtDecomposition& sd) {
  if (sd.coefficients.empty()) return {};
  ComplexVector out =
      ComplexVector::Zero(sd.left_basis[0].size() * sd.right_basis[0].size());
  for (std::size_t k = 0; k < sd.coefficients.size(); ++k) {
    out += sd.coefficients[k] * tensor(sd.left_basis[k], sd.right_basis[k]);
  }
  return out;
}

/// Rank-1 detection: returns the dominant eigenvector as a pure state when the
/// largest eigenvalue is 1 within `tol`.
inline std::optional<PureState> as_pure(const DensityOperator& rho,
                                        double tol = 1e-10) {
  const Spectrum s = eig_hermitian(rho.matrix());
  const auto top = s.eigenvalues.size() - 1;
  if (std::abs(s.eigenvalues[top] - 1.0) > tol) return std::nullopt;
  ComplexVector v = s.eigenvectors.col(top);
  v.normalize();
  return PureState{std::move(v), rho.dims()};
}

inline DensityOperator reduced(const DensityOperator& rho,
                               std::vector<std::size_t> keep) {
  Dims kept_dims;
  std::sort(keep.begin(), keep.end());
  for (auto k : keep) kept_dims.push_back(rho.dims().at(k));
  return validate_density(partial_trace(rho.matrix(), rho.dims(), keep),
                          kept_dims, 1e-9);
}

/// Relabel the two factors of a bipartite state.
inline DensityOperator swap_parties(const DensityOperator& rho) {
  if (rho.dims().size() != 2) {
    throw Error(ErrorKind::NotBipartite, "swap_parties needs a bipartite state");
  }
  return validate_density(permute_systems(rho.matrix(), rho.dims(), {1, 0}),
                          {rho.dims()[1], rho.dims()[0]});
}

// ---------------------------------------------------------------------------
// Catalog

enum class BellKind { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

/// Phi+- = (|00> +- |11>)/sqrt2, Psi+- = (|01> +- |10>)/sqrt2.
inline ComplexVector bell_vector(BellKind kind) {
  const double h = 1.0 / std::sqrt(2.0);
  ComplexVector v = ComplexVector::Zero(4);
  switch (kind) {
    case BellKind::PhiPlus: v[0] = h; v[3] = h; break;
    case BellKind::PhiMinus: v[0] = h; v[3] = -h; break;
    case BellKind::PsiPlus: v[1] = h; v[2] = h; break;
    case BellKind::PsiMinus: v[1] = h; v[2] = -h; break;
  }
  return v;
}

inline DensityOperator bell_state(BellKind kind) {
  return validate_density(outer(bell_vector(kind)), {2, 2});
}

/// Weights in the order (Phi+, Phi-, Psi+, Psi-).
inline DensityOperator bell_diagonal(const std::array<double, 4>& weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw Error(ErrorKind::BadParameter, "negative Bell weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw Error(ErrorKind::BadParameter, "Bell weights must sum to 1",
                std::abs(sum - 1.0));
  }
  constexpr std::array kinds{BellKind::PhiPlus, BellKind::PhiMinus,
                             BellKind::PsiPlus, BellKind::PsiMinus};
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  for (std::size_t k = 0; k < 4; ++k) m += weights[k] * outer(bell_vector(kinds[k]));
  return validate_density(std::move(m), {2, 2});
}

/// (|00><00| + |11><11|)/2.
inline DensityOperator classical_correlated() {
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  m(0, 0) = 0.5;
  m(3, 3) = 0.5;
  return validate_density(std::move(m), {2, 2});
}

/// v |Psi-><Psi-| + (1 - v) I/4.
inline DensityOperator werner(double visibility) {
  if (!(visibility >= 0.0 && visibility <= 1.0)) {
    throw Error(ErrorKind::BadParameter, "visibility must lie in [0, 1]");
  }
  ComplexMatrix m = visibility * outer(bell_vector(BellKind::PsiMinus)) +
                    (1.0 - visibility) * identity(4) / 4.0;
  return validate_density(std::move(m), {2, 2});
}

inline DensityOperator maximally_mixed(const Dims& dims) {
  const std::size_t n = product(dims);
  return validate_density(identity(n) / static_cast<double>(n), dims);
}

inline DensityOperator product_state(const DensityOperator& a,
                                     const DensityOperator& b) {
  Dims dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  return validate_density(tensor(a.matrix(), b.matrix()), std::move(dims));
}

// Random generation. Every generator is a pure function of its seed/engine.

using Rng = std::mt19937_64;

inline ComplexMatrix ginibre(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix g(rows, cols);
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = Complex(normal(rng), normal(rng));
  }
  return g;
}

/// Haar-random unitary via QR of a Ginibre matrix with the phase fix.
inline ComplexMatrix random_unitary(std::size_t d, Rng& rng) {
  Eigen::MatrixXcd g = ginibre(d, d, rng);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < q.cols(); ++k) {
    const Complex diag = r(k, k);
    const double mag = std::abs(diag);
    if (mag > 0.0) q.col(k) *= diag / mag;
  }
  return q;
}

inline PureState random_pure_state(const Dims& dims, Rng& rng) {
  ComplexVector v = ginibre(product(dims), 1, rng).col(0);
  v.normalize();
  return PureState{std::move(v), dims};
}

inline DensityOperator random_density(const Dims& dims, std::size_t rank,
                                      Rng& rng) {
  const std::size_t dim = product(dims);
  if (rank == 0 || rank > dim) {
    throw Error(ErrorKind::BadParameter, "rank must lie in [1, dim]");
  }
  const ComplexMatrix g = ginibre(dim, rank, rng);
  ComplexMatrix m = g * g.adjoint();
  m /= m.trace().real();
  return validate_density(std::move(m), dims);
}

/// Deterministic per seed. `dims` defaults to a single subsystem of size dim.
inline DensityOperator random_density(std::size_t dim, std::size_t rank,
                                      std::uint64_t seed, Dims dims = {}) {
  if (dims.empty()) dims = {dim};
  if (product(dims) != dim) {
    throw Error(ErrorKind::BadParameter, "dims do not multiply to dim");
  }
  Rng rng(seed);
  return random_density(dims, rank, rng);
}

}  // namespace nonbiloc
