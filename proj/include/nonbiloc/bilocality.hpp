#pragma once

// Bilocality inequality S = sqrt|I| + sqrt|J| <= 2 for the entanglement
// swapping chain A - (B C) - D, with
//   I = <(A0 + A1) B0 (C0 + C1)>,   J = <(A0 - A1) B1 (C0 - C1)>,
// where Alice measures subsystem A, Charlie subsystem D and Bob's four-outcome
// measurement on B (x) C is reported as two bits (b0, b1).

#include <array>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "nonbiloc/measurements.hpp"

namespace nonbiloc {

inline constexpr double kDichotomicTol = 1e-9;
inline constexpr double kViolationTol = 1e-9;

class DichotomicObservable {
 public:
  explicit DichotomicObservable(ComplexMatrix m) : matrix_(std::move(m)) {
    if (matrix_.rows() != matrix_.cols()) {
      throw Error(ErrorKind::InvalidObservable, "observable must be square");
    }
    const double herm = hermiticity_residual(matrix_);
    if (herm > kDichotomicTol) {
      throw Error(ErrorKind::InvalidObservable, "observable is not Hermitian", herm);
    }
    const double sq =
        max_abs(ComplexMatrix(matrix_ * matrix_ - identity(matrix_.rows())));
    if (sq > kDichotomicTol) {
      throw Error(ErrorKind::InvalidObservable,
                  "observable eigenvalues are not +-1 (max |M^2 - I| = " +
                      std::to_string(sq) + ")",
                  sq);
    }
  }
  const ComplexMatrix& matrix() const noexcept { return matrix_; }

 private:
  ComplexMatrix matrix_;
};

using BitPair = std::pair<int, int>;

struct BsmAssignment {
  ProjectiveMeasurement projectors;
  std::vector<BitPair> bit_values;  // (b0, b1) per outcome, each +-1

  BsmAssignment(ProjectiveMeasurement pm, std::vector<BitPair> bits)
      : projectors(std::move(pm)), bit_values(std::move(bits)) {
    if (bit_values.size() != projectors.size()) {
      throw Error(ErrorKind::DimensionMismatch,
                  "one bit pair per measurement outcome required");
    }
    for (std::size_t i = 0; i < bit_values.size(); ++i) {
      const auto [b0, b1] = bit_values[i];
      if ((b0 != 1 && b0 != -1) || (b1 != 1 && b1 != -1)) {
        throw Error(ErrorKind::BadParameter, "Bob's bits must be +-1");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (bit_values[j] == bit_values[i] && bit_values.size() <= 4) {
          throw Error(ErrorKind::BadParameter, "bit pairs must be distinct");
        }
      }
    }
  }

  /// sum_b bit(b) P_b for bit index 0 or 1.
  ComplexMatrix bit_observable(int which) const {
    ComplexMatrix m = ComplexMatrix::Zero(projectors.dim(), projectors.dim());
    for (std::size_t h = 0; h < projectors.size(); ++h) {
      const int bit = which == 0 ? bit_values[h].first : bit_values[h].second;
      m += static_cast<double>(bit) * projectors.projector(h);
    }
    return m;
  }
};

/// Outcomes (Phi+, Phi-, Psi+, Psi-); b0 = +1 on Phi and -1 on Psi, b1 = +1 on
/// the "+" states and -1 on the "-" states. Then B0 = Z (x) Z and B1 = X (x) X.
inline BsmAssignment standard_bsm() {
  ComplexMatrix basis(4, 4);
  basis.col(0) = bell_vector(BellKind::PhiPlus);
  basis.col(1) = bell_vector(BellKind::PhiMinus);
  basis.col(2) = bell_vector(BellKind::PsiPlus);
  basis.col(3) = bell_vector(BellKind::PsiMinus);
  return BsmAssignment(ProjectiveMeasurement::from_basis(basis),
                       {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}});
}

namespace detail {

inline double chain_expectation(const DensityOperator& rho_ab,
                                const DensityOperator& rho_cd,
                                const ComplexMatrix& alice, const ComplexMatrix& bob,
                                const ComplexMatrix& charlie) {
  if (rho_ab.dims().size() != 2 || rho_cd.dims().size() != 2) {
    throw Error(ErrorKind::NotBipartite, "inputs must be bipartite");
  }
  const auto m = rho_ab.dims()[0], n = rho_ab.dims()[1];
  const auto u = rho_cd.dims()[0], v = rho_cd.dims()[1];
  if (static_cast<std::size_t>(alice.rows()) != m ||
      static_cast<std::size_t>(charlie.rows()) != v ||
      static_cast<std::size_t>(bob.rows()) != n * u) {
    throw Error(ErrorKind::DimensionMismatch,
                "observables do not match subsystems A, (B C), D");
  }
  // Bob's operator acts on B (x) C; rearrange the state to A (x) D (x) B (x) C.
  const ComplexMatrix joint = tensor(rho_ab.matrix(), rho_cd.matrix());
  const ComplexMatrix adbc =
      permute_systems(joint, {m, n, u, v}, {0, 3, 1, 2});
  const ComplexMatrix obs = tensor(tensor(alice, charlie), bob);
  const Complex value = (adbc * obs).trace();
  if (std::abs(value.imag()) > 1e-10) {
    throw Error(ErrorKind::PreconditionViolated,
                "expectation value not real", std::abs(value.imag()));
  }
  return value.real();
}

}  // namespace detail

inline double correlator_I(const DensityOperator& rho_ab, const DensityOperator& rho_cd,
                           const DichotomicObservable& a0, const DichotomicObservable& a1,
                           const BsmAssignment& bsm, const DichotomicObservable& c0,
                           const DichotomicObservable& c1) {
  return detail::chain_expectation(rho_ab, rho_cd, a0.matrix() + a1.matrix(),
                                   bsm.bit_observable(0), c0.matrix() + c1.matrix());
}

inline double correlator_J(const DensityOperator& rho_ab, const DensityOperator& rho_cd,
                           const DichotomicObservable& a0, const DichotomicObservable& a1,
                           const BsmAssignment& bsm, const DichotomicObservable& c0,
                           const DichotomicObservable& c1) {
  return detail::chain_expectation(rho_ab, rho_cd, a0.matrix() - a1.matrix(),
                                   bsm.bit_observable(1), c0.matrix() - c1.matrix());
}

struct SValue {
  double s = 0.0;
  bool violation = false;
};

inline SValue s_value(double i, double j) {
  const double s = std::sqrt(std::abs(i)) + std::sqrt(std::abs(j));
  return SValue{s, s > 2.0 + kViolationTol};
}

struct BilocalityReport {
  double i = 0.0;
  double j = 0.0;
  SValue s;
};

inline BilocalityReport evaluate_bilocality(
    const DensityOperator& rho_ab, const DensityOperator& rho_cd,
    const DichotomicObservable& a0, const DichotomicObservable& a1,
    const BsmAssignment& bsm, const DichotomicObservable& c0,
    const DichotomicObservable& c1) {
  BilocalityReport r;
  r.i = correlator_I(rho_ab, rho_cd, a0, a1, bsm, c0, c1);
  r.j = correlator_J(rho_ab, rho_cd, a0, a1, bsm, c0, c1);
  r.s = s_value(r.i, r.j);
  return r;
}

/// cos(angle) sigma_3 + sin(angle) sigma_1.
inline DichotomicObservable xz_observable(double angle) {
  ComplexMatrix m(2, 2);
  m << std::cos(angle), std::sin(angle), std::sin(angle), -std::cos(angle);
  return DichotomicObservable(std::move(m));
}

struct SettingsSweep {
  double best_s = 0.0;
  std::array<double, 4> angles{};  // a0, a1, c0, c1
};

/// Grid sweep of qubit observables in the x-z plane for Alice and Charlie.
/// I and J are bilinear in the Bloch vectors, so the sweep contracts
/// precomputed tensors T_b(p, q) = <sigma_p B_b sigma_q> instead of
/// re-evaluating the full expectation value.
inline SettingsSweep sweep_settings(const DensityOperator& rho_ab,
                                    const DensityOperator& rho_cd,
                                    const BsmAssignment& bsm, int steps = 24) {
  if (rho_ab.dims()[0] != 2 || rho_cd.dims()[1] != 2) {
    throw Error(ErrorKind::DimensionMismatch, "settings sweep needs qubit A and D");
  }
  ComplexMatrix sz(2, 2), sx(2, 2);
  sz << 1, 0, 0, -1;
  sx << 0, 1, 1, 0;
  const std::array<ComplexMatrix, 2> paulis{sz, sx};
  double t[2][2][2];
  for (int b = 0; b < 2; ++b) {
    const ComplexMatrix bob = bsm.bit_observable(b);
    for (int p = 0; p < 2; ++p) {
      for (int q = 0; q < 2; ++q) {
        t[b][p][q] = detail::chain_expectation(rho_ab, rho_cd, paulis[p], bob, paulis[q]);
      }
    }
  }
  SettingsSweep best;
  const double step = 2.0 * std::numbers::pi / steps;
  for (int i0 = 0; i0 < steps; ++i0) {
    for (int i1 = 0; i1 < steps; ++i1) {
      const double a0 = i0 * step, a1 = i1 * step;
      const double ap[2] = {std::cos(a0) + std::cos(a1), std::sin(a0) + std::sin(a1)};
      const double am[2] = {std::cos(a0) - std::cos(a1), std::sin(a0) - std::sin(a1)};
      for (int k0 = 0; k0 < steps; ++k0) {
        for (int k1 = 0; k1 < steps; ++k1) {
          const double c0 = k0 * step, c1 = k1 * step;
          const double cp[2] = {std::cos(c0) + std::cos(c1), std::sin(c0) + std::sin(c1)};
          const double cm[2] = {std::cos(c0) - std::cos(c1), std::sin(c0) - std::sin(c1)};
          double i = 0.0, j = 0.0;
          for (int p = 0; p < 2; ++p) {
            for (int q = 0; q < 2; ++q) {
              i += ap[p] * t[0][p][q] * cp[q];
              j += am[p] * t[1][p][q] * cm[q];
            }
          }
          const double s = s_value(i, j).s;
          if (s > best.best_s) best = SettingsSweep{s, {a0, a1, c0, c1}};
        }
      }
    }
  }
  return best;
}

}  // namespace nonbiloc
