#pragma once

// Orthonormal Hermitian operator bases and correlation matrices of square
// roots of states in product bases.

#include <cmath>
#include <utility>
#include <vector>

#include "nonbiloc/linalg.hpp"

namespace nonbiloc {

struct HermitianBasis {
  std::size_t dim = 0;
  std::vector<ComplexMatrix> operators;  // dim^2 entries, operators[0] = I/sqrt(dim)
};

/// Normalized identity followed by the generalized Gell-Mann matrices, each
/// scaled to unit Hilbert-Schmidt norm. Order: identity; symmetric
/// (E_jk + E_kj)/sqrt2 for j < k; antisymmetric (-i E_jk + i E_kj)/sqrt2 for
/// j < k; diagonal traceless (sum_{j<l} E_jj - l E_ll)/sqrt(l(l+1)) for
/// l = 1..d-1. For d = 2 this is {I, sigma_1, sigma_2, sigma_3}/sqrt2.
inline HermitianBasis build_basis(std::size_t d) {
  if (d < 2) throw Error(ErrorKind::BadParameter, "basis dimension must be >= 2");
  HermitianBasis basis;
  basis.dim = d;
  basis.operators.reserve(d * d);
  const auto di = static_cast<Eigen::Index>(d);
  basis.operators.push_back(identity(d) / std::sqrt(static_cast<double>(d)));

  const double h = 1.0 / std::sqrt(2.0);
  for (Eigen::Index j = 0; j < di; ++j) {
    for (Eigen::Index k = j + 1; k < di; ++k) {
      ComplexMatrix m = ComplexMatrix::Zero(di, di);
      m(j, k) = h;
      m(k, j) = h;
      basis.operators.push_back(std::move(m));
    }
  }
  for (Eigen::Index j = 0; j < di; ++j) {
    for (Eigen::Index k = j + 1; k < di; ++k) {
      ComplexMatrix m = ComplexMatrix::Zero(di, di);
      m(j, k) = Complex(0.0, -h);
      m(k, j) = Complex(0.0, h);
      basis.operators.push_back(std::move(m));
    }
  }
  for (Eigen::Index l = 1; l < di; ++l) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(l * (l + 1)));
    ComplexMatrix m = ComplexMatrix::Zero(di, di);
    for (Eigen::Index j = 0; j < l; ++j) m(j, j) = scale;
    m(l, l) = -static_cast<double>(l) * scale;
    basis.operators.push_back(std::move(m));
  }
  return basis;
}

/// Expansion coefficients of `m` in the basis: c_k = tr(B_k m).
inline ComplexVector expand(const HermitianBasis& basis, const ComplexMatrix& m) {
  ComplexVector c(basis.operators.size());
  for (std::size_t k = 0; k < basis.operators.size(); ++k) {
    c[k] = hs_inner(basis.operators[k], m);
  }
  return c;
}

/// gamma(i, j) = tr S (X_i (x) Y_j); rows follow the first factor's basis.
struct CorrelationMatrix {
  RealMatrix gamma;
};

inline constexpr double kImaginaryResidualTol = 1e-10;

inline CorrelationMatrix correlation_matrix(const ComplexMatrix& s,
                                            const HermitianBasis& basis_a,
                                            const HermitianBasis& basis_b) {
  const std::size_t da = basis_a.dim, db = basis_b.dim;
  if (s.rows() != s.cols() || static_cast<std::size_t>(s.rows()) != da * db) {
    throw Error(ErrorKind::DimensionMismatch,
                "correlation_matrix: operator size does not match bases");
  }
  // tr S (X (x) Y) = sum_{ab,cd} X_{ba} Y_{dc} S_{(ac),(bd)}; contract Y first.
  const auto ia = static_cast<Eigen::Index>(da), ib = static_cast<Eigen::Index>(db);
  const std::size_t na = basis_a.operators.size(), nb = basis_b.operators.size();
  // partial(j)(a, b) = tr_B [ S_{(a.),(b.)} Y_j ]
  std::vector<ComplexMatrix> partial(nb, ComplexMatrix::Zero(ia, ia));
  for (std::size_t j = 0; j < nb; ++j) {
    const ComplexMatrix& y = basis_b.operators[j];
    for (Eigen::Index a = 0; a < ia; ++a) {
      for (Eigen::Index b = 0; b < ia; ++b) {
        Complex acc = 0.0;
        for (Eigen::Index c = 0; c < ib; ++c) {
          for (Eigen::Index d = 0; d < ib; ++d) {
            acc += s(a * ib + c, b * ib + d) * y(d, c);
          }
        }
        partial[j](a, b) = acc;
      }
    }
  }
  CorrelationMatrix out{RealMatrix(na, nb)};
  double worst_imag = 0.0;
  for (std::size_t i = 0; i < na; ++i) {
    const ComplexMatrix& x = basis_a.operators[i];
    for (std::size_t j = 0; j < nb; ++j) {
      // tr(X P) with P = partial[j]
      const Complex v = (x.transpose().array() * partial[j].array()).sum();
      worst_imag = std::max(worst_imag, std::abs(v.imag()));
      out.gamma(i, j) = v.real();
    }
  }
  if (worst_imag > kImaginaryResidualTol) {
    throw Error(ErrorKind::ComplexCoefficient,
                "correlation coefficients have imaginary residual " +
                    std::to_string(worst_imag) + " (operator not Hermitian)",
                worst_imag);
  }
  return out;
}

/// Inverse of correlation_matrix: sum_ij gamma_ij X_i (x) Y_j.
inline ComplexMatrix reconstruct(const CorrelationMatrix& g,
                                 const HermitianBasis& basis_a,
                                 const HermitianBasis& basis_b) {
  const auto n = static_cast<Eigen::Index>(basis_a.dim * basis_b.dim);
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < g.gamma.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.gamma.cols(); ++j) {
      if (g.gamma(i, j) == 0.0) continue;
      out += g.gamma(i, j) * tensor(basis_a.operators[i], basis_b.operators[j]);
    }
  }
  return out;
}

/// Gamma_{BC,AD} = Gamma_AB^t (x) Gamma_CD. Row (j, k) = j*u^2 + k,
/// column (i, l) = i*v^2 + l.
inline CorrelationMatrix gamma_bcad(const CorrelationMatrix& gamma_ab,
                                    const CorrelationMatrix& gamma_cd) {
  const RealMatrix abt = gamma_ab.gamma.transpose();
  return CorrelationMatrix{tensor(abt, gamma_cd.gamma)};
}

struct FirstRowSplit {
  RealVector r;  // row 0: coefficients of the identity on the qubit side
  RealMatrix R;  // rows 1..3: Pauli coefficients
};

inline FirstRowSplit split_first_row(const CorrelationMatrix& g) {
  if (g.gamma.rows() != 4) {
    throw Error(ErrorKind::NotQubitSide,
                "split_first_row needs a qubit first subsystem (4 rows), got " +
                    std::to_string(g.gamma.rows()));
  }
  return FirstRowSplit{g.gamma.row(0).transpose(),
                       g.gamma.bottomRows(3)};
}

}  // namespace nonbiloc
