#pragma once

// Dense complex matrix primitives for finite-dimensional quantum operators.
// Storage is row-major; composite spaces are addressed in mixed radix with
// the first declared subsystem as the most significant digit.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "nonbiloc/error.hpp"

namespace nonbiloc {

using Complex = std::complex<double>;
using ComplexMatrix =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;
using RealMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RealVector = Eigen::VectorXd;
using Dims = std::vector<std::size_t>;

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kPsdClampTol = 1e-10;
inline constexpr double kSpectralFloor = 1e-13;

struct Spectrum {
  RealVector eigenvalues;      // ascending
  ComplexMatrix eigenvectors;  // column k belongs to eigenvalues[k]
};

inline std::size_t product(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                         std::multiplies<>());
}

/// Largest absolute entry; the norm used for every tolerance check here.
template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

inline double hermiticity_residual(const ComplexMatrix& m) {
  return max_abs(m - m.adjoint());
}

inline ComplexMatrix identity(std::size_t d) {
  return ComplexMatrix::Identity(static_cast<Eigen::Index>(d),
                                 static_cast<Eigen::Index>(d));
}

inline ComplexMatrix outer(const ComplexVector& v) { return v * v.adjoint(); }

inline Spectrum eig_hermitian(const ComplexMatrix& m,
                              double tol = kHermitianTol) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorKind::NotSquare,
                "eig_hermitian expects a square matrix, got " +
                    std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  const double res = hermiticity_residual(m);
  if (res > tol) {
    throw Error(ErrorKind::NotHermitian,
                "max |M - M^dagger| = " + std::to_string(res), res);
  }
  // The solver only reads one triangle; feed it the symmetrized matrix.
  Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::NotHermitian, "eigensolver did not converge");
  }
  return Spectrum{solver.eigenvalues(), solver.eigenvectors()};
}

/// V f(diag) V^dagger for a real function applied to the spectrum.
template <class F>
ComplexMatrix spectral_apply(const Spectrum& s, F&& f) {
  const ComplexMatrix& v = s.eigenvectors;
  ComplexMatrix scaled = v;
  for (Eigen::Index k = 0; k < v.cols(); ++k) {
    scaled.col(k) *= f(s.eigenvalues[k]);
  }
  ComplexMatrix out = scaled * v.adjoint();
  return 0.5 * (out + out.adjoint());
}

inline ComplexMatrix psd_sqrt(const ComplexMatrix& m,
                              double tol = kPsdClampTol) {
  const Spectrum s = eig_hermitian(m, std::max(tol, kHermitianTol));
  if (s.eigenvalues.size() > 0 && s.eigenvalues[0] < -tol) {
    throw Error(ErrorKind::NotPSD,
                "smallest eigenvalue " + std::to_string(s.eigenvalues[0]),
                -s.eigenvalues[0]);
  }
  // Eigenvalues at rounding level are zeros; their roots would be ~1e-8 noise.
  const double top = s.eigenvalues.size() > 0 ? s.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  const double floor = kSpectralFloor * std::max(top, 1.0);
  return spectral_apply(s, [floor](double x) { return x > floor ? std::sqrt(x) : 0.0; });
}

/// Kronecker product: block (i, j) of the result is a(i, j) * b.
template <class Scalar, int Opt>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Opt> tensor(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Opt>& a,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Opt>& b) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Opt> out(
      a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline ComplexVector tensor(const ComplexVector& a, const ComplexVector& b) {
  ComplexVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    out.segment(i * b.size(), b.size()) = a[i] * b;
  }
  return out;
}

namespace detail {

inline void check_square_dims(const ComplexMatrix& m, const Dims& dims,
                              const char* who) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorKind::NotSquare, std::string(who) + ": matrix not square");
  }
  if (dims.empty() || product(dims) != static_cast<std::size_t>(m.rows())) {
    throw Error(ErrorKind::DimensionMismatch,
                std::string(who) + ": product of dims (" +
                    std::to_string(product(dims)) + ") != matrix size (" +
                    std::to_string(m.rows()) + ")");
  }
}

// Mixed-radix digits of `index`, most significant first.
inline void to_digits(std::size_t index, const Dims& dims,
                      std::vector<std::size_t>& digits) {
  digits.resize(dims.size());
  for (std::size_t k = dims.size(); k-- > 0;) {
    digits[k] = index % dims[k];
    index /= dims[k];
  }
}

}  // namespace detail

/// Trace out every subsystem not listed in `keep`. Kept subsystems appear in
/// ascending index order.
inline ComplexMatrix partial_trace(const ComplexMatrix& m, const Dims& dims,
                                   std::vector<std::size_t> keep) {
  detail::check_square_dims(m, dims, "partial_trace");
  std::sort(keep.begin(), keep.end());
  if (std::adjacent_find(keep.begin(), keep.end()) != keep.end() ||
      (!keep.empty() && keep.back() >= dims.size())) {
    throw Error(ErrorKind::DimensionMismatch,
                "partial_trace: keep set is not a subset of subsystem indices");
  }
  std::vector<bool> kept(dims.size(), false);
  for (auto k : keep) kept[k] = true;

  const std::size_t n = product(dims);
  std::size_t out_dim = 1;
  for (auto k : keep) out_dim *= dims[k];

  // Precompute (kept index, traced index) for every basis state.
  std::vector<std::size_t> kept_idx(n), traced_idx(n);
  std::vector<std::size_t> digits;
  for (std::size_t x = 0; x < n; ++x) {
    detail::to_digits(x, dims, digits);
    std::size_t ki = 0, ti = 0;
    for (std::size_t k = 0; k < dims.size(); ++k) {
      if (kept[k]) {
        ki = ki * dims[k] + digits[k];
      } else {
        ti = ti * dims[k] + digits[k];
      }
    }
    kept_idx[x] = ki;
    traced_idx[x] = ti;
  }

  ComplexMatrix out = ComplexMatrix::Zero(out_dim, out_dim);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      if (traced_idx[r] == traced_idx[c]) {
        out(kept_idx[r], kept_idx[c]) += m(r, c);
      }
    }
  }
  return out;
}

/// Reorder tensor factors: output factor k is input factor perm[k].
inline ComplexMatrix permute_systems(const ComplexMatrix& m, const Dims& dims,
                                     const std::vector<std::size_t>& perm) {
  detail::check_square_dims(m, dims, "permute_systems");
  if (perm.size() != dims.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                "permute_systems: permutation length != number of subsystems");
  }
  std::vector<bool> seen(dims.size(), false);
  for (auto p : perm) {
    if (p >= dims.size() || seen[p]) {
      throw Error(ErrorKind::DimensionMismatch,
                  "permute_systems: not a permutation");
    }
    seen[p] = true;
  }
  Dims new_dims(dims.size());
  for (std::size_t k = 0; k < perm.size(); ++k) new_dims[k] = dims[perm[k]];

  const std::size_t n = product(dims);
  std::vector<std::size_t> target(n);
  std::vector<std::size_t> digits;
  for (std::size_t x = 0; x < n; ++x) {
    detail::to_digits(x, dims, digits);
    std::size_t y = 0;
    for (std::size_t k = 0; k < perm.size(); ++k) {
      y = y * new_dims[k] + digits[perm[k]];
    }
    target[x] = y;
  }
  ComplexMatrix out(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      out(target[r], target[c]) = m(r, c);
    }
  }
  return out;
}

inline Dims permute_dims(const Dims& dims, const std::vector<std::size_t>& perm) {
  Dims out(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k) out[k] = dims.at(perm[k]);
  return out;
}

/// Inverse of a permutation in the permute_systems convention.
inline std::vector<std::size_t> inverse_permutation(
    const std::vector<std::size_t>& perm) {
  std::vector<std::size_t> inv(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k) inv[perm[k]] = k;
  return inv;
}

/// Hilbert-Schmidt inner product tr(A^dagger B).
inline Complex hs_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::DimensionMismatch,
                "hs_inner: operands have different shapes");
  }
  return (a.conjugate().array() * b.array()).sum();
}

inline double hs_norm_sq(const ComplexMatrix& a) { return a.squaredNorm(); }

}  // namespace nonbiloc
