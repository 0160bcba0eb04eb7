#include "catch_amalgamated.hpp"
#include "nonbiloc/linalg.hpp"
#include "nonbiloc/states.hpp"
#include "oracle.hpp"

using namespace nonbiloc;
using Catch::Matchers::WithinAbs;

namespace {

ComplexMatrix random_hermitian(std::size_t d, Rng& rng) {
  const ComplexMatrix g = ginibre(d, d, rng);
  return 0.5 * (g + g.adjoint());
}

}  // namespace

TEST_CASE("eig_hermitian reconstructs and matches the Jacobi oracle", "[linalg][property]") {
  Rng rng(11);
  std::uniform_int_distribution<std::size_t> dim(2, 16);
  double worst_rec = 0.0, worst_orth = 0.0, worst_val = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t d = dim(rng);
    const ComplexMatrix h = random_hermitian(d, rng);
    const Spectrum s = eig_hermitian(h);
    const ComplexMatrix& v = s.eigenvectors;
    const ComplexMatrix rec = v * s.eigenvalues.cast<Complex>().asDiagonal() * v.adjoint();
    worst_rec = std::max(worst_rec, max_abs(ComplexMatrix(rec - h)));
    worst_orth = std::max(worst_orth, max_abs(ComplexMatrix(v.adjoint() * v - identity(d))));
    const auto ref = oracle::eigenvalues(h);
    for (std::size_t k = 0; k < d; ++k) {
      worst_val = std::max(worst_val, std::abs(ref[k] - s.eigenvalues[k]));
      if (k > 0) REQUIRE(s.eigenvalues[k] >= s.eigenvalues[k - 1]);
    }
  }
  CHECK(worst_rec < 1e-10);
  CHECK(worst_orth < 1e-10);
  CHECK(worst_val < 1e-10);
}

TEST_CASE("eig_hermitian rejects non-Hermitian and non-square input", "[linalg]") {
  ComplexMatrix m(2, 2);
  m << 1, 2, 0, 1;
  REQUIRE_THROWS_AS(eig_hermitian(m), Error);
  try {
    eig_hermitian(m);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotHermitian);
    CHECK_THAT(e.residual(), WithinAbs(2.0, 1e-15));
  }
  try {
    eig_hermitian(ComplexMatrix::Zero(2, 3));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotSquare);
  }
}

TEST_CASE("eig_hermitian degenerate spectrum", "[linalg]") {
  const Spectrum s = eig_hermitian(identity(4) / 4.0);
  for (int k = 0; k < 4; ++k) CHECK_THAT(s.eigenvalues[k], WithinAbs(0.25, 1e-15));
  CHECK(max_abs(ComplexMatrix(s.eigenvectors.adjoint() * s.eigenvectors - identity(4))) <
        1e-12);
}

TEST_CASE("psd_sqrt squares back and matches the oracle", "[linalg][property]") {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 2 + trial % 7;
    const std::size_t rank = 1 + trial % d;
    const DensityOperator rho = random_density({d}, rank, rng);
    const ComplexMatrix r = psd_sqrt(rho.matrix());
    REQUIRE(max_abs(ComplexMatrix(r * r - rho.matrix())) < 1e-10);
    REQUIRE(hermiticity_residual(r) < 1e-14);
    REQUIRE(eig_hermitian(r).eigenvalues[0] > -1e-7);
    // The rank-deficient square root is sensitive to eigenvalue noise near 0.
    REQUIRE(max_abs(ComplexMatrix(r - oracle::sqrt_psd(rho.matrix()))) < 1e-6);
  }
}

TEST_CASE("psd_sqrt clamps tiny negatives and rejects real ones", "[linalg]") {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1e-12;
  const ComplexMatrix r = psd_sqrt(m);
  CHECK_THAT(r(1, 1).real(), WithinAbs(0.0, 1e-15));
  m(1, 1) = -1e-6;
  try {
    psd_sqrt(m);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotPSD);
    CHECK_THAT(e.residual(), WithinAbs(1e-6, 1e-12));
  }
}

TEST_CASE("psd_sqrt of a rotated projector is the projector", "[linalg][property]") {
  // Rounding leaves zero eigenvalues near 1e-16; their roots must not leak in.
  Rng rng(19);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const std::size_t d = 2 + k % 5;
    const ComplexMatrix u = random_unitary(d, rng);
    const ComplexMatrix p = u.col(0) * u.col(0).adjoint();
    worst = std::max(worst, (psd_sqrt(p) - p).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-13);
}

TEST_CASE("tensor matches the index-loop Kronecker product", "[linalg]") {
  Rng rng(13);
  const ComplexMatrix a = ginibre(2, 3, rng), b = ginibre(3, 2, rng);
  CHECK(max_abs(ComplexMatrix(tensor(a, b) - oracle::kron(a, b))) < 1e-15);
  const ComplexVector x = ginibre(2, 1, rng).col(0), y = ginibre(3, 1, rng).col(0);
  const ComplexVector xy = tensor(x, y);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) CHECK(std::abs(xy[i * 3 + j] - x[i] * y[j]) < 1e-15);
}

TEST_CASE("partial_trace of a product state", "[linalg]") {
  Rng rng(14);
  const DensityOperator a = random_density({2}, 2, rng), b = random_density({3}, 3, rng);
  const ComplexMatrix ab = tensor(a.matrix(), b.matrix());
  CHECK(max_abs(ComplexMatrix(partial_trace(ab, {2, 3}, {0}) - a.matrix())) < 1e-14);
  CHECK(max_abs(ComplexMatrix(partial_trace(ab, {2, 3}, {1}) - b.matrix())) < 1e-14);
  CHECK(std::abs(partial_trace(ab, {2, 3}, {})(0, 0) - 1.0) < 1e-14);
  CHECK(max_abs(ComplexMatrix(partial_trace(ab, {2, 3}, {0, 1}) - ab)) < 1e-15);
}

TEST_CASE("partial_trace agrees with the oracle and along every route", "[linalg][property]") {
  Rng rng(15);
  const Dims dims{2, 3, 2};
  for (int trial = 0; trial < 40; ++trial) {
    const DensityOperator rho = random_density(dims, 1 + trial % 12, rng);
    for (const std::vector<std::size_t>& keep :
         std::vector<std::vector<std::size_t>>{{0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}}) {
      REQUIRE(max_abs(ComplexMatrix(partial_trace(rho.matrix(), dims, keep) -
                                    oracle::partial_trace(rho.matrix(), dims, keep))) < 1e-14);
    }
    // tr_2 tr_1 == tr_{12}: trace C then B versus both at once.
    const ComplexMatrix ab = partial_trace(rho.matrix(), dims, {0, 1});
    const ComplexMatrix a_route = partial_trace(ab, {2, 3}, {0});
    REQUIRE(max_abs(ComplexMatrix(a_route - partial_trace(rho.matrix(), dims, {0}))) < 1e-14);
    const ComplexMatrix ac = partial_trace(rho.matrix(), dims, {0, 2});
    REQUIRE(max_abs(ComplexMatrix(partial_trace(ac, {2, 2}, {0}) - a_route)) < 1e-14);
  }
}

TEST_CASE("partial_trace rejects bad keep sets and dims", "[linalg]") {
  const ComplexMatrix m = identity(4) / 4.0;
  CHECK_THROWS_AS(partial_trace(m, {2, 2}, {2}), Error);
  CHECK_THROWS_AS(partial_trace(m, {2, 2}, {0, 0}), Error);
  CHECK_THROWS_AS(partial_trace(m, {2, 3}, {0}), Error);
}

TEST_CASE("permute_systems agrees with the oracle and preserves the spectrum",
          "[linalg][property]") {
  Rng rng(16);
  const Dims dims{2, 3, 2, 2};
  const std::vector<std::vector<std::size_t>> perms{
      {1, 2, 0, 3}, {3, 2, 1, 0}, {0, 3, 1, 2}, {2, 0, 3, 1}};
  for (int trial = 0; trial < 20; ++trial) {
    const DensityOperator rho = random_density(dims, 3, rng);
    const auto ref = eig_hermitian(rho.matrix()).eigenvalues;
    for (const auto& p : perms) {
      const ComplexMatrix q = permute_systems(rho.matrix(), dims, p);
      REQUIRE(max_abs(ComplexMatrix(q - oracle::permute(rho.matrix(), dims, p))) == 0.0);
      REQUIRE((eig_hermitian(q).eigenvalues - ref).cwiseAbs().maxCoeff() < 1e-12);
      const ComplexMatrix back =
          permute_systems(q, permute_dims(dims, p), inverse_permutation(p));
      REQUIRE(max_abs(ComplexMatrix(back - rho.matrix())) == 0.0);
    }
  }
}

TEST_CASE("permute_systems swaps a product", "[linalg]") {
  Rng rng(17);
  const ComplexMatrix a = ginibre(2, 2, rng), b = ginibre(3, 3, rng);
  CHECK(max_abs(ComplexMatrix(permute_systems(tensor(a, b), {2, 3}, {1, 0}) - tensor(b, a))) <
        1e-15);
  CHECK_THROWS_AS(permute_systems(tensor(a, b), {2, 3}, {0, 0}), Error);
  CHECK_THROWS_AS(permute_systems(tensor(a, b), {2, 3}, {0}), Error);
}

TEST_CASE("Hilbert-Schmidt inner product", "[linalg]") {
  Rng rng(18);
  const ComplexMatrix a = ginibre(3, 3, rng), b = ginibre(3, 3, rng);
  CHECK(std::abs(hs_inner(a, b) - (a.adjoint() * b).trace()) < 1e-13);
  CHECK_THAT(hs_norm_sq(a), WithinAbs(hs_inner(a, a).real(), 1e-12));
  CHECK_THROWS_AS(hs_inner(a, ginibre(2, 2, rng)), Error);
}
