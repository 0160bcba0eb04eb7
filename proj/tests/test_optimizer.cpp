#include <numbers>

#include "catch_amalgamated.hpp"
#include "nonbiloc/optimizer.hpp"
#include "oracle.hpp"

using namespace nonbiloc;
using Catch::Matchers::WithinAbs;

namespace {

MeasurementProblem random_problem(std::size_t dm, std::size_t dr, Rng& rng) {
  const DensityOperator rho = random_density({dm, dr}, dm * dr, rng);
  return MeasurementProblem{psd_sqrt(rho.matrix()), dm, dr};
}

EigenspaceBlocks one_block(std::size_t d) { return eigenspace_blocks(identity(d) / double(d)); }

// Minimum over qubit bases by a dense Bloch-sphere grid.
double grid_minimum(const MeasurementProblem& p, int n) {
  double best = 1e300;
  for (int i = 0; i <= n; ++i) {
    const double theta = std::numbers::pi * i / n;
    for (int j = 0; j < 2 * n; ++j) {
      const double phi = std::numbers::pi * j / n;
      ComplexVector a(2), b(2);
      a << std::cos(theta / 2), std::polar(std::sin(theta / 2), phi);
      b << -std::polar(std::sin(theta / 2), -phi), std::cos(theta / 2);
      best = std::min(best, dephased_overlap(p, {a, b}));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("dephased_overlap equals the lifted-projector oracle", "[optimizer]") {
  Rng rng(51);
  const MeasurementProblem p = random_problem(3, 2, rng);
  const ComplexMatrix u = random_unitary(3, rng);
  std::vector<ComplexVector> w;
  for (int k = 0; k < 3; ++k) w.emplace_back(u.col(k));
  const double ref = oracle::trace_product(p.op, oracle::dephase(p.op, 1, 2, w));
  CHECK_THAT(dephased_overlap(p, w), WithinAbs(ref, 1e-13));
}

TEST_CASE("optimizer reaches the qubit grid minimum", "[optimizer]") {
  Rng rng(52);
  for (int trial = 0; trial < 5; ++trial) {
    const MeasurementProblem p = random_problem(2, 2, rng);
    OptimizerConfig cfg;
    cfg.restarts = 4;
    const SearchResult r = optimize_measurement(p, one_block(2), Sense::Minimize, cfg);
    const double grid = grid_minimum(p, 200);
    CHECK(r.objective <= grid + 1e-12);
    CHECK(r.objective >= grid - 1e-3);
  }
}

TEST_CASE("minimum and maximum bracket every basis", "[optimizer]") {
  Rng rng(53);
  const MeasurementProblem p = random_problem(3, 2, rng);
  OptimizerConfig cfg;
  cfg.restarts = 6;
  const double lo = optimize_measurement(p, one_block(3), Sense::Minimize, cfg).objective;
  const double hi = optimize_measurement(p, one_block(3), Sense::Maximize, cfg).objective;
  for (int k = 0; k < 50; ++k) {
    const ComplexMatrix u = random_unitary(3, rng);
    std::vector<ComplexVector> w;
    for (int c = 0; c < 3; ++c) w.emplace_back(u.col(c));
    const double f = dephased_overlap(p, w);
    CHECK(f >= lo - 1e-9);
    CHECK(f <= hi + 1e-9);
  }
}

TEST_CASE("nondegenerate blocks leave nothing to search", "[optimizer]") {
  Rng rng(54);
  const MeasurementProblem p = random_problem(3, 2, rng);
  ComplexMatrix m = ComplexMatrix::Zero(3, 3);
  m(0, 0) = 0.2;
  m(1, 1) = 0.3;
  m(2, 2) = 0.5;
  const EigenspaceBlocks blocks = eigenspace_blocks(m);
  const SearchResult r = optimize_measurement(p, blocks, Sense::Minimize, {});
  CHECK(r.sweeps == 0);
  const auto spectral = spectral_measurement(blocks);
  CHECK_THAT(r.objective, WithinAbs(dephased_overlap(p, spectral.vectors()), 1e-14));
}

TEST_CASE("results are deterministic across runs and thread counts", "[optimizer]") {
  Rng rng(55);
  const MeasurementProblem p = random_problem(4, 2, rng);
  OptimizerConfig cfg;
  cfg.restarts = 8;
  cfg.seed = 9;
  cfg.threads = 1;
  const SearchResult a = optimize_measurement(p, one_block(4), Sense::Minimize, cfg);
  cfg.threads = 4;
  const SearchResult b = optimize_measurement(p, one_block(4), Sense::Minimize, cfg);
  CHECK(a.objective == b.objective);
  CHECK(a.best_restart == b.best_restart);
  CHECK(a.sweeps == b.sweeps);
  for (std::size_t h = 0; h < a.vectors.size(); ++h) CHECK(a.vectors[h] == b.vectors[h]);
  CHECK(a.restarts == 8);
}

TEST_CASE("restart 0 never does worse than its starting basis", "[optimizer]") {
  Rng rng(56);
  const MeasurementProblem p = random_problem(4, 3, rng);
  const EigenspaceBlocks blocks = one_block(4);
  OptimizerConfig cfg;
  cfg.restarts = 1;
  const SearchResult r = optimize_measurement(p, blocks, Sense::Minimize, cfg);
  CHECK(r.objective <= dephased_overlap(p, spectral_measurement(blocks).vectors()) + 1e-14);
  ComplexMatrix basis(4, 4);
  for (int k = 0; k < 4; ++k) basis.col(k) = r.vectors[k];
  CHECK(max_abs(ComplexMatrix(basis.adjoint() * basis - identity(4))) < 1e-12);
}

TEST_CASE("optimizer rejects inconsistent dimensions", "[optimizer]") {
  Rng rng(57);
  const MeasurementProblem p = random_problem(2, 2, rng);
  CHECK_THROWS_AS(optimize_measurement(p, one_block(3), Sense::Minimize, {}), Error);
}

TEST_CASE("NONBILOC_THREADS caps the worker count", "[optimizer]") {
  OptimizerConfig cfg;
  cfg.threads = 3;
  CHECK(detail::thread_count(cfg, 16) == 3);
  CHECK(detail::thread_count(cfg, 2) == 2);
  cfg.threads = 0;
  ::setenv("NONBILOC_THREADS", "2", 1);
  CHECK(detail::thread_count(cfg, 16) == 2);
  ::unsetenv("NONBILOC_THREADS");
  CHECK(detail::thread_count(cfg, 16) >= 1);
}
