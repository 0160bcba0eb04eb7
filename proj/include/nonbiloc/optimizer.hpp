#pragma once

// Local search over admissible von Neumann measurements.
//
// An operator S acts on M (x) R, with the measured factor M first. For a rank-1
// measurement {|w_h>} on M the dephased overlap is
//
//   F(w) = tr S Pi(S) = sum_h || (<w_h| (x) I) S (|w_h> (x) I) ||_HS^2 .
//
// Measurements that leave a marginal on M undisturbed are exactly the bases
// adapted to its eigenspaces, so the search runs over one unitary per
// eigenspace block. Each block unitary is reached by Givens rotations
// (angle, phase) on pairs of its columns; a rotation of columns p and q only
// changes the two terms h = p, q of F, which keeps each line search cheap.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "nonbiloc/measurements.hpp"

namespace nonbiloc {

struct OptimizerConfig {
  std::size_t restarts = 16;
  std::uint64_t seed = 0;
  std::size_t max_sweeps = 500;
  double convergence_tol = 1e-12;   // stop when a sweep improves F by less
  double degeneracy_tol = kDegeneracyTol;
  std::size_t threads = 0;          // 0: NONBILOC_THREADS or hardware
  bool use_closed_forms = true;
};

enum class Sense { Minimize, Maximize };

struct MeasurementProblem {
  ComplexMatrix op;  // (measured_dim * rest_dim) square, measured factor first
  std::size_t measured_dim = 0;
  std::size_t rest_dim = 0;
};

struct SearchResult {
  double objective = 0.0;
  std::vector<ComplexVector> vectors;
  std::size_t restarts = 0;
  std::size_t sweeps = 0;   // summed over restarts
  std::size_t best_restart = 0;
};

namespace detail {

inline double overlap_term(const MeasurementProblem& p, const ComplexVector& w) {
  const auto d1 = static_cast<Eigen::Index>(p.measured_dim);
  const auto d2 = static_cast<Eigen::Index>(p.rest_dim);
  ComplexMatrix rows = ComplexMatrix::Zero(d2, d1 * d2);
  for (Eigen::Index a = 0; a < d1; ++a) {
    if (w[a] == Complex(0.0)) continue;
    rows.noalias() += std::conj(w[a]) * p.op.middleRows(a * d2, d2);
  }
  ComplexMatrix block = ComplexMatrix::Zero(d2, d2);
  for (Eigen::Index b = 0; b < d1; ++b) {
    if (w[b] == Complex(0.0)) continue;
    block.noalias() += w[b] * rows.middleCols(b * d2, d2);
  }
  return block.squaredNorm();
}

inline std::size_t thread_count(const OptimizerConfig& cfg, std::size_t jobs) {
  std::size_t n = cfg.threads;
  if (n == 0) {
    if (const char* env = std::getenv("NONBILOC_THREADS")) {
      n = static_cast<std::size_t>(std::strtoul(env, nullptr, 10));
    }
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(n, jobs));
}

// Minimizes a scalar function on [lo, hi] by golden-section search.
template <class F>
double golden_section(F&& f, double lo, double hi, double& best_value,
                      double tol = 1e-11) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - invphi * (b - a); fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + invphi * (b - a); fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  best_value = f(x);
  return x;
}

class BlockSearch {
 public:
  BlockSearch(const MeasurementProblem& problem, const EigenspaceBlocks& blocks,
              Sense sense)
      : problem_(problem), blocks_(blocks),
        sign_(sense == Sense::Minimize ? 1.0 : -1.0) {}

  // One local descent from the given block rotations.
  SearchResult run(const std::vector<ComplexMatrix>& rotations,
                   const OptimizerConfig& cfg) const {
    std::vector<ComplexVector> w;
    std::vector<std::pair<std::size_t, std::size_t>> block_range;
    for (std::size_t k = 0; k < blocks_.bases.size(); ++k) {
      const ComplexMatrix cols = blocks_.bases[k] * rotations[k];
      block_range.emplace_back(w.size(), blocks_.multiplicities[k]);
      for (Eigen::Index c = 0; c < cols.cols(); ++c) w.emplace_back(cols.col(c));
    }
    std::vector<double> terms(w.size());
    for (std::size_t h = 0; h < w.size(); ++h) terms[h] = sign_ * overlap_term(problem_, w[h]);

    auto total = [&] {
      double s = 0.0;
      for (double t : terms) s += t;
      return s;
    };

    SearchResult out;
    double current = total();
    const bool searchable = std::any_of(
        blocks_.multiplicities.begin(), blocks_.multiplicities.end(),
        [](std::size_t m) { return m > 1; });
    while (searchable && out.sweeps < cfg.max_sweeps) {
      ++out.sweeps;
      for (const auto& [start, mult] : block_range) {
        for (std::size_t p = start; p < start + mult; ++p) {
          for (std::size_t q = p + 1; q < start + mult; ++q) {
            optimize_pair(w[p], w[q], terms[p], terms[q]);
          }
        }
      }
      const double next = total();
      const double gain = current - next;
      current = next;
      if (gain < cfg.convergence_tol) break;
    }
    // Fresh evaluation without accumulated drift.
    double obj = 0.0;
    for (auto& v : w) {
      v.normalize();
      obj += overlap_term(problem_, v);
    }
    out.objective = obj;
    out.vectors = std::move(w);
    out.restarts = 1;
    return out;
  }

 private:
  static void rotate(const ComplexVector& wp, const ComplexVector& wq, double theta,
                     double phi, ComplexVector& op, ComplexVector& oq) {
    const double c = std::cos(theta), s = std::sin(theta);
    const Complex e = std::polar(1.0, phi);
    op = c * wp + e * s * wq;
    oq = -std::conj(e) * s * wp + c * wq;
  }

  // Terms h = p, q as quadratic forms in the pair's bilinear blocks
  // M(x, y) = sum_ij conj(x_i) y_j S_ij, ordered (pp, pq, qp, qq). With the Gram
  // matrix of those four blocks each trial rotation costs O(1).
  struct PairForm {
    Eigen::Matrix4cd gram;

    double value(double theta, double phi) const {
      const double c = std::cos(theta), s = std::sin(theta);
      const Complex e = std::polar(1.0, phi);
      const Eigen::Vector4cd a(c * c, c * s * e, c * s * std::conj(e), s * s);
      const Eigen::Vector4cd b(s * s, -c * s * e, -c * s * std::conj(e), c * c);
      return (a.dot(gram * a) + b.dot(gram * b)).real();
    }
  };

  PairForm pair_form(const ComplexVector& wp, const ComplexVector& wq) const {
    const auto d1 = static_cast<Eigen::Index>(problem_.measured_dim);
    const auto d2 = static_cast<Eigen::Index>(problem_.rest_dim);
    auto rows_of = [&](const ComplexVector& x) {
      ComplexMatrix rows = ComplexMatrix::Zero(d2, d1 * d2);
      for (Eigen::Index i = 0; i < d1; ++i) {
        if (x[i] != Complex(0.0)) rows.noalias() += std::conj(x[i]) * problem_.op.middleRows(i * d2, d2);
      }
      return rows;
    };
    auto cols_of = [&](const ComplexMatrix& rows, const ComplexVector& y) {
      ComplexMatrix m = ComplexMatrix::Zero(d2, d2);
      for (Eigen::Index j = 0; j < d1; ++j) {
        if (y[j] != Complex(0.0)) m.noalias() += y[j] * rows.middleCols(j * d2, d2);
      }
      return m;
    };
    const ComplexMatrix rp = rows_of(wp), rq = rows_of(wq);
    const std::array<ComplexMatrix, 4> m{cols_of(rp, wp), cols_of(rp, wq), cols_of(rq, wp),
                                         cols_of(rq, wq)};
    PairForm f;
    for (int x = 0; x < 4; ++x) {
      for (int y = 0; y < 4; ++y) f.gram(x, y) = hs_inner(m[x], m[y]);
    }
    return f;
  }

  // Best Givens rotation of (wp, wq); applied only if it lowers the signed
  // objective. The projector pair has period pi/2 in theta and pi in phi.
  void optimize_pair(ComplexVector& wp, ComplexVector& wq, double& tp,
                     double& tq) const {
    constexpr double pi = std::numbers::pi;
    const double base = tp + tq;
    const PairForm form = pair_form(wp, wq);
    auto pair_value = [&](double theta, double phi) { return sign_ * form.value(theta, phi); };
    constexpr int kThetaGrid = 12;
    constexpr int kPhiGrid = 4;
    double best = base, best_theta = 0.0, best_phi = 0.0;
    for (int i = 0; i < kPhiGrid; ++i) {
      const double phi = pi * i / kPhiGrid;
      for (int j = 1; j < kThetaGrid; ++j) {
        const double theta = -pi / 4 + (pi / 2) * j / kThetaGrid;
        const double v = pair_value(theta, phi);
        if (v < best) { best = v; best_theta = theta; best_phi = phi; }
      }
    }
    const double dtheta = (pi / 2) / kThetaGrid, dphi = pi / kPhiGrid;
    for (int round = 0; round < 2; ++round) {
      double v;
      const double t = golden_section(
          [&](double x) { return pair_value(x, best_phi); },
          best_theta - dtheta, best_theta + dtheta, v);
      if (v < best) { best = v; best_theta = t; }
      const double f = golden_section(
          [&](double x) { return pair_value(best_theta, x); },
          best_phi - dphi, best_phi + dphi, v);
      if (v < best) { best = v; best_phi = f; }
    }
    if (best < base) {
      ComplexVector a, b;
      rotate(wp, wq, best_theta, best_phi, a, b);
      wp = std::move(a);
      wq = std::move(b);
      tp = sign_ * overlap_term(problem_, wp);
      tq = sign_ * overlap_term(problem_, wq);
    }
  }

  const MeasurementProblem& problem_;
  const EigenspaceBlocks& blocks_;
  double sign_;
};

}  // namespace detail

/// Dephased overlap tr S Pi(S) for measurement vectors on the measured factor.
inline double dephased_overlap(const MeasurementProblem& p,
                               const std::vector<ComplexVector>& vectors) {
  double s = 0.0;
  for (const auto& w : vectors) s += detail::overlap_term(p, w);
  return s;
}

/// Multi-start block-Givens coordinate descent. Restart 0 starts from the
/// spectral measurement of the marginal (identity rotations); restart r > 0
/// starts from Haar-random block unitaries drawn from seed + r. The best
/// restart wins, ties going to the lowest index, so the result does not
/// depend on thread scheduling.
inline SearchResult optimize_measurement(const MeasurementProblem& problem,
                                         const EigenspaceBlocks& blocks, Sense sense,
                                         const OptimizerConfig& cfg) {
  if (blocks.dim() != problem.measured_dim ||
      static_cast<std::size_t>(problem.op.rows()) !=
          problem.measured_dim * problem.rest_dim) {
    throw Error(ErrorKind::DimensionMismatch,
                "optimizer: blocks and operator dimensions disagree");
  }
  const std::size_t restarts = std::max<std::size_t>(1, cfg.restarts);
  const detail::BlockSearch search(problem, blocks, sense);
  std::vector<SearchResult> results(restarts);

  auto job = [&](std::size_t r) {
    std::vector<ComplexMatrix> rotations;
    Rng rng(cfg.seed + r);
    for (auto m : blocks.multiplicities) {
      rotations.push_back(r == 0 || m == 1 ? identity(m) : random_unitary(m, rng));
    }
    results[r] = search.run(rotations, cfg);
  };

  const std::size_t nthreads = detail::thread_count(cfg, restarts);
  if (nthreads <= 1) {
    for (std::size_t r = 0; r < restarts; ++r) job(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nthreads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < restarts; r = next++) job(r);
      });
    }
    for (auto& th : pool) th.join();
  }

  const double sign = sense == Sense::Minimize ? 1.0 : -1.0;
  std::size_t best = 0;
  std::size_t sweeps = 0;
  for (std::size_t r = 0; r < restarts; ++r) {
    sweeps += results[r].sweeps;
    if (sign * results[r].objective < sign * results[best].objective) best = r;
  }
  SearchResult out = std::move(results[best]);
  out.restarts = restarts;
  out.sweeps = sweeps;
  out.best_restart = best;
  return out;
}

}  // namespace nonbiloc
