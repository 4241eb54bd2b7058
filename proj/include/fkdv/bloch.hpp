#pragma once

// Bloch-wave linearization about a periodic traveling wave. For Floquet
// exponent xi in [-1/2, 1/2) the slice operators on modes |n| <= N are
//
//   L(n,m) = (kappa |n+xi|^alpha + 1) delta_nm - (p+1) W_hat(n-m),  W = P^p,
//   M(n,m) = i (n+xi) L(n,m),
//
// so L is Hermitian and M = D_xi L with D_xi = diag(i(n+xi)). Spectral
// stability holds when every slice spectrum stays on the imaginary axis.
//
// At xi = 0 the origin is a defective triple eigenvalue (algebraic 3,
// geometric 2), which plain QR splits by ~sqrt(eps ||M||). slice_spectrum
// therefore refines the three smallest eigenvalues by shifted inverse
// subspace iteration whenever they are well separated from the rest; the
// Ritz values of the refined invariant subspace recover the triple to the
// accuracy of the stored matrix itself.

#include "fkdv/fourier.hpp"
#include "fkdv/wave.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>
#include <thread>
#include <vector>

namespace fkdv {

// linear dispersion relation omega(k) = k p (|k|^alpha - 1)
template <typename Scalar>
Scalar dispersion_omega(const ModelParams<Scalar>& params, Scalar k) {
  return k * params.p * (detail::abs_pow(k, params.alpha) - Scalar(1));
}

template <typename Scalar = double>
struct BlochMatrix {
  Scalar xi = 0;
  MatrixXc<Scalar> M;
  MatrixXc<Scalar> L;
  Index n_modes = 0;
};

template <typename Scalar>
BlochMatrix<Scalar> assemble_bloch(const WaveSolution<Scalar>& w, Scalar xi, Index N) {
  if (!(std::abs(xi) <= Scalar(0.5)))
    throw std::invalid_argument("Floquet exponent must satisfy |xi| <= 1/2");
  const auto& prm = w.params;
  const auto wp = nonlinear_power(w.profile, prm.p, 2 * N);

  BlochMatrix<Scalar> bm;
  bm.xi = xi;
  bm.n_modes = N;
  const Index size = 2 * N + 1;
  bm.L.resize(size, size);
  for (Index r = 0; r < size; ++r) {
    const Scalar freq = Scalar(r - N) + xi;
    for (Index c = 0; c < size; ++c) {
      // W is even, so its coefficients are real; dropping the imaginary
      // round-off keeps L exactly real and the spectrum exactly symmetric
      // under lambda -> -conj(lambda)
      Scalar v = -(prm.p + 1) * std::real(wp.coeff((r - N) - (c - N)));
      if (r == c) v += w.k_alpha * detail::abs_pow(freq, prm.alpha) + Scalar(1);
      bm.L(r, c) = v;
    }
  }
  bm.M.resize(size, size);
  for (Index r = 0; r < size; ++r) {
    const std::complex<Scalar> d(Scalar(0), Scalar(r - N) + xi);
    bm.M.row(r) = d * bm.L.row(r);
  }
  return bm;
}

template <typename Scalar = double>
struct SpectrumSlice {
  Scalar xi = 0;
  VectorXc<Scalar> eigenvalues;  // sorted by (Im, Re)
  std::optional<std::vector<std::optional<int>>> krein;
  Scalar max_real_part = 0;
  bool refined = false;  // critical triple replaced by subspace iteration
};

namespace detail {

// Shifted inverse subspace iteration on the three smallest eigenvalues.
// Engages only when they form a cluster well inside the spectral gap
// (|lambda_3| <= 0.05 |lambda_4|); replaces the three eigenvalues with the
// Ritz values of the refined invariant subspace and the vectors with the
// Ritz vectors. Returns false (leaving QR output untouched) when the guard
// or the iteration fails.
template <typename Scalar>
bool refine_smallest_triple(const MatrixXc<Scalar>& M, VectorXc<Scalar>& evals,
                            MatrixXc<Scalar>& evecs) {
  using Complex = std::complex<Scalar>;
  const Index n = evals.size();
  if (n < 6) return false;

  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index(0));
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return std::abs(evals[a]) < std::abs(evals[b]); });
  const Scalar lam3 = std::abs(evals[order[2]]);
  const Scalar lam4 = std::abs(evals[order[3]]);
  if (!(lam4 > Scalar(1e-8)) || !(lam3 <= Scalar(0.05) * lam4)) return false;

  MatrixXc<Scalar> V(n, 3);
  for (Index j = 0; j < 3; ++j) V.col(j) = evecs.col(order[static_cast<size_t>(j)]);
  V = Eigen::HouseholderQR<MatrixXc<Scalar>>(V).householderQ() * MatrixXc<Scalar>::Identity(n, 3);

  // shift just off the cluster so the shifted matrix stays comfortably
  // regular while the iteration still contracts by ~|sigma| / gap per step
  const Complex sigma(Scalar(0), Scalar(1e-3) * lam4);
  MatrixXc<Scalar> shifted = M;
  shifted.diagonal().array() -= sigma;
  const Eigen::PartialPivLU<MatrixXc<Scalar>> lu(shifted);

  // the residual cannot drop below the backward-error floor eps ||M||_F
  const Scalar floor = Scalar(50) * std::numeric_limits<Scalar>::epsilon() * M.norm();

  MatrixXc<Scalar> T(3, 3), R(n, 3);
  bool converged = false;
  for (int it = 0; it < 30; ++it) {
    MatrixXc<Scalar> W = lu.solve(V);
    V = Eigen::HouseholderQR<MatrixXc<Scalar>>(W).householderQ() * MatrixXc<Scalar>::Identity(n, 3);
    const MatrixXc<Scalar> MV = M * V;
    T = V.adjoint() * MV;
    R = MV - V * T;
    if (R.norm() <= floor) {
      converged = true;
      break;
    }
  }
  if (!converged) return false;

  Eigen::ComplexEigenSolver<MatrixXc<Scalar>> es3(T, true);
  if (es3.info() != Eigen::Success) return false;
  for (Index j = 0; j < 3; ++j) {
    const Index slot = order[static_cast<size_t>(j)];
    evals[slot] = es3.eigenvalues()[j];
    VectorXc<Scalar> ritz = V * es3.eigenvectors().col(j);
    evecs.col(slot) = ritz / ritz.norm();
  }
  return true;
}

}  // namespace detail

template <typename Scalar>
SpectrumSlice<Scalar> slice_spectrum(const BlochMatrix<Scalar>& bm, bool with_krein = false) {
  Eigen::ComplexEigenSolver<MatrixXc<Scalar>> es(bm.M, true);
  if (es.info() != Eigen::Success) throw SolverError("QR iteration failed");
  VectorXc<Scalar> evals = es.eigenvalues();
  MatrixXc<Scalar> evecs = es.eigenvectors();

  // QR eigenvalues carry O(eps ||M||) error; the Rayleigh quotient of each
  // computed eigenvector is quadratically closer for near-normal slices and
  // stays within the residual ball otherwise
  {
    const MatrixXc<Scalar> mv = bm.M * evecs;
    for (Index i = 0; i < evals.size(); ++i) {
      const auto v = evecs.col(i);
      evals[i] = (v.adjoint() * mv.col(i))(0) / v.squaredNorm();
    }
  }

  SpectrumSlice<Scalar> slice;
  slice.xi = bm.xi;
  slice.refined = detail::refine_smallest_triple(bm.M, evals, evecs);

  const Index n = evals.size();
  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index(0));
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (std::imag(evals[a]) != std::imag(evals[b]))
      return std::imag(evals[a]) < std::imag(evals[b]);
    return std::real(evals[a]) < std::real(evals[b]);
  });

  slice.eigenvalues.resize(n);
  for (Index i = 0; i < n; ++i) slice.eigenvalues[i] = evals[order[static_cast<size_t>(i)]];
  slice.max_real_part = slice.eigenvalues.real().maxCoeff();

  if (with_krein) {
    std::vector<std::optional<int>> signs(static_cast<size_t>(n));
    for (Index i = 0; i < n; ++i) {
      const std::complex<Scalar> lam = slice.eigenvalues[i];
      if (std::abs(std::real(lam)) > Scalar(1e-8)) continue;
      Scalar gap = std::numeric_limits<Scalar>::infinity();
      for (Index j = 0; j < n; ++j)
        if (j != i) gap = std::min(gap, std::abs(lam - slice.eigenvalues[j]));
      if (gap < Scalar(1e-6)) continue;  // cluster: signature skipped
      const VectorXc<Scalar> v = evecs.col(order[static_cast<size_t>(i)]);
      const Scalar q = std::real((v.adjoint() * (bm.L * v))(0)) / v.squaredNorm();
      signs[static_cast<size_t>(i)] = std::abs(q) <= Scalar(1e-8) ? 0 : (q > 0 ? 1 : -1);
    }
    slice.krein = std::move(signs);
  }
  return slice;
}

// Open window on the imaginary axis that isolates the three critical
// eigenvalues. For xi in [0, 1/2] the |n| <= 1 constant-state eigenvalues
// satisfy Im lambda in [-kappa/2 (1 - 2^{-alpha}), 3 kappa/2 ((3/2)^alpha - 1)]
// while |n| >= 2 gives Im lambda outside
// (-3 kappa/2 ((3/2)^alpha - 1), 2 kappa (2^alpha - 1)); the window edges sit
// midway into the two gaps. Mirrored for xi < 0.
template <typename Scalar>
struct CriticalBand {
  Scalar im_lower = 0;
  Scalar im_upper = 0;
};

template <typename Scalar>
CriticalBand<Scalar> critical_band(const ModelParams<Scalar>& params, Scalar k_alpha, Scalar xi) {
  const Scalar t_hi = Scalar(1.5) * k_alpha * (std::pow(Scalar(1.5), params.alpha) - 1);
  const Scalar t_lo = -Scalar(0.5) * k_alpha * (1 - std::pow(Scalar(2), -params.alpha));
  const Scalar s_pos = Scalar(2) * k_alpha * (std::pow(Scalar(2), params.alpha) - 1);
  CriticalBand<Scalar> band;
  band.im_lower = Scalar(0.5) * (-t_hi + t_lo);
  band.im_upper = Scalar(0.5) * (t_hi + s_pos);
  if (xi < Scalar(0)) {
    const Scalar lo = band.im_lower;
    band.im_lower = -band.im_upper;
    band.im_upper = -lo;
  }
  return band;
}

// Default Floquet grid: `count` uniform points j/(2 count), j = 1..count,
// plus a geometric tail 1e-4 * 2^j toward 0 where the critical triple
// collides. xi = 0 itself is excluded: the defective triple there sits at
// the origin for every wave and carries no stability information.
template <typename Scalar = double>
std::vector<Scalar> make_xi_grid(Index count = 64) {
  if (count < 1) throw std::invalid_argument("xi grid needs at least one point");
  std::vector<Scalar> grid;
  for (Index j = 1; j <= count; ++j) grid.push_back(Scalar(j) / Scalar(2 * count));
  const Scalar cutoff = Scalar(1) / Scalar(2 * count);
  for (Scalar x = Scalar(1e-4); x < cutoff; x *= 2) grid.push_back(x);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

enum class Stability { Stable, Unstable, Indeterminate };

inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    default: return "indeterminate";
  }
}

template <typename Scalar = double>
struct StabilityVerdict {
  Stability classification = Stability::Indeterminate;
  Scalar growth_rate = 0;  // max over the grid of max Re lambda
  Scalar worst_xi = 0;
  std::optional<Scalar> recheck_growth;  // worst slice re-run at finer truncation
};

template <typename Scalar = double>
struct SweepTolerances {
  Scalar tol_stable = Scalar(1e-7);
  Scalar tol_unstable = Scalar(1e-6);
  Index recheck_truncation = 48;  // 0 disables the convergence re-check
  Scalar recheck_agreement = Scalar(0.10);
};

// Verdict over a xi-grid. Slices are independent; with n_threads > 1 the
// grid is partitioned statically and results are reduced in grid order, so
// the outcome is deterministic.
template <typename Scalar>
StabilityVerdict<Scalar> stability_sweep(const WaveSolution<Scalar>& w,
                                         const std::vector<Scalar>& xi_grid, Index N,
                                         const SweepTolerances<Scalar>& tols = {},
                                         int n_threads = 1) {
  if (xi_grid.empty()) throw std::invalid_argument("empty xi grid");
  for (Scalar xi : xi_grid)
    if (!(xi >= Scalar(0) && xi <= Scalar(0.5)))
      throw std::invalid_argument("xi grid must lie in [0, 1/2]");

  std::vector<Scalar> growth(xi_grid.size());
  auto work = [&](size_t begin, size_t stride) {
    for (size_t i = begin; i < xi_grid.size(); i += stride)
      growth[i] = slice_spectrum(assemble_bloch(w, xi_grid[i], N)).max_real_part;
  };
  if (n_threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(work, static_cast<size_t>(t), n_threads);
    for (auto& th : pool) th.join();
  }

  StabilityVerdict<Scalar> verdict;
  verdict.growth_rate = growth[0];
  verdict.worst_xi = xi_grid[0];
  for (size_t i = 1; i < xi_grid.size(); ++i) {
    if (growth[i] > verdict.growth_rate) {
      verdict.growth_rate = growth[i];
      verdict.worst_xi = xi_grid[i];
    }
  }

  if (verdict.growth_rate <= tols.tol_stable) {
    verdict.classification = Stability::Stable;
  } else if (verdict.growth_rate >= tols.tol_unstable) {
    verdict.classification = Stability::Unstable;
    if (tols.recheck_truncation > 0 && tols.recheck_truncation != N) {
      const Scalar g2 =
          slice_spectrum(assemble_bloch(w, verdict.worst_xi, tols.recheck_truncation))
              .max_real_part;
      verdict.recheck_growth = g2;
      const Scalar scale = std::max(std::abs(verdict.growth_rate), std::abs(g2));
      if (std::abs(g2 - verdict.growth_rate) > tols.recheck_agreement * scale)
        verdict.classification = Stability::Indeterminate;
    }
  } else {
    verdict.classification = Stability::Indeterminate;
  }
  return verdict;
}

// Hausdorff distance between two finite point sets in C.
template <typename Scalar>
Scalar hausdorff_distance(const VectorXc<Scalar>& a, const VectorXc<Scalar>& b) {
  auto one_sided = [](const VectorXc<Scalar>& from, const VectorXc<Scalar>& to) {
    Scalar worst = 0;
    for (Index i = 0; i < from.size(); ++i) {
      Scalar best = std::numeric_limits<Scalar>::infinity();
      for (Index j = 0; j < to.size(); ++j) best = std::min(best, std::abs(from[i] - to[j]));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one_sided(a, b), one_sided(b, a));
}

template <typename Scalar = double>
struct BlockOracleReport {
  int n_periods = 1;
  Scalar hausdorff = 0;
  Scalar tolerance = 0;
  bool passed = false;
  VectorXc<Scalar> torus_eigenvalues;
  VectorXc<Scalar> bloch_union;
};

// Cross-validates the Bloch decomposition: the linearization assembled
// directly on the 2 pi n-periodic torus is permutation-similar to the block
// diagonal of the Bloch slices at xi = r/n, -floor(n/2) <= r < ceil(n/2).
// The torus mode window {m n + r} tiles exactly into the slice windows
// |m| <= N, so in exact arithmetic the two eigenvalue multisets coincide.
template <typename Scalar>
BlockOracleReport<Scalar> block_oracle(const WaveSolution<Scalar>& w, int n_periods, Index N,
                                       Scalar tolerance = Scalar(1e-7)) {
  if (n_periods < 1 || n_periods > 8)
    throw std::invalid_argument("n_periods out of range (1..8)");
  const auto& prm = w.params;
  const int n = n_periods;
  const int r_lo = -(n / 2);
  const int r_hi = (n + 1) / 2 - 1;

  BlockOracleReport<Scalar> rep;
  rep.n_periods = n;
  rep.tolerance = tolerance;

  const auto wp = nonlinear_power(w.profile, prm.p, 2 * N);
  const Index j_lo = -Index(n) * N + r_lo;
  const Index j_hi = Index(n) * N + r_hi;
  const Index size = j_hi - j_lo + 1;
  MatrixXc<Scalar> big(size, size);
  for (Index r = 0; r < size; ++r) {
    const Index j = j_lo + r;
    const Scalar freq = Scalar(j) / Scalar(n);
    const Scalar diag = w.k_alpha * detail::abs_pow(freq, prm.alpha) + Scalar(1);
    const std::complex<Scalar> d(Scalar(0), freq);
    for (Index c = 0; c < size; ++c) {
      const Index dj = (j_lo + r) - (j_lo + c);
      Scalar v(0);
      if (dj % n == 0) v = -(prm.p + 1) * std::real(wp.coeff(dj / n));
      if (r == c) v += diag;
      big(r, c) = d * v;
    }
  }

  Eigen::ComplexEigenSolver<MatrixXc<Scalar>> es(big, true);
  if (es.info() != Eigen::Success) throw SolverError("QR iteration failed");
  VectorXc<Scalar> evals = es.eigenvalues();
  MatrixXc<Scalar> evecs = es.eigenvectors();
  {
    const MatrixXc<Scalar> mv = big * evecs;
    for (Index i = 0; i < evals.size(); ++i) {
      const auto v = evecs.col(i);
      evals[i] = (v.adjoint() * mv.col(i))(0) / v.squaredNorm();
    }
  }
  detail::refine_smallest_triple(big, evals, evecs);
  rep.torus_eigenvalues = std::move(evals);

  rep.bloch_union.resize(size);
  Index at = 0;
  for (int r = r_lo; r <= r_hi; ++r) {
    const auto slice = slice_spectrum(assemble_bloch(w, Scalar(r) / Scalar(n), N));
    rep.bloch_union.segment(at, slice.eigenvalues.size()) = slice.eigenvalues;
    at += slice.eigenvalues.size();
  }

  rep.hausdorff = hausdorff_distance(rep.torus_eigenvalues, rep.bloch_union);
  rep.passed = rep.hausdorff <= tolerance;
  return rep;
}

namespace detail {

// multiset defect: sort both by (Im, Re), compare pairwise
template <typename Scalar>
Scalar spectrum_defect(VectorXc<Scalar> a, VectorXc<Scalar> b) {
  auto key = [](const std::complex<Scalar>& x, const std::complex<Scalar>& y) {
    if (std::imag(x) != std::imag(y)) return std::imag(x) < std::imag(y);
    return std::real(x) < std::real(y);
  };
  std::sort(a.begin(), a.end(), key);
  std::sort(b.begin(), b.end(), key);
  Scalar worst = 0;
  for (Index i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace detail

template <typename Scalar = double>
struct SymmetryReport {
  Scalar conjugation_defect = 0;     // sigma(xi) vs conj(sigma(-xi))
  Scalar negation_defect = 0;        // sigma(xi) vs -sigma(-xi)
  Scalar reflection_defect = 0;      // sigma(xi) vs -conj(sigma(xi))
  Scalar amplitude_defect = 0;       // sigma(xi; a) vs sigma(xi; -a)
  Scalar max_defect = 0;
};

// Exact symmetries of the Bloch spectra, checked as multisets. The wave at
// amplitude -a is re-solved internally for the last relation.
template <typename Scalar>
SymmetryReport<Scalar> symmetry_check(const WaveSolution<Scalar>& w, Scalar xi, Index N) {
  const auto plus = slice_spectrum(assemble_bloch(w, xi, N)).eigenvalues;
  const auto minus = slice_spectrum(assemble_bloch(w, -xi, N)).eigenvalues;

  SymmetryReport<Scalar> rep;
  rep.conjugation_defect = detail::spectrum_defect<Scalar>(plus, minus.conjugate());
  rep.negation_defect = detail::spectrum_defect<Scalar>(plus, -minus);
  rep.reflection_defect = detail::spectrum_defect<Scalar>(plus, -plus.conjugate());

  SolveOptions<Scalar> opts;
  opts.n_modes = w.profile.truncation();
  const auto mirrored = solve_wave(w.params, -w.a, w.b, opts);
  const auto mirror_spec = slice_spectrum(assemble_bloch(mirrored, xi, N)).eigenvalues;
  rep.amplitude_defect = detail::spectrum_defect<Scalar>(plus, mirror_spec);

  rep.max_defect = std::max({rep.conjugation_defect, rep.negation_defect,
                             rep.reflection_defect, rep.amplitude_defect});
  return rep;
}

}  // namespace fkdv
