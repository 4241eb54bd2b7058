#pragma once

// Finite-dimensional reduction of the critical Bloch triple. The three
// eigenvalues bifurcating from the origin are lambda = i p xi X with X a root
// of a real cubic X^3 + d2 X^2 + d1 X + d0; its discriminant decides between
// three real roots (all critical eigenvalues on the imaginary axis) and a
// complex pair (sideband instability). The a^2 coefficient of the
// discriminant at b = xi = 0 has the closed form Gamma(alpha, p), whose sign
// changes across the critical nonlinearity power p*(alpha).

#include "fkdv/bloch.hpp"
#include "fkdv/fourier.hpp"
#include "fkdv/wave.hpp"

#include <array>
#include <vector>

namespace fkdv {

// p*(alpha) = (2^alpha (3 + alpha) - 4 - 2 alpha) / (2 + 2^alpha (alpha - 1))
template <typename Scalar>
Scalar critical_power(Scalar alpha) {
  if (!(alpha > Scalar(0.5))) throw std::domain_error("alpha must exceed 1/2");
  const Scalar two_alpha = std::pow(Scalar(2), alpha);
  return (two_alpha * (3 + alpha) - 4 - 2 * alpha) / (2 + two_alpha * (alpha - 1));
}

template <typename Scalar = double>
struct CriticalPowerMax {
  Scalar alpha_star = 0;
  Scalar p_max = 0;
};

// Maximum of p* over alpha in [1, 10] by golden-section search.
template <typename Scalar = double>
CriticalPowerMax<Scalar> critical_power_max() {
  const Scalar gr = (std::sqrt(Scalar(5)) - 1) / 2;
  Scalar lo = 1, hi = 10;
  Scalar x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  Scalar f1 = critical_power(x1), f2 = critical_power(x2);
  while (hi - lo > Scalar(1e-8)) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = critical_power(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = critical_power(x1);
    }
  }
  CriticalPowerMax<Scalar> m;
  m.alpha_star = (lo + hi) / 2;
  m.p_max = critical_power(m.alpha_star);
  return m;
}

// Stability window in alpha for a fixed power p: the two roots of
// p*(alpha) = p bracketing the maximum, each located by bisection.
template <typename Scalar>
std::pair<Scalar, Scalar> alpha_window(Scalar p) {
  const auto m = critical_power_max<Scalar>();
  if (!(p > Scalar(1) && p < m.p_max))
    throw std::domain_error("p outside (1, p_max): no stability window");
  auto bisect = [&](Scalar lo, Scalar hi, bool rising) {
    for (int it = 0; it < 200 && hi - lo > Scalar(1e-8); ++it) {
      const Scalar mid = (lo + hi) / 2;
      const bool below = critical_power(mid) < p;
      if (below == rising) lo = mid; else hi = mid;
    }
    return (lo + hi) / 2;
  };
  Scalar far = m.alpha_star;
  while (critical_power(far) >= p) far *= 2;
  return {bisect(Scalar(1), m.alpha_star, true), bisect(m.alpha_star, far, false)};
}

// Gamma(alpha, p): the a^2 coefficient of the discriminant at b = xi = 0.
template <typename Scalar>
Scalar gamma_coefficient(Scalar alpha, Scalar p) {
  if (!(alpha > Scalar(0.5))) throw std::domain_error("alpha must exceed 1/2");
  const Scalar two_alpha = std::pow(Scalar(2), alpha);
  const Scalar bracket = two_alpha * (4 - (p - 1) * (alpha - 1)) - 4 - 2 * (alpha + p);
  const Scalar quartic = (1 + alpha) * (1 + alpha) * (1 + alpha) * (1 + alpha);
  return (p + 1) * alpha * quartic * bracket / (2 * (two_alpha - 1));
}

template <typename Scalar = double>
struct DispersionFactors {
  Scalar a1_plus = 0;   // A1(xi)
  Scalar a1_minus = 0;  // A1(-xi)
  Scalar a2 = 0;        // A2(xi)
};

// A1(xi) = -1 + (1+xi)^{alpha+1} - xi |xi|^alpha,
// A2(xi) = -2 + (1-xi)^{alpha+1} + (1+xi)^{alpha+1}.
template <typename Scalar>
DispersionFactors<Scalar> a1a2(Scalar alpha, Scalar xi) {
  if (!(std::abs(xi) <= Scalar(0.5)))
    throw std::invalid_argument("Floquet exponent must satisfy |xi| <= 1/2");
  auto a1 = [&](Scalar x) {
    return -1 + std::pow(1 + x, alpha + 1) - x * detail::abs_pow(x, alpha);
  };
  DispersionFactors<Scalar> f;
  f.a1_plus = a1(xi);
  f.a1_minus = a1(-xi);
  f.a2 = -2 + std::pow(1 - xi, alpha + 1) + std::pow(1 + xi, alpha + 1);
  return f;
}

// Closed-form discriminant of the constant state Q_b:
// Delta = kappa^6 (A1(xi) A1(-xi) A2(xi))^2 / (p^6 xi^6), kappa = (p+1)Q_b^p - 1.
template <typename Scalar>
Scalar delta_constant_state(const ModelParams<Scalar>& params, Scalar b, Scalar xi) {
  if (xi == Scalar(0))
    throw std::invalid_argument("xi = 0 is a removable singularity: use the small-xi limit");
  const Scalar q = equilibrium(params, b);
  const Scalar kappa = (params.p + 1) * std::pow(q, params.p) - 1;
  const auto f = a1a2(params.alpha, xi);
  const Scalar prod = f.a1_plus * f.a1_minus * f.a2;
  const Scalar ratio = kappa / params.p;
  const Scalar half = ratio * ratio * ratio * prod / (xi * xi * xi);
  return half * half;
}

template <typename Scalar = double>
struct CriticalBasis {
  PeriodicFunction<Scalar> eta0, eta1, eta2;
};

// Basis of the generalized kernel of M at xi = 0:
//   eta0 = (d_b kappa dP/da - d_a kappa dP/db)/(p+1)   (kernel)
//   eta1 = -(1/a) dP/dz                                (kernel; sin z at a=0)
//   eta2 = d_b kappa P - p kappa dP/db                 (generalized: M eta2 = p a d_b kappa eta1)
template <typename Scalar>
CriticalBasis<Scalar> critical_basis(const WaveSolution<Scalar>& w,
                                     const FamilyDerivatives<Scalar>& d) {
  const Scalar p = w.params.p;
  CriticalBasis<Scalar> basis;
  basis.eta0 = (Scalar(1) / (p + 1)) *
               (d.dk_db * d.dP_da - d.dk_da * d.dP_db);
  basis.eta1 = std::abs(w.a) < Scalar(1e-14)
                   ? PeriodicFunction<Scalar>::sine(1, Scalar(1), w.profile.truncation())
                   : (Scalar(-1) / w.a) * d.dP_dz;
  basis.eta2 = d.dk_db * w.profile - (p * w.k_alpha) * d.dP_db;
  return basis;
}

template <typename Scalar = double>
struct ReducedMatrices {
  MatrixXc<Scalar> B;  // 3x3: <eta_j, M eta_k> / <eta_j, eta_j>
  MatrixXc<Scalar> I;  // 3x3: <eta_j, eta_k> / <eta_j, eta_j>
  Scalar xi = 0;
  std::complex<Scalar> sigma;  // B(1,2), the only nonzero entry at xi = 0
  Scalar pattern_defect = 0;   // max |B(j,k)| over (j,k) != (1,2)
};

// Projects M_{a,b,xi} onto the critical basis. The basis is always the one
// frozen at xi = 0; evaluating with xi != 0 yields the first-order-in-xi
// expansion data (the basis variation does not enter at order a xi).
template <typename Scalar>
ReducedMatrices<Scalar> reduced_matrices(const WaveSolution<Scalar>& w,
                                         const FamilyDerivatives<Scalar>& d, Index N,
                                         Scalar xi = 0) {
  const auto basis = critical_basis(w, d);
  const auto bm = assemble_bloch(w, xi, N);

  std::array<VectorXc<Scalar>, 3> eta = {basis.eta0.truncated(N).coefficients(),
                                         basis.eta1.truncated(N).coefficients(),
                                         basis.eta2.truncated(N).coefficients()};
  std::array<VectorXc<Scalar>, 3> m_eta;
  std::array<Scalar, 3> denom;
  for (int j = 0; j < 3; ++j) {
    denom[j] = eta[j].squaredNorm();
    if (denom[j] <= Scalar(1e-12)) throw SolverError("degenerate eta basis");
    m_eta[j] = bm.M * eta[j];
  }

  ReducedMatrices<Scalar> rm;
  rm.xi = xi;
  rm.B.resize(3, 3);
  rm.I.resize(3, 3);
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < 3; ++k) {
      rm.B(j, k) = eta[j].dot(m_eta[k]) / denom[j];
      rm.I(j, k) = eta[j].dot(eta[k]) / denom[j];
    }
  }
  rm.sigma = rm.B(1, 2);
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k)
      if (!(j == 1 && k == 2)) rm.pattern_defect = std::max(rm.pattern_defect, std::abs(rm.B(j, k)));
  return rm;
}

enum class CubicVerdict { ThreeReal, ComplexPair };

template <typename Scalar = double>
struct CubicReduction {
  Scalar d2 = 0, d1 = 0, d0 = 0;
  Scalar discriminant = 0;
  std::array<std::complex<Scalar>, 3> roots;
  CubicVerdict verdict = CubicVerdict::ThreeReal;
  Scalar imag_residue = 0;  // largest discarded imaginary part of the d's
};

namespace detail {

// shared tail: real coefficients -> discriminant, roots, verdict
template <typename Scalar>
CubicReduction<Scalar> cubic_from_scaled_roots(const std::array<std::complex<Scalar>, 3>& x) {
  using Complex = std::complex<Scalar>;
  const Complex e1 = x[0] + x[1] + x[2];
  const Complex e2 = x[0] * x[1] + x[0] * x[2] + x[1] * x[2];
  const Complex e3 = x[0] * x[1] * x[2];

  CubicReduction<Scalar> cr;
  cr.imag_residue = std::max({std::abs(std::imag(e1)), std::abs(std::imag(e2)),
                              std::abs(std::imag(e3))});
  if (cr.imag_residue > Scalar(1e-6))
    throw SolverError("symmetry violated; triple mis-identified");
  cr.d2 = -std::real(e1);
  cr.d1 = std::real(e2);
  cr.d0 = -std::real(e3);

  const Scalar d2 = cr.d2, d1 = cr.d1, d0 = cr.d0;
  cr.discriminant = 18 * d2 * d1 * d0 + d2 * d2 * d1 * d1 - 4 * d2 * d2 * d2 * d0 -
                    4 * d1 * d1 * d1 - 27 * d0 * d0;

  MatrixX<Scalar> companion = MatrixX<Scalar>::Zero(3, 3);
  companion(1, 0) = 1;
  companion(2, 1) = 1;
  companion(0, 2) = -d0;
  companion(1, 2) = -d1;
  companion(2, 2) = -d2;
  Eigen::EigenSolver<MatrixX<Scalar>> es(companion, false);
  if (es.info() != Eigen::Success) throw SolverError("QR iteration failed");
  for (int j = 0; j < 3; ++j) cr.roots[j] = es.eigenvalues()[j];

  // ties (vanishing discriminant) mean repeated real roots, so they classify
  // as three-real
  cr.verdict = cr.discriminant >= -Scalar(1e-12) ? CubicVerdict::ThreeReal
                                                 : CubicVerdict::ComplexPair;
  return cr;
}

}  // namespace detail

// Rescales the three critical eigenvalues by 1/(i p xi) and builds the real
// cubic they satisfy. Imaginary residues of the symmetric functions beyond
// 1e-6 indicate a mis-identified triple.
template <typename Scalar>
CubicReduction<Scalar> cubic_from_eigenvalues(const std::array<std::complex<Scalar>, 3>& lams,
                                              Scalar p, Scalar xi) {
  if (xi == Scalar(0)) throw std::invalid_argument("cubic rescaling requires xi != 0");
  const std::complex<Scalar> ipxi(Scalar(0), p * xi);
  return detail::cubic_from_scaled_roots<Scalar>({lams[0] / ipxi, lams[1] / ipxi, lams[2] / ipxi});
}

// Same reduction driven by the 3x3 matrices: the critical eigenvalues are the
// generalized eigenvalues of (B, I).
template <typename Scalar>
CubicReduction<Scalar> cubic_from_matrices(const ReducedMatrices<Scalar>& rm, Scalar p) {
  if (rm.xi == Scalar(0)) throw std::invalid_argument("cubic rescaling requires xi != 0");
  Eigen::ComplexEigenSolver<MatrixXc<Scalar>> es(rm.I.inverse() * rm.B, false);
  if (es.info() != Eigen::Success) throw SolverError("QR iteration failed");
  std::array<std::complex<Scalar>, 3> lams = {es.eigenvalues()[0], es.eigenvalues()[1],
                                              es.eigenvalues()[2]};
  return cubic_from_eigenvalues(lams, p, rm.xi);
}

// The three critical eigenvalues of a full slice spectrum, identified by the
// band window that separates them from the rest of the spectrum.
template <typename Scalar>
std::array<std::complex<Scalar>, 3> extract_critical_triple(const SpectrumSlice<Scalar>& slice,
                                                            const ModelParams<Scalar>& params,
                                                            Scalar k_alpha) {
  const auto band = critical_band(params, k_alpha, slice.xi);
  std::array<std::complex<Scalar>, 3> triple;
  int found = 0;
  for (Index i = 0; i < slice.eigenvalues.size(); ++i) {
    const Scalar im = std::imag(slice.eigenvalues[i]);
    if (im > band.im_lower && im < band.im_upper) {
      if (found == 3) throw SolverError("critical triple not isolated");
      triple[found++] = slice.eigenvalues[i];
    }
  }
  if (found != 3) throw SolverError("critical triple not isolated");
  return triple;
}

// Two-stage Richardson extrapolation to h = 0 of an even function sampled at
// h, h/2, h/4.
template <typename Scalar>
Scalar richardson3(Scalar f_h, Scalar f_h2, Scalar f_h4) {
  const Scalar r1a = (4 * f_h2 - f_h) / 3;
  const Scalar r1b = (4 * f_h4 - f_h2) / 3;
  return (16 * r1b - r1a) / 15;
}

// Discriminant of the cubic at (a, b) extrapolated to xi -> 0 by Richardson
// over {4 xi_small, 2 xi_small, xi_small}.
template <typename Scalar>
Scalar extrapolated_discriminant(const WaveSolution<Scalar>& w, Index N,
                                 Scalar xi_small = Scalar(0.005)) {
  std::array<Scalar, 3> vals;
  int at = 0;
  for (Scalar xi : {4 * xi_small, 2 * xi_small, xi_small}) {
    const auto slice = slice_spectrum(assemble_bloch(w, xi, N));
    const auto triple = extract_critical_triple(slice, w.params, w.k_alpha);
    vals[at++] = cubic_from_eigenvalues(triple, w.params.p, xi).discriminant;
  }
  return richardson3(vals[0], vals[1], vals[2]);
}

template <typename Scalar = double>
struct DiscriminantScalingReport {
  std::vector<Scalar> amplitudes;
  std::vector<Scalar> delta_extrapolated;        // one per amplitude
  Scalar fitted_gamma = 0;                       // a^2 coefficient of the fit g a^2 + h a^4
  Scalar gamma_closed_form = 0;
  Scalar gamma_relative_error = 0;
  bool gamma_agrees = false;                     // <= 5% relative (or both near zero)
  std::complex<Scalar> b1_top, b1_bottom;        // measured B1 entries (0,2), (2,0)
  std::complex<Scalar> b1_top_predicted, b1_bottom_predicted;
  Scalar b1_top_error = 0, b1_bottom_error = 0;  // relative
  bool b1_agrees = false;                        // <= 10% relative
};

// Quantitative check of the discriminant expansion Delta = Gamma a^2 + O(a^4)
// at b = 0, plus the first-order-in-xi structure of the reduced matrix B.
template <typename Scalar>
DiscriminantScalingReport<Scalar> discriminant_scaling_check(
    const ModelParams<Scalar>& params, const std::vector<Scalar>& amplitudes,
    Scalar xi_small = Scalar(0.005), const SolveOptions<Scalar>& opts = {}) {
  params.validate();
  if (amplitudes.size() < 2)
    throw std::invalid_argument("scaling check needs at least two amplitudes");
  const Index N = opts.n_modes;

  DiscriminantScalingReport<Scalar> rep;
  rep.amplitudes = amplitudes;
  for (Scalar a : amplitudes) {
    const auto w = solve_wave(params, a, Scalar(0), opts);
    rep.delta_extrapolated.push_back(extrapolated_discriminant(w, N, xi_small));
  }

  // exact two-term fit Delta = g a^2 + h a^4 (least squares when more than
  // two amplitudes are given); the a^4 term absorbs the next expansion order
  {
    const auto m = static_cast<Index>(amplitudes.size());
    MatrixX<Scalar> design(m, 2);
    VectorX<Scalar> rhs(m);
    for (Index i = 0; i < m; ++i) {
      const Scalar a2 = amplitudes[static_cast<size_t>(i)] * amplitudes[static_cast<size_t>(i)];
      design(i, 0) = a2;
      design(i, 1) = a2 * a2;
      rhs[i] = rep.delta_extrapolated[static_cast<size_t>(i)];
    }
    rep.fitted_gamma = design.colPivHouseholderQr().solve(rhs)[0];
  }

  rep.gamma_closed_form = gamma_coefficient(params.alpha, params.p);
  const Scalar scale =
      std::max(std::abs(rep.gamma_closed_form), std::abs(gamma_coefficient(params.alpha, Scalar(1))));
  rep.gamma_relative_error = std::abs(rep.fitted_gamma - rep.gamma_closed_form) /
                             std::max(std::abs(rep.gamma_closed_form), Scalar(1e-3) * scale);
  rep.gamma_agrees = rep.gamma_relative_error <= Scalar(0.05) ||
                     std::abs(rep.fitted_gamma - rep.gamma_closed_form) <= Scalar(1e-3) * scale;

  // B1 structure: difference quotient of the reduced matrix against the
  // frozen-basis evaluations at (a, 0), (0, 0), and xi in {0, 2 xi_small}
  const Scalar a_ref = amplitudes.back();
  const Scalar xi_ref = 2 * xi_small;
  const auto w_a = solve_wave(params, a_ref, Scalar(0), opts);
  const auto w_0 = solve_wave(params, Scalar(0), Scalar(0), opts);
  const auto d_a = family_derivatives(w_a);
  const auto d_0 = family_derivatives(w_0);
  const MatrixXc<Scalar> b_axi = reduced_matrices(w_a, d_a, N, xi_ref).B;
  const MatrixXc<Scalar> b_a0 = reduced_matrices(w_a, d_a, N, Scalar(0)).B;
  const MatrixXc<Scalar> b_0xi = reduced_matrices(w_0, d_0, N, xi_ref).B;
  const MatrixXc<Scalar> b1 = (b_axi - b_0xi - b_a0) / (a_ref * xi_ref);

  const Scalar alpha = params.alpha, p = params.p;
  const Scalar two_alpha = std::pow(Scalar(2), alpha);
  const Scalar top = (alpha - 1) * p * (p + 1) +
                     p * (2 + two_alpha * (p - 1)) / (2 * (two_alpha - 1));
  rep.b1_top_predicted = std::complex<Scalar>(0, top);
  rep.b1_bottom_predicted = std::complex<Scalar>(0, top / 2);
  rep.b1_top = b1(0, 2);
  rep.b1_bottom = b1(2, 0);
  rep.b1_top_error = std::abs(rep.b1_top - rep.b1_top_predicted) / std::abs(top);
  rep.b1_bottom_error = std::abs(rep.b1_bottom - rep.b1_bottom_predicted) / std::abs(top / 2);
  rep.b1_agrees = rep.b1_top_error <= Scalar(0.10) && rep.b1_bottom_error <= Scalar(0.10);
  return rep;
}

}  // namespace fkdv
