#pragma once

// Small-amplitude periodic traveling waves of u_t + (-Lambda^alpha u + u^{p+1})_x = 0.
//
// In the scaled variable z = k x the even 2*pi-periodic profile P and the
// wavenumber power kappa = k^alpha solve
//
//   -kappa Lambda^alpha P - P + P^{p+1} = b,          u_hat(1) = a/2,
//
// where b parameterizes the nearby constant states Q_b (Q^{p+1} - Q = b) and
// a is the first-harmonic amplitude. The system is solved by Newton
// continuation in a with an analytic bordered Jacobian; kappa is an unknown
// and the amplitude constraint closes the system.

#include "fkdv/fourier.hpp"

#include <optional>
#include <vector>

namespace fkdv {

template <typename Scalar = double>
struct ModelParams {
  Scalar alpha = 2;  // dispersion exponent, > 1/2
  Scalar p = 1;      // nonlinearity power, >= 1

  void validate() const {
    if (!(alpha > Scalar(0.5))) throw std::domain_error("alpha must exceed 1/2");
    if (!(p >= Scalar(1))) throw std::domain_error("p must be at least 1");
  }
};

template <typename Scalar = double>
struct WaveSolution {
  ModelParams<Scalar> params;
  Scalar a = 0;
  Scalar b = 0;
  PeriodicFunction<Scalar> profile;
  Scalar k_alpha = 0;     // kappa = k^alpha along the family
  Scalar residual = 0;    // l2 coefficient norm of the profile equation residual
  int iterations = 0;     // Newton iterations of the final continuation step
};

template <typename Scalar = double>
struct SolveOptions {
  Index n_modes = 32;
  Scalar newton_tol = Scalar(1e-12);
  int max_iter = 50;
  Scalar step = Scalar(0.01);         // continuation step in a
  Scalar min_profile = Scalar(0.25);  // abort threshold on min_z P
  Scalar max_amplitude = Scalar(0.2);
  Scalar max_offset = Scalar(0.05);
};

// Constant state Q_b near 1: root of Q^{p+1} - Q = b.
template <typename Scalar>
Scalar equilibrium(const ModelParams<Scalar>& params, Scalar b) {
  params.validate();
  Scalar q(1);
  for (int it = 0; it < 60; ++it) {
    const Scalar g = std::pow(q, params.p + 1) - q - b;
    const Scalar dg = (params.p + 1) * std::pow(q, params.p) - Scalar(1);
    const Scalar dq = g / dg;
    q -= dq;
    if (!(q > Scalar(0.5) && q < Scalar(1.5)))
      throw SolverError("equilibrium continuation lost");
    if (std::abs(dq) < Scalar(1e-16)) break;
  }
  if (std::abs(std::pow(q, params.p + 1) - q - b) > Scalar(1e-14))
    throw SolverError("equilibrium continuation lost");
  return q;
}

namespace detail {

// Galerkin matrix of multiplication by the even function w on the cosine
// basis {1, cos z, ..., cos Nz}: S T R with T the Toeplitz matrix of w,
// R embedding cosine coefficients into exponential ones and S the converse.
template <typename Scalar>
MatrixX<Scalar> cosine_multiplication_matrix(const PeriodicFunction<Scalar>& w, Index n) {
  MatrixX<Scalar> m(n + 1, n + 1);
  // w real and even, so w_hat is real with w_hat(-n) = w_hat(n)
  for (Index r = 0; r <= n; ++r) {
    for (Index c = 0; c <= n; ++c) {
      const Scalar diff = std::real(w.coeff(r - c));
      const Scalar sum = std::real(w.coeff(r + c));
      m(r, c) = r == 0 ? diff : diff + sum;
    }
  }
  return m;
}

// residual of the profile equation in cosine coordinates
template <typename Scalar>
VectorX<Scalar> profile_residual(const ModelParams<Scalar>& prm, const VectorX<Scalar>& c,
                                 Scalar kappa, Scalar b, Index n) {
  auto f = PeriodicFunction<Scalar>::from_cosine(c, n);
  auto fp = nonlinear_power(f, prm.p + 1);
  VectorX<Scalar> r(n + 1);
  r[0] = -c[0] + fp.cosine_coeff(0) - b;
  for (Index k = 1; k <= n; ++k)
    r[k] = -kappa * std::pow(Scalar(k), prm.alpha) * c[k] - c[k] + fp.cosine_coeff(k);
  return r;
}

}  // namespace detail

// Newton-Galerkin continuation to the wave at (a, b). b is an outer parameter
// (the constant state is solved first); a is continued from 0, or from the
// optional initial guess, in steps of opts.step with a second-order predictor.
template <typename Scalar>
WaveSolution<Scalar> solve_wave(const ModelParams<Scalar>& params, Scalar a, Scalar b,
                                const SolveOptions<Scalar>& opts = {},
                                const std::optional<WaveSolution<Scalar>>& initial = {}) {
  params.validate();
  if (std::abs(a) > opts.max_amplitude + Scalar(1e-12))
    throw std::invalid_argument("amplitude out of supported range");
  if (std::abs(b) > opts.max_offset + Scalar(1e-12))
    throw std::invalid_argument("offset b out of supported range");
  const Index n = opts.n_modes;
  const Scalar q0 = equilibrium(params, b);
  const Scalar kappa0 = (params.p + 1) * std::pow(q0, params.p) - Scalar(1);
  const Scalar k1 = -params.p * (params.p + 1) *
                    (std::pow(Scalar(2), params.alpha) * (params.p + 3) - 2 * (params.p + 2)) /
                    (8 * (std::pow(Scalar(2), params.alpha) - 1));
  const Scalar v2_c0 = -(params.p + 1) / 4;
  const Scalar v2_c2 = (params.p + 1) / (4 * (std::pow(Scalar(2), params.alpha) - 1));

  VectorX<Scalar> c = VectorX<Scalar>::Zero(n + 1);
  c[0] = q0;
  Scalar kappa = kappa0;
  Scalar a_cur = 0;
  if (initial) {
    const auto& w0 = *initial;
    for (Index k = 0; k <= n; ++k) c[k] = w0.profile.cosine_coeff(k);
    kappa = w0.k_alpha;
    a_cur = w0.a;
  }

  WaveSolution<Scalar> sol;
  sol.params = params;
  sol.b = b;

  int last_iters = 0;
  while (true) {
    const Scalar remaining = a - a_cur;
    const bool final_step = std::abs(remaining) <= opts.step + Scalar(1e-15);
    const Scalar a_next =
        final_step ? a : a_cur + (remaining > 0 ? opts.step : -opts.step);

    if (a_next != a_cur) {
      // second-order predictor from the small-amplitude expansion
      const Scalar da2 = a_next * a_next - a_cur * a_cur;
      c[0] += da2 * v2_c0;
      c[1] = a_next;
      if (n >= 2) c[2] += da2 * v2_c2;
      kappa += da2 * k1;
    }

    if (a_next != 0) {
      // Newton with analytic bordered Jacobian
      bool converged = false;
      for (int it = 0; it < opts.max_iter; ++it) {
        auto f = PeriodicFunction<Scalar>::from_cosine(c, n);
        const Index grid = 4 * (2 * n + 1);
        if (f.grid_values(grid).minCoeff() <= opts.min_profile)
          throw SolverError("left existence regime");

        VectorX<Scalar> r = detail::profile_residual(params, c, kappa, b, n);
        Scalar rnorm2 = r[0] * r[0];
        for (Index k = 1; k <= n; ++k) rnorm2 += r[k] * r[k] / 2;
        const Scalar cons = c[1] - a_next;
        if (std::sqrt(rnorm2) + std::abs(cons) <= opts.newton_tol) {
          converged = true;
          last_iters = it;
          break;
        }

        auto w = nonlinear_power(f, params.p);
        MatrixX<Scalar> jf = (params.p + 1) * detail::cosine_multiplication_matrix(w, n);
        for (Index k = 0; k <= n; ++k) {
          jf(k, k) -= Scalar(1);
          if (k > 0) jf(k, k) -= kappa * std::pow(Scalar(k), params.alpha);
        }
        MatrixX<Scalar> j = MatrixX<Scalar>::Zero(n + 2, n + 2);
        j.topLeftCorner(n + 1, n + 1) = jf;
        for (Index k = 1; k <= n; ++k) j(k, n + 1) = -std::pow(Scalar(k), params.alpha) * c[k];
        j(n + 1, 1) = Scalar(1);

        VectorX<Scalar> rhs(n + 2);
        rhs.head(n + 1) = -r;
        rhs[n + 1] = -cons;
        VectorX<Scalar> delta = j.colPivHouseholderQr().solve(rhs);
        if (!delta.allFinite()) throw SolverError("continuation failed");
        c += delta.head(n + 1);
        kappa += delta[n + 1];
      }
      if (!converged) throw SolverError("continuation failed");
      c[1] = a_next;  // amplitude constraint holds exactly
    } else {
      last_iters = 0;
    }
    a_cur = a_next;
    if (final_step) break;
  }

  sol.a = a;
  sol.k_alpha = kappa;
  sol.profile = PeriodicFunction<Scalar>::from_cosine(c, n);
  sol.iterations = last_iters;
  {
    VectorX<Scalar> r = detail::profile_residual(params, c, kappa, b, n);
    Scalar rnorm2 = r[0] * r[0];
    for (Index k = 1; k <= n; ++k) rnorm2 += r[k] * r[k] / 2;
    sol.residual = std::sqrt(rnorm2);
  }
  if (sol.residual > Scalar(1e-10)) throw SolverError("continuation failed");
  return sol;
}

template <typename Scalar = double>
struct FamilyDerivatives {
  PeriodicFunction<Scalar> dP_da, dP_db, dP_dz;
  Scalar dk_da = 0, dk_db = 0;
};

// Parameter derivatives of the family map (a, b) -> (P, kappa), from the same
// bordered Jacobian as the solver (analytic, not finite differences). At
// a = 0 the bordered system is singular (bifurcation point) and the analytic
// limits along the branch are returned instead.
template <typename Scalar>
FamilyDerivatives<Scalar> family_derivatives(const WaveSolution<Scalar>& w) {
  const auto& prm = w.params;
  const Index n = w.profile.truncation();
  FamilyDerivatives<Scalar> d;
  d.dP_dz = derivative(w.profile);

  if (std::abs(w.a) < Scalar(1e-14)) {
    const Scalar q = w.profile.mean();
    const Scalar dq_db = Scalar(1) / ((prm.p + 1) * std::pow(q, prm.p) - Scalar(1));
    d.dP_da = PeriodicFunction<Scalar>::cosine(1, Scalar(1), n);
    d.dk_da = 0;
    d.dP_db = PeriodicFunction<Scalar>::constant(dq_db, n);
    d.dk_db = prm.p * (prm.p + 1) * std::pow(q, prm.p - 1) * dq_db;
    return d;
  }

  VectorX<Scalar> c(n + 1);
  for (Index k = 0; k <= n; ++k) c[k] = w.profile.cosine_coeff(k);

  auto wp = nonlinear_power(w.profile, prm.p);
  MatrixX<Scalar> jf = (prm.p + 1) * detail::cosine_multiplication_matrix(wp, n);
  for (Index k = 0; k <= n; ++k) {
    jf(k, k) -= Scalar(1);
    if (k > 0) jf(k, k) -= w.k_alpha * std::pow(Scalar(k), prm.alpha);
  }
  MatrixX<Scalar> j = MatrixX<Scalar>::Zero(n + 2, n + 2);
  j.topLeftCorner(n + 1, n + 1) = jf;
  for (Index k = 1; k <= n; ++k) j(k, n + 1) = -std::pow(Scalar(k), prm.alpha) * c[k];
  j(n + 1, 1) = Scalar(1);

  const auto qr = j.colPivHouseholderQr();

  VectorX<Scalar> rhs_a = VectorX<Scalar>::Zero(n + 2);
  rhs_a[n + 1] = Scalar(1);
  VectorX<Scalar> xa = qr.solve(rhs_a);
  VectorX<Scalar> rhs_b = VectorX<Scalar>::Zero(n + 2);
  rhs_b[0] = Scalar(1);
  VectorX<Scalar> xb = qr.solve(rhs_b);
  if (!xa.allFinite() || !xb.allFinite()) throw SolverError("derivative solve failed");

  d.dP_da = PeriodicFunction<Scalar>::from_cosine(VectorX<Scalar>(xa.head(n + 1)), n);
  d.dk_da = xa[n + 1];
  d.dP_db = PeriodicFunction<Scalar>::from_cosine(VectorX<Scalar>(xb.head(n + 1)), n);
  d.dk_db = xb[n + 1];
  return d;
}

template <typename Scalar = double>
struct ExpansionReport {
  std::vector<Scalar> amplitudes;
  std::vector<Scalar> profile_errors;  // || P - (1 + a cos z + a^2 v2) ||
  std::vector<Scalar> kappa_errors;    // | kappa - (p + k1 a^2) |
  Scalar profile_order = 0;            // fitted slope of log E vs log a
  Scalar kappa_order = 0;
};

// Convergence of the computed family at b = 0 to the second-order
// small-amplitude expansion; fitted orders should be >= 3 (profile)
// and >= 4 (wavenumber, even in a).
template <typename Scalar>
ExpansionReport<Scalar> validate_expansions(const ModelParams<Scalar>& params,
                                            const std::vector<Scalar>& amplitudes,
                                            const SolveOptions<Scalar>& opts = {}) {
  params.validate();
  ExpansionReport<Scalar> rep;
  rep.amplitudes = amplitudes;
  const Scalar two_alpha = std::pow(Scalar(2), params.alpha);
  const Scalar k1 = -params.p * (params.p + 1) * (two_alpha * (params.p + 3) - 2 * (params.p + 2)) /
                    (8 * (two_alpha - 1));
  for (Scalar a : amplitudes) {
    auto w = solve_wave(params, a, Scalar(0), opts);
    auto expansion = PeriodicFunction<Scalar>::constant(Scalar(1) - a * a * (params.p + 1) / 4,
                                                        opts.n_modes) +
                     PeriodicFunction<Scalar>::cosine(1, a, opts.n_modes) +
                     PeriodicFunction<Scalar>::cosine(
                         2, a * a * (params.p + 1) / (4 * (two_alpha - 1)), opts.n_modes);
    rep.profile_errors.push_back((w.profile - expansion).norm());
    rep.kappa_errors.push_back(std::abs(w.k_alpha - (params.p + k1 * a * a)));
  }
  auto fit_order = [&](const std::vector<Scalar>& err) {
    const size_t m = amplitudes.size();
    Scalar sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < m; ++i) {
      const Scalar x = std::log(amplitudes[i]);
      const Scalar y = std::log(std::max(err[i], Scalar(1e-300)));
      sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    return (Scalar(m) * sxy - sx * sy) / (Scalar(m) * sxx - sx * sx);
  };
  rep.profile_order = fit_order(rep.profile_errors);
  rep.kappa_order = fit_order(rep.kappa_errors);
  return rep;
}

}  // namespace fkdv
