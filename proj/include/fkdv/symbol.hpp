#pragma once

// Expansion of the Bloch symbol (k + xi)|k + xi|^alpha in powers of xi.
// For integer modes k != 0 and |xi| < |k| the symbol of
// e^{-i xi z} (d/dz) Lambda^alpha e^{i xi z} at mode k equals
//
//   i [ k|k|^alpha
//       + sum_{m odd}  C(alpha+1, m) |k|^{alpha-(m-1)} xi^m
//       + sum_{m even} C(alpha+1, m) k |k|^{alpha-(m-1)-1} ... ] ,
//
// uniformly: term m >= 1 has multiplier C(alpha+1, m) sgn(k)^{m-1} |k|^{alpha-(m-1)}.
// The k = 0 mode does not fit the expansion; it contributes the separate
// exact term i xi |xi|^alpha f_hat(0), flagged on the returned structure.

#include "fkdv/fourier.hpp"

namespace fkdv {

// generalized binomial coefficient C(m, n) = m (m-1) ... (m-n+1) / n!
template <typename Scalar>
Scalar generalized_binomial(Scalar m, int n) {
  Scalar num(1), den(1);
  for (int j = 0; j < n; ++j) {
    num *= m - Scalar(j);
    den *= Scalar(j + 1);
  }
  return num / den;
}

template <typename Scalar = double>
struct SymbolExpansion {
  using Complex = std::complex<Scalar>;

  Scalar alpha = 2;
  Scalar xi = 0;
  int max_order = 0;
  // binom[m] = C(alpha+1, m) for m = 0..max_order
  std::vector<Scalar> binom;
  // the mode k = 0 is excluded from the expansion; its exact symbol is
  // i xi |xi|^alpha, stored here
  bool zero_mode_separate = true;
  Complex zero_mode_symbol{0, 0};

  // real multiplier of the order-m term at integer mode k != 0 (xi^m excluded)
  Scalar multiplier(int m, Index k) const {
    const Scalar ak = std::abs(Scalar(k));
    if (m == 0) return Scalar(k) * std::pow(ak, alpha);
    const Scalar mag = std::pow(ak, alpha - Scalar(m - 1));
    const Scalar sgn = (m % 2 == 0 && k < 0) ? Scalar(-1) : Scalar(1);
    return binom[static_cast<size_t>(m)] * sgn * mag;
  }

  // multiplier sequence of the order-m term over modes k in [-n_modes, n_modes]
  VectorX<Scalar> multipliers(int m, Index n_modes) const {
    VectorX<Scalar> v = VectorX<Scalar>::Zero(2 * n_modes + 1);
    for (Index k = -n_modes; k <= n_modes; ++k)
      if (k != 0) v[n_modes + k] = multiplier(m, k);
    return v;
  }

  // i * sum_{m <= up_to} multiplier(m, k) xi^m
  Complex partial_sum(Index k, int up_to) const {
    Scalar acc(0), xp(1);
    for (int m = 0; m <= up_to; ++m) {
      acc += multiplier(m, k) * xp;
      xp *= xi;
    }
    return Complex(0, acc);
  }

  Complex exact_symbol(Index k) const {
    const Scalar s = Scalar(k) + xi;
    return Complex(0, s * detail::abs_pow(s, alpha));
  }
};

template <typename Scalar>
SymbolExpansion<Scalar> bloch_symbol_terms(Scalar alpha, Scalar xi, int max_order) {
  if (alpha <= Scalar(0.5)) throw std::domain_error("alpha must exceed 1/2");
  if (std::abs(xi) > Scalar(0.5)) throw std::invalid_argument("|xi| must not exceed 1/2");
  if (max_order < 1) throw std::invalid_argument("max_order must be at least 1");
  SymbolExpansion<Scalar> e;
  e.alpha = alpha;
  e.xi = xi;
  e.max_order = max_order;
  e.binom.resize(static_cast<size_t>(max_order) + 1);
  for (int m = 0; m <= max_order; ++m)
    e.binom[static_cast<size_t>(m)] = generalized_binomial(alpha + Scalar(1), m);
  e.zero_mode_symbol = std::complex<Scalar>(0, xi * detail::abs_pow(xi, alpha));
  return e;
}

}  // namespace fkdv
