#pragma once

// Truncated Fourier representation of real 2*pi-periodic functions and the
// spectral operations built on it: Calderon multipliers |k|^s, dealiased
// pointwise nonlinearities, and multiplication (convolution) matrices.
//
// Coefficients are stored for modes n in [-N, N] with the reality constraint
// u_hat(-n) = conj(u_hat(n)). Operations are pure: they return new values and
// never mutate their inputs.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace fkdv {

template <typename Scalar>
using VectorX = Eigen::Vector<Scalar, Eigen::Dynamic>;
template <typename Scalar>
using VectorXc = Eigen::Vector<std::complex<Scalar>, Eigen::Dynamic>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using MatrixXc = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

// Raised when an iteration (Newton continuation, QR, subspace refinement)
// cannot deliver its contract.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

template <typename Scalar = double>
class PeriodicFunction {
 public:
  using Complex = std::complex<Scalar>;
  using Coeffs = VectorXc<Scalar>;

  PeriodicFunction() : trunc_(0), coeffs_(Coeffs::Zero(1)) {}

  // coeffs has size 2N+1, entry i holding mode i - N. The reality constraint
  // is enforced by averaging; a defect beyond `tol` (relative) is an error.
  explicit PeriodicFunction(Coeffs coeffs, Scalar tol = Scalar(1e-10))
      : trunc_((coeffs.size() - 1) / 2), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() % 2 == 0 || coeffs_.size() < 1)
      throw std::invalid_argument("coefficient vector must have odd size 2N+1");
    const Scalar scale = std::max(Scalar(1), coeffs_.template lpNorm<Eigen::Infinity>());
    Scalar defect = 0;
    for (Index n = 1; n <= trunc_; ++n) {
      const Complex d = coeffs_[trunc_ + n] - std::conj(coeffs_[trunc_ - n]);
      defect = std::max(defect, std::abs(d));
    }
    defect = std::max(defect, std::abs(std::imag(coeffs_[trunc_])));
    if (defect > tol * scale)
      throw std::invalid_argument("coefficients violate the reality constraint");
    symmetrize();
  }

  static PeriodicFunction zero(Index n_modes) {
    return raw(Coeffs::Zero(2 * n_modes + 1));
  }
  static PeriodicFunction constant(Scalar c, Index n_modes) {
    Coeffs v = Coeffs::Zero(2 * n_modes + 1);
    v[n_modes] = c;
    return raw(std::move(v));
  }
  // amp * cos(k z)
  static PeriodicFunction cosine(Index k, Scalar amp, Index n_modes) {
    Coeffs v = Coeffs::Zero(2 * n_modes + 1);
    if (k == 0) {
      v[n_modes] = amp;
    } else {
      v[n_modes + k] = Scalar(0.5) * amp;
      v[n_modes - k] = Scalar(0.5) * amp;
    }
    return raw(std::move(v));
  }
  // amp * sin(k z)
  static PeriodicFunction sine(Index k, Scalar amp, Index n_modes) {
    Coeffs v = Coeffs::Zero(2 * n_modes + 1);
    if (k != 0) {
      const Complex half_i(Scalar(0), Scalar(0.5) * amp);
      v[n_modes + k] = -half_i;
      v[n_modes - k] = half_i;
    }
    return raw(std::move(v));
  }
  // c[0] + sum_{k>=1} c[k] cos(k z)
  static PeriodicFunction from_cosine(const VectorX<Scalar>& c, Index n_modes) {
    Coeffs v = Coeffs::Zero(2 * n_modes + 1);
    const Index kmax = std::min<Index>(c.size() - 1, n_modes);
    v[n_modes] = c[0];
    for (Index k = 1; k <= kmax; ++k) {
      v[n_modes + k] = Scalar(0.5) * c[k];
      v[n_modes - k] = Scalar(0.5) * c[k];
    }
    return raw(std::move(v));
  }

  Index truncation() const { return trunc_; }
  const Coeffs& coefficients() const { return coeffs_; }

  Complex coeff(Index n) const {
    if (std::abs(n) > trunc_) return Complex(0);
    return coeffs_[trunc_ + n];
  }
  // coefficient of cos(n z): u_hat(n) + u_hat(-n) for n >= 1, u_hat(0) for n = 0
  Scalar cosine_coeff(Index n) const {
    if (n == 0) return std::real(coeff(0));
    return std::real(coeff(n) + coeff(-n));
  }
  Scalar mean() const { return std::real(coeffs_[trunc_]); }

  Scalar evaluate(Scalar z) const {
    // real form avoids complex exponential round-off in the mean
    Scalar v = std::real(coeffs_[trunc_]);
    for (Index n = 1; n <= trunc_; ++n) {
      const Complex c = coeffs_[trunc_ + n];
      v += Scalar(2) * (std::real(c) * std::cos(n * z) - std::imag(c) * std::sin(n * z));
    }
    return v;
  }

  // values on the uniform grid z_j = 2*pi*j/m, j = 0..m-1
  VectorX<Scalar> grid_values(Index m) const {
    VectorX<Scalar> v(m);
    const Scalar two_pi = Scalar(2) * pi();
    for (Index j = 0; j < m; ++j) v[j] = evaluate(two_pi * Scalar(j) / Scalar(m));
    return v;
  }

  // l2 norm of the coefficient sequence
  Scalar norm() const { return coeffs_.norm(); }

  PeriodicFunction truncated(Index n_modes) const {
    Coeffs v = Coeffs::Zero(2 * n_modes + 1);
    const Index kmax = std::min(n_modes, trunc_);
    for (Index n = -kmax; n <= kmax; ++n) v[n_modes + n] = coeff(n);
    return raw(std::move(v));
  }

  static Scalar pi() { return Scalar(3.14159265358979323846264338327950288L); }

  // trusted constructor for operations that preserve the reality constraint
  static PeriodicFunction raw(Coeffs coeffs) {
    PeriodicFunction f;
    f.trunc_ = (coeffs.size() - 1) / 2;
    f.coeffs_ = std::move(coeffs);
    return f;
  }

 private:
  void symmetrize() {
    coeffs_[trunc_] = Complex(std::real(coeffs_[trunc_]), Scalar(0));
    for (Index n = 1; n <= trunc_; ++n) {
      const Complex avg = Scalar(0.5) * (coeffs_[trunc_ + n] + std::conj(coeffs_[trunc_ - n]));
      coeffs_[trunc_ + n] = avg;
      coeffs_[trunc_ - n] = std::conj(avg);
    }
  }

  Index trunc_;
  Coeffs coeffs_;
};

namespace detail {
template <typename Scalar>
Scalar abs_pow(Scalar x, Scalar s) {
  if (x == Scalar(0)) return s == Scalar(0) ? Scalar(1) : Scalar(0);
  return std::pow(std::abs(x), s);
}
}  // namespace detail

// Lambda^s: multiplies mode n by |n|^s and annihilates the mean (s > 0).
// s = 0 is the identity. Negative s is rejected; see fractional_inverse.
template <typename Scalar>
PeriodicFunction<Scalar> fractional_multiplier(const PeriodicFunction<Scalar>& f, Scalar s) {
  if (s < Scalar(0)) throw std::invalid_argument("fractional multiplier requires s >= 0");
  if (s == Scalar(0)) return f;
  const Index N = f.truncation();
  VectorXc<Scalar> v = f.coefficients();
  v[N] = std::complex<Scalar>(0);
  for (Index n = 1; n <= N; ++n) {
    const Scalar m = std::pow(Scalar(n), s);
    v[N + n] *= m;
    v[N - n] *= m;
  }
  return PeriodicFunction<Scalar>::raw(std::move(v));
}

// Lambda^{-s} on the mean-zero subspace: divides mode n != 0 by |n|^s.
template <typename Scalar>
PeriodicFunction<Scalar> fractional_inverse(const PeriodicFunction<Scalar>& f, Scalar s) {
  if (s < Scalar(0)) throw std::invalid_argument("fractional inverse requires s >= 0");
  const Scalar scale = std::max(Scalar(1), f.norm());
  if (std::abs(f.coeff(0)) > Scalar(1e-13) * scale)
    throw std::domain_error("Lambda^{-s} undefined off the mean-zero subspace");
  const Index N = f.truncation();
  VectorXc<Scalar> v = f.coefficients();
  v[N] = std::complex<Scalar>(0);
  for (Index n = 1; n <= N; ++n) {
    const Scalar m = std::pow(Scalar(n), s);
    v[N + n] /= m;
    v[N - n] /= m;
  }
  return PeriodicFunction<Scalar>::raw(std::move(v));
}

template <typename Scalar>
PeriodicFunction<Scalar> project_mean_zero(const PeriodicFunction<Scalar>& f) {
  VectorXc<Scalar> v = f.coefficients();
  v[f.truncation()] = std::complex<Scalar>(0);
  return PeriodicFunction<Scalar>::raw(std::move(v));
}

// d/dz: mode n -> i n u_hat(n)
template <typename Scalar>
PeriodicFunction<Scalar> derivative(const PeriodicFunction<Scalar>& f) {
  const Index N = f.truncation();
  VectorXc<Scalar> v = f.coefficients();
  for (Index n = -N; n <= N; ++n) v[N + n] *= std::complex<Scalar>(0, Scalar(n));
  return PeriodicFunction<Scalar>::raw(std::move(v));
}

// Periodic Hilbert transform: mode n -> -i sgn(n) u_hat(n). Lambda = H d/dz.
template <typename Scalar>
PeriodicFunction<Scalar> hilbert_transform(const PeriodicFunction<Scalar>& f) {
  const Index N = f.truncation();
  VectorXc<Scalar> v = f.coefficients();
  v[N] = std::complex<Scalar>(0);
  for (Index n = 1; n <= N; ++n) {
    v[N + n] *= std::complex<Scalar>(0, Scalar(-1));
    v[N - n] *= std::complex<Scalar>(0, Scalar(1));
  }
  return PeriodicFunction<Scalar>::raw(std::move(v));
}

// f^q via collocation on a zero-padded grid. The grid has
// ceil(q+1) * (2*max(N_in, N_out) + 1) points, which dealiases integer powers
// exactly. Non-integer q requires a strictly positive profile (guard 1e-10)
// and evaluates exp(q log f). Output truncation defaults to the input's.
template <typename Scalar>
PeriodicFunction<Scalar> nonlinear_power(const PeriodicFunction<Scalar>& f, Scalar q,
                                         Index out_trunc = -1) {
  if (q < Scalar(1)) throw std::invalid_argument("nonlinear power requires q >= 1");
  const Index n_in = f.truncation();
  const Index n_out = out_trunc < 0 ? n_in : out_trunc;
  const Index n_big = std::max(n_in, n_out);
  const Index m = static_cast<Index>(std::ceil(static_cast<double>(q) + 1.0)) * (2 * n_big + 1);

  VectorX<Scalar> vals = f.grid_values(m);

  const Scalar qr = std::round(q);
  const bool integer_q = std::abs(q - qr) <= Scalar(1e-12);
  if (integer_q) {
    const int qi = static_cast<int>(qr);
    for (Index j = 0; j < m; ++j) vals[j] = std::pow(vals[j], qi);
  } else {
    if (vals.minCoeff() <= Scalar(1e-10))
      throw std::domain_error("fractional power of non-positive profile");
    for (Index j = 0; j < m; ++j) vals[j] = std::exp(q * std::log(vals[j]));
  }

  // direct DFT of the real samples; sizes here are small enough that the
  // O(m N) transform is negligible next to the eigensolves downstream
  VectorXc<Scalar> out = VectorXc<Scalar>::Zero(2 * n_out + 1);
  const Scalar two_pi = Scalar(2) * PeriodicFunction<Scalar>::pi();
  for (Index n = 0; n <= n_out; ++n) {
    std::complex<Scalar> acc(0);
    for (Index j = 0; j < m; ++j) {
      const Scalar phase = -two_pi * Scalar(n) * Scalar(j) / Scalar(m);
      acc += vals[j] * std::complex<Scalar>(std::cos(phase), std::sin(phase));
    }
    acc /= Scalar(m);
    out[n_out + n] = acc;
    out[n_out - n] = std::conj(acc);
  }
  out[n_out] = std::complex<Scalar>(std::real(out[n_out]), Scalar(0));
  return PeriodicFunction<Scalar>::raw(std::move(out));
}

// Toeplitz matrix of multiplication by f on modes [-N, N]:
// entry (row n, col m) = f_hat(n - m). Coefficients of f beyond its
// truncation are zero, so pass f with truncation >= 2N for an exact product.
template <typename Scalar>
MatrixXc<Scalar> convolution_matrix(const PeriodicFunction<Scalar>& f, Index n_modes) {
  const Index size = 2 * n_modes + 1;
  MatrixXc<Scalar> t(size, size);
  for (Index r = 0; r < size; ++r)
    for (Index c = 0; c < size; ++c) t(r, c) = f.coeff((r - n_modes) - (c - n_modes));
  return t;
}

// integral over [0, 2*pi] of conj(f) g
template <typename Scalar>
std::complex<Scalar> inner_product(const PeriodicFunction<Scalar>& f,
                                   const PeriodicFunction<Scalar>& g) {
  const Index N = std::max(f.truncation(), g.truncation());
  std::complex<Scalar> acc(0);
  for (Index n = -N; n <= N; ++n) acc += std::conj(f.coeff(n)) * g.coeff(n);
  return Scalar(2) * PeriodicFunction<Scalar>::pi() * acc;
}

template <typename Scalar>
PeriodicFunction<Scalar> operator+(const PeriodicFunction<Scalar>& a,
                                   const PeriodicFunction<Scalar>& b) {
  const Index N = std::max(a.truncation(), b.truncation());
  VectorXc<Scalar> v(2 * N + 1);
  for (Index n = -N; n <= N; ++n) v[N + n] = a.coeff(n) + b.coeff(n);
  return PeriodicFunction<Scalar>::raw(std::move(v));
}

template <typename Scalar>
PeriodicFunction<Scalar> operator-(const PeriodicFunction<Scalar>& a,
                                   const PeriodicFunction<Scalar>& b) {
  const Index N = std::max(a.truncation(), b.truncation());
  VectorXc<Scalar> v(2 * N + 1);
  for (Index n = -N; n <= N; ++n) v[N + n] = a.coeff(n) - b.coeff(n);
  return PeriodicFunction<Scalar>::raw(std::move(v));
}

template <typename Scalar>
PeriodicFunction<Scalar> operator*(Scalar s, const PeriodicFunction<Scalar>& f) {
  VectorXc<Scalar> v = f.coefficients();
  v *= s;
  return PeriodicFunction<Scalar>::raw(std::move(v));
}

}  // namespace fkdv
