#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fkdv/fourier.hpp"
#include "fkdv/symbol.hpp"

#include <complex>
#include <random>

using namespace fkdv;
using Complex = std::complex<double>;

namespace {
constexpr double kTolExact = 1e-14;
constexpr double kTolRoundoff = 1e-12;
const double kPi = PeriodicFunction<double>::pi();

PeriodicFunction<double> random_function(std::mt19937& rng, Index n_modes) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  VectorXc<double> v(2 * n_modes + 1);
  v[n_modes] = Complex(dist(rng), 0.0);
  for (Index n = 1; n <= n_modes; ++n) {
    const Complex c(dist(rng), dist(rng));
    v[n_modes + n] = c;
    v[n_modes - n] = std::conj(c);
  }
  return PeriodicFunction<double>::raw(std::move(v));
}
}  // namespace

TEST_CASE("constructors and evaluation") {
  const auto f = PeriodicFunction<double>::cosine(3, 2.0, 8);
  CHECK(f.truncation() == 8);
  CHECK(f.evaluate(0.37) == doctest::Approx(2.0 * std::cos(3 * 0.37)).epsilon(kTolExact));
  CHECK(f.cosine_coeff(3) == doctest::Approx(2.0).epsilon(kTolExact));
  CHECK(std::abs(f.coeff(3) - Complex(1.0, 0.0)) < kTolExact);
  CHECK(std::abs(f.coeff(12)) == 0.0);  // beyond truncation
  CHECK(f.mean() == 0.0);

  const auto g = PeriodicFunction<double>::sine(2, 0.5, 8);
  CHECK(g.evaluate(1.1) == doctest::Approx(0.5 * std::sin(2 * 1.1)).epsilon(kTolExact));

  const auto c = PeriodicFunction<double>::constant(4.0, 4);
  CHECK(c.mean() == 4.0);
  CHECK(c.evaluate(2.0) == 4.0);

  VectorX<double> cos_coeffs(3);
  cos_coeffs << 1.0, 0.25, 0.625;
  const auto h = PeriodicFunction<double>::from_cosine(cos_coeffs, 8);
  CHECK(h.cosine_coeff(0) == 1.0);
  CHECK(h.cosine_coeff(2) == doctest::Approx(0.625).epsilon(kTolExact));
  CHECK(h.evaluate(0.9) ==
        doctest::Approx(1.0 + 0.25 * std::cos(0.9) + 0.625 * std::cos(1.8)).epsilon(kTolExact));
}

TEST_CASE("reality constraint is enforced") {
  VectorXc<double> bad = VectorXc<double>::Zero(5);
  bad[4] = Complex(1.0, 0.0);  // mode +2 with no conjugate partner
  CHECK_THROWS_AS(PeriodicFunction<double>{bad}, std::invalid_argument);

  VectorXc<double> even = VectorXc<double>::Zero(4);
  CHECK_THROWS_AS(PeriodicFunction<double>{even}, std::invalid_argument);

  VectorXc<double> good = VectorXc<double>::Zero(5);
  good[3] = Complex(0.5, -0.25);
  good[1] = Complex(0.5, 0.25);
  CHECK_NOTHROW(PeriodicFunction<double>{good});
}

TEST_CASE("fractional multiplier scales mode n by |n|^s") {
  const auto f = PeriodicFunction<double>::constant(3.0, 6) +
                 PeriodicFunction<double>::cosine(2, 1.5, 6);
  const double alpha = 1.3;
  const auto lf = fractional_multiplier(f, alpha);
  CHECK(lf.mean() == 0.0);  // mean annihilated
  CHECK(lf.cosine_coeff(2) ==
        doctest::Approx(1.5 * std::pow(2.0, alpha)).epsilon(kTolExact));

  const auto id = fractional_multiplier(f, 0.0);  // s = 0 is the identity
  CHECK((id.coefficients() - f.coefficients()).norm() == 0.0);

  CHECK_THROWS_AS(fractional_multiplier(f, -1.0), std::invalid_argument);
}

TEST_CASE("fractional inverse undoes the multiplier on mean-zero input") {
  std::mt19937 rng(71);
  auto f = project_mean_zero(random_function(rng, 10));
  const auto back = fractional_inverse(fractional_multiplier(f, 0.7), 0.7);
  CHECK((back.coefficients() - f.coefficients()).norm() < kTolRoundoff);

  const auto with_mean = PeriodicFunction<double>::constant(1.0, 4);
  CHECK_THROWS_AS(fractional_inverse(with_mean, 0.5), std::domain_error);
}

TEST_CASE("hilbert transform and derivative") {
  const auto f = PeriodicFunction<double>::cosine(1, 1.0, 4);
  const auto hf = hilbert_transform(f);
  const auto s = PeriodicFunction<double>::sine(1, 1.0, 4);
  CHECK((hf.coefficients() - s.coefficients()).norm() < kTolExact);

  // H^2 = -Id on mean-zero functions; Lambda = H d/dz
  std::mt19937 rng(72);
  const auto g = project_mean_zero(random_function(rng, 8));
  const auto hhg = hilbert_transform(hilbert_transform(g));
  CHECK((hhg.coefficients() + g.coefficients()).norm() < kTolExact);
  const auto lambda_g = fractional_multiplier(g, 1.0);
  const auto hdg = hilbert_transform(derivative(g));
  CHECK((lambda_g.coefficients() - hdg.coefficients()).norm() < kTolRoundoff);

  const auto df = derivative(f);
  const auto ms = PeriodicFunction<double>::sine(1, -1.0, 4);
  CHECK((df.coefficients() - ms.coefficients()).norm() < kTolExact);
}

TEST_CASE("integer powers are dealiased exactly") {
  // (1 + 0.1 cos z)^2 = 1.005 + 0.2 cos z + 0.005 cos 2z
  const auto f = PeriodicFunction<double>::constant(1.0, 8) +
                 PeriodicFunction<double>::cosine(1, 0.1, 8);
  const auto sq = nonlinear_power(f, 2.0);
  CHECK(sq.cosine_coeff(0) == doctest::Approx(1.005).epsilon(kTolExact));
  CHECK(sq.cosine_coeff(1) == doctest::Approx(0.2).epsilon(kTolExact));
  CHECK(sq.cosine_coeff(2) == doctest::Approx(0.005).epsilon(kTolExact));
  CHECK(std::abs(sq.coeff(3)) < kTolExact);
}

TEST_CASE("fractional powers match pointwise values") {
  const auto f = PeriodicFunction<double>::constant(1.0, 8) +
                 PeriodicFunction<double>::cosine(1, 0.1, 8);
  const auto g = nonlinear_power(f, 1.5, 24);
  for (int j = 0; j < 7; ++j) {
    const double z = 2.0 * kPi * j / 7.0;
    CHECK(g.evaluate(z) == doctest::Approx(std::pow(f.evaluate(z), 1.5)).epsilon(1e-12));
  }

  const auto touching_zero = PeriodicFunction<double>::constant(1.0, 8) +
                             PeriodicFunction<double>::cosine(1, 1.2, 8);
  CHECK_THROWS_AS(nonlinear_power(touching_zero, 1.5), std::domain_error);
  CHECK_THROWS_AS(nonlinear_power(f, 0.5), std::invalid_argument);
}

TEST_CASE("convolution matrix multiplies spectra") {
  std::mt19937 rng(73);
  const auto f = random_function(rng, 6);
  const auto g = random_function(rng, 6);
  const auto m = convolution_matrix(f, 6);
  const VectorXc<double> prod = m * g.coefficients();
  for (Index n = -6; n <= 6; ++n) {
    Complex direct(0.0);
    for (Index k = -6; k <= 6; ++k) direct += f.coeff(n - k) * g.coeff(k);
    CHECK(std::abs(prod[6 + n] - direct) < kTolRoundoff);
  }
}

TEST_CASE("inner product is the L2 pairing on [0, 2 pi]") {
  const auto c = PeriodicFunction<double>::cosine(1, 1.0, 4);
  const auto s = PeriodicFunction<double>::sine(1, 1.0, 4);
  const auto one = PeriodicFunction<double>::constant(1.0, 4);
  CHECK(std::abs(inner_product(c, c) - Complex(kPi, 0.0)) < kTolExact);
  CHECK(std::abs(inner_product(c, s)) < kTolExact);
  CHECK(std::abs(inner_product(one, one) - Complex(2.0 * kPi, 0.0)) < kTolExact);

  // agreement with trapezoidal quadrature (exact for trig polynomials)
  std::mt19937 rng(74);
  const auto f = random_function(rng, 5);
  const auto g = random_function(rng, 5);
  const Index m = 64;
  Complex quad(0.0);
  for (Index j = 0; j < m; ++j) {
    const double z = 2.0 * kPi * j / m;
    quad += f.evaluate(z) * g.evaluate(z);
  }
  quad *= 2.0 * kPi / m;
  CHECK(std::abs(inner_product(f, g) - quad) < 1e-11);
}

TEST_CASE("generalized binomial coefficients") {
  CHECK(generalized_binomial(3.0, 2) == doctest::Approx(3.0).epsilon(kTolExact));
  CHECK(generalized_binomial(2.5, 0) == 1.0);
  CHECK(generalized_binomial(2.0, 3) == 0.0);  // integer upper index terminates
  CHECK(generalized_binomial(1.5, 2) == doctest::Approx(0.375).epsilon(kTolExact));
}

TEST_CASE("symbol expansion converges to the exact Bloch symbol") {
  // alpha = 1: C(2, m) vanishes for m >= 3, so the expansion terminates
  const auto e1 = bloch_symbol_terms(1.0, 0.25, 6);
  CHECK(std::imag(e1.exact_symbol(2)) == doctest::Approx(5.0625).epsilon(kTolExact));
  CHECK(std::abs(e1.partial_sum(2, 2) - e1.exact_symbol(2)) < kTolExact);
  CHECK(std::abs(e1.partial_sum(-3, 2) - e1.exact_symbol(-3)) < kTolRoundoff);

  // fractional alpha: truncation error decays with the order
  const auto e = bloch_symbol_terms(1.6, 0.2, 8);
  const double err2 = std::abs(e.partial_sum(3, 2) - e.exact_symbol(3));
  const double err4 = std::abs(e.partial_sum(3, 4) - e.exact_symbol(3));
  const double err8 = std::abs(e.partial_sum(3, 8) - e.exact_symbol(3));
  CHECK(err4 < err2);
  CHECK(err8 < err4);
  CHECK(err8 < 1e-8);

  // the zero mode is excluded and carried exactly
  CHECK(e.zero_mode_separate);
  CHECK(std::imag(e.zero_mode_symbol) ==
        doctest::Approx(0.2 * std::pow(0.2, 1.6)).epsilon(kTolExact));

  CHECK_THROWS_AS(bloch_symbol_terms(0.4, 0.1, 4), std::domain_error);
  CHECK_THROWS_AS(bloch_symbol_terms(2.0, 0.7, 4), std::invalid_argument);
}
