#include "movingbox/core.hpp"

#include "movingbox/quadrature.hpp"

#include <doctest.h>

#include <cmath>

#include <numbers>

using namespace movingbox;

namespace {
constexpr double kPi = std::numbers::pi;

// Quadrature oracles for the closed-form matrix elements (independent of the
// implementation path: they integrate the defining integrands directly).
double position_element_quadrature(int k, int n, double L) {
  return integrate_adaptive(
      [&](double x) {
        return (2.0 / L) * x * std::sin(k * kPi * x / L) * std::sin(n * kPi * x / L);
      },
      0.0, L, 1e-12);
}

Complex momentum_element_quadrature(int k, int n, double L, double hbar = 1.0) {
  // <u_k| -i hbar d/dx |u_n>
  const double real_part = integrate_adaptive(
      [&](double x) {
        return (2.0 / L) * std::sin(k * kPi * x / L) * (n * kPi / L) *
               std::cos(n * kPi * x / L);
      },
      0.0, L, 1e-12);
  return Complex(0.0, -hbar * real_part);
}

}  // namespace

TEST_CASE("energy matches the closed form") {
  CHECK(energy(1, 1.0) == doctest::Approx(kPi * kPi / 2.0).epsilon(1e-14));
  CHECK(energy(1, 1.0) == doctest::Approx(4.934802200544679).epsilon(1e-12));
  // First gap: E_2 - E_1 = 3 pi^2 / 2 = 14.8044.
  CHECK(energy(2, 1.0) - energy(1, 1.0) ==
        doctest::Approx(14.804406601634037).epsilon(1e-12));
  CHECK(energy(3, 2.0) == doctest::Approx(9.0 * kPi * kPi / 8.0).epsilon(1e-14));
}

TEST_CASE("energy rejects bad arguments") {
  CHECK_THROWS_AS(energy(0, 1.0), DomainError);
  CHECK_THROWS_AS(energy(1, 0.0), DomainError);
  CHECK_THROWS_AS(energy(1, -2.0), DomainError);
}

TEST_CASE("energy times L^2 is independent of L") {
  const EigenData data = EigenData::build(12);
  for (int n = 1; n <= 12; ++n)
    for (double L : {0.3, 1.0, 2.5, 17.0})
      CHECK(energy(n, L) * L * L ==
            doctest::Approx(data.level_constant(n)).epsilon(1e-13));
}

TEST_CASE("level constants strictly increase") {
  const EigenData data = EigenData::build(16);
  for (int n = 2; n <= 16; ++n)
    CHECK(data.level_constant(n) > data.level_constant(n - 1));
}

TEST_CASE("eigenfunction values") {
  CHECK(eigenfunction(1, 1.0, 0.5) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(eigenfunction(2, 1.0, 0.5) == doctest::Approx(0.0));
  CHECK(eigenfunction(1, 2.0, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(eigenfunction(3, 1.0, 0.0) == 0.0);
  CHECK(eigenfunction(3, 1.0, 1.0) == 0.0);
  CHECK_THROWS_AS(eigenfunction(1, 1.0, -0.1), DomainError);
  CHECK_THROWS_AS(eigenfunction(1, 1.0, 1.1), DomainError);
}

TEST_CASE("eigenfunctions are orthonormal under quadrature") {
  const double L = 1.7;
  for (int k = 1; k <= 12; ++k) {
    for (int n = k; n <= 12; ++n) {
      const double overlap = integrate_adaptive(
          [&](double x) { return eigenfunction(k, L, x) * eigenfunction(n, L, x); }, 0.0, L,
          1e-12);
      CHECK(std::abs(overlap - (k == n ? 1.0 : 0.0)) < 1e-10);
    }
  }
}

TEST_CASE("position matrix element: diagonal and parity selection") {
  CHECK(position_matrix_element(1, 1, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(position_matrix_element(1, 3, 1.0) == 0.0);
  CHECK(position_matrix_element(2, 4, 3.0) == 0.0);
}

TEST_CASE("position matrix element pinned against the quadrature oracle") {
  // Oracle value for (k=1, n=2, L=1), frozen from two independent runs of the
  // adaptive quadrature (closed form -16/(9 pi^2)).
  const double pinned = -0.18012654869748937;
  CHECK(position_element_quadrature(1, 2, 1.0) == doctest::Approx(pinned).epsilon(1e-12));
  CHECK(position_matrix_element(1, 2, 1.0) == doctest::Approx(pinned).epsilon(1e-12));
}

TEST_CASE("position matrix agrees with quadrature for all k,n <= 12") {
  const double L = 2.3;
  for (int k = 1; k <= 12; ++k)
    for (int n = k; n <= 12; ++n)
      CHECK(std::abs(position_matrix_element(k, n, L) - position_element_quadrature(k, n, L)) <
            1e-10);
}

TEST_CASE("position matrix is symmetric") {
  for (int k = 1; k <= 10; ++k)
    for (int n = 1; n <= 10; ++n)
      CHECK(position_matrix_element(k, n, 1.3) ==
            doctest::Approx(position_matrix_element(n, k, 1.3)).epsilon(1e-15));
}

TEST_CASE("momentum matrix element: selection rule and Hermiticity") {
  CHECK(momentum_matrix_element(1, 1, 1.0) == Complex(0.0, 0.0));
  CHECK(momentum_matrix_element(2, 4, 1.0) == Complex(0.0, 0.0));
  const Complex p12 = momentum_matrix_element(1, 2, 1.0);
  const Complex p21 = momentum_matrix_element(2, 1, 1.0);
  CHECK(p21.real() == doctest::Approx(p12.real()).epsilon(1e-15));
  CHECK(p21.imag() == doctest::Approx(-p12.imag()).epsilon(1e-15));
}

TEST_CASE("momentum matrix element pinned against the quadrature oracle") {
  // (k=1, n=2, L=1, hbar=1): oracle gives +i 8/3.
  const double pinned_imag = 2.6666666666666667;
  const Complex oracle = momentum_element_quadrature(1, 2, 1.0);
  CHECK(oracle.real() == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(oracle.imag() == doctest::Approx(pinned_imag).epsilon(1e-12));
  const Complex impl = momentum_matrix_element(1, 2, 1.0);
  CHECK(impl.imag() == doctest::Approx(pinned_imag).epsilon(1e-12));
  CHECK(impl.real() == 0.0);
}

TEST_CASE("momentum matrix agrees with quadrature for all k,n <= 12") {
  const double L = 0.8;
  for (int k = 1; k <= 12; ++k) {
    for (int n = 1; n <= 12; ++n) {
      const Complex impl = momentum_matrix_element(k, n, L);
      const Complex oracle = momentum_element_quadrature(k, n, L);
      CHECK(std::abs(impl - oracle) < 1e-10);
    }
  }
}

TEST_CASE("momentum matrix is Hermitian as a whole") {
  const MatC p = momentum_matrix(10, 1.1);
  CHECK((p - p.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("constants must be positive") {
  CHECK_THROWS_AS(energy(1, 1.0, PhysicalConstants{0.0, 1.0}), DomainError);
  CHECK_THROWS_AS(energy(1, 1.0, PhysicalConstants{1.0, -1.0}), DomainError);
  CHECK_THROWS_AS(EigenData::build(1), DomainError);
}
