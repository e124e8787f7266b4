#include "movingbox/core.hpp"

#include <cmath>

#include <numbers>

namespace movingbox {

namespace {
constexpr Real kPi = std::numbers::pi;

void check_level(int n) {
  if (n < 1) throw DomainError("level index must be >= 1, got " + std::to_string(n));
}

void check_length(Real L) {
  if (!(L > 0.0)) throw DomainError("box length must be > 0, got " + std::to_string(L));
}
}  // namespace

EigenData EigenData::build(int n_basis, const PhysicalConstants& pc) {
  pc.validate();
  BoxSpec{n_basis, 1.0}.validate();
  EigenData data;
  data.constants = pc;
  data.level_constants.resize(n_basis);
  const Real c = pc.hbar * pc.hbar * kPi * kPi / (2.0 * pc.mass);
  for (int n = 1; n <= n_basis; ++n) data.level_constants[n - 1] = c * Real(n) * Real(n);
  return data;
}

Real energy(int n, Real L, const PhysicalConstants& pc) {
  pc.validate();
  check_level(n);
  check_length(L);
  const Real npi = Real(n) * kPi;
  return pc.hbar * pc.hbar * npi * npi / (2.0 * pc.mass * L * L);
}

Real eigenfunction(int n, Real L, Real x) {
  check_level(n);
  check_length(L);
  if (x < 0.0 || x > L)
    throw DomainError("eigenfunction: x outside [0, L]");
  if (x == 0.0 || x == L) return 0.0;
  return std::sqrt(2.0 / L) * std::sin(Real(n) * kPi * x / L);
}

Real position_matrix_element(int k, int n, Real L) {
  check_level(k);
  check_level(n);
  check_length(L);
  if (k == n) return 0.5 * L;
  if ((k + n) % 2 == 0) return 0.0;
  const Real diff = Real(k) * Real(k) - Real(n) * Real(n);
  return -8.0 * L * Real(k) * Real(n) / (kPi * kPi * diff * diff);
}

Complex momentum_matrix_element(int k, int n, Real L, const PhysicalConstants& pc) {
  pc.validate();
  check_level(k);
  check_level(n);
  check_length(L);
  if ((k + n) % 2 == 0) return {0.0, 0.0};
  const Real diff = Real(k) * Real(k) - Real(n) * Real(n);
  return {0.0, -4.0 * pc.hbar * Real(k) * Real(n) / (L * diff)};
}

MatR position_matrix(int n_basis, Real L) {
  MatR x(n_basis, n_basis);
  for (int k = 1; k <= n_basis; ++k)
    for (int n = 1; n <= n_basis; ++n) x(k - 1, n - 1) = position_matrix_element(k, n, L);
  return x;
}

MatC momentum_matrix(int n_basis, Real L, const PhysicalConstants& pc) {
  MatC p(n_basis, n_basis);
  for (int k = 1; k <= n_basis; ++k)
    for (int n = 1; n <= n_basis; ++n) p(k - 1, n - 1) = momentum_matrix_element(k, n, L, pc);
  return p;
}

}  // namespace movingbox
