#pragma once

// Static eigenproblem data for a particle in a one-dimensional hard-wall box:
// level energies, eigenfunctions and the position/momentum matrix elements in
// the instantaneous eigenbasis. Everything here is time-independent; the box
// length L enters as a plain parameter.

#include "movingbox/types.hpp"

namespace movingbox {

struct PhysicalConstants {
  Real hbar = 1.0;
  Real mass = 1.0;

  void validate() const {
    if (!(hbar > 0.0) || !(mass > 0.0))
      throw DomainError("PhysicalConstants: hbar and mass must be positive");
  }
};

struct BoxSpec {
  int n_basis = 64;  // number of retained eigenstates
  Real L0 = 1.0;     // initial/average box length

  void validate() const {
    if (n_basis < 2) throw DomainError("BoxSpec: n_basis must be >= 2");
    if (!(L0 > 0.0)) throw DomainError("BoxSpec: L0 must be > 0");
  }
};

/// Level constants e_n with E_n(L) = e_n / L^2. Level indices are physical
/// (n = 1 is the ground state) on every interface.
struct EigenData {
  VecR level_constants;  // e_n = hbar^2 pi^2 n^2 / (2 m), n = 1..N
  PhysicalConstants constants;

  static EigenData build(int n_basis, const PhysicalConstants& pc = {});

  int n_basis() const { return static_cast<int>(level_constants.size()); }

  /// e_n for physical level n >= 1.
  Real level_constant(int n) const {
    if (n < 1 || n > n_basis()) throw DomainError("EigenData: level index out of range");
    return level_constants[n - 1];
  }

  /// Phase rates e_n / hbar, used by the propagator and the observables.
  VecR phase_rates() const { return level_constants / constants.hbar; }
};

/// E_n(L) = hbar^2 pi^2 n^2 / (2 m L^2).
Real energy(int n, Real L, const PhysicalConstants& pc = {});

/// u_n(x; L) = sqrt(2/L) sin(n pi x / L); exactly 0 at the walls.
Real eigenfunction(int n, Real L, Real x);

/// <u_k| x |u_n> in closed form:
///   L/2 when k = n, 0 when k+n even, -8 L k n / (pi^2 (k^2-n^2)^2) when odd.
Real position_matrix_element(int k, int n, Real L);

/// <u_k| -i hbar d/dx |u_n>: 0 when k+n even, -4 i hbar k n / (L (k^2-n^2))
/// when odd. The resulting matrix is Hermitian.
Complex momentum_matrix_element(int k, int n, Real L, const PhysicalConstants& pc = {});

/// Dense matrices of the above for levels 1..n_basis.
MatR position_matrix(int n_basis, Real L);
MatC momentum_matrix(int n_basis, Real L, const PhysicalConstants& pc = {});

}  // namespace movingbox
