#pragma once

// Coupled ODEs for the expansion coefficients of a particle in a box with a
// moving wall, expanded on the instantaneous eigenbasis:
//
//   dC_k/dt = (Ldot/L) sum_{n != k} A[k][n] exp(-i W[k][n] theta) C_n,
//   dtheta/dt = 1/L^2,
//
// with A[k][n] = 2 (-1)^{k+n} k n / (n^2 - k^2) and
// W[k][n] = (e_n - e_k)/hbar, e_n = hbar^2 pi^2 n^2 / (2 m). The product
// L^2 (E_n - E_k) is time-invariant, so the phase constants are precomputed
// once; theta is carried as extra ODE state, never re-quadratured.

#include "movingbox/core.hpp"
#include "movingbox/dopri5.hpp"
#include "movingbox/wall_motion.hpp"

#include <span>
#include <vector>

namespace movingbox {

/// Antisymmetric coupling coefficients of the basis-derivative term.
struct CouplingMatrix {
  MatR A;  // A(k-1, n-1) for physical levels k, n

  int n_basis() const { return static_cast<int>(A.rows()); }
  Real at(int k, int n) const { return A(k - 1, n - 1); }
};

/// Phase rates: W(k-1, n-1) = (e_n - e_k)/hbar, the constant value of
/// L^2 (E_n - E_k)/hbar.
struct PhaseConstants {
  MatR W;
  VecR level_rates;  // e_n / hbar

  int n_basis() const { return static_cast<int>(W.rows()); }
  Real at(int k, int n) const { return W(k - 1, n - 1); }
};

CouplingMatrix build_coupling(int n_basis);
PhaseConstants build_phase_constants(int n_basis, const PhysicalConstants& pc = {});

struct CoefficientState {
  Real t = 0.0;
  VecC C;            // expansion coefficients, level n at C[n-1]
  Real theta = 0.0;  // accumulated integral of 1/L^2

  Real norm_sq() const { return C.squaredNorm(); }

  /// Coefficients prepared in a single eigenstate.
  static CoefficientState ground_state(int n_basis, int level = 1);
};

struct IntegratorConfig {
  Real rel_tol = 1e-9;
  Real abs_tol = 1e-11;
  Real initial_step = 0.0;          // 0: automatic
  Real max_step = 0.0;              // 0: span / 10
  std::vector<Real> sample_times;   // sorted; empty: {0, t_end}

  void validate(Real t_end) const;
};

struct IntegrationStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
};

struct Trajectory {
  std::vector<CoefficientState> samples;
  std::vector<Real> norm_drift;  // | |C|^2 - 1 | per sample
  IntegrationStats stats;
};

/// Time derivative of (C, theta) at the state's own time. The matrix form of
/// the phase factor is evaluated through the factorization
/// exp(-i W[k][n] theta) = q_n conj(q_k), q_n = exp(-i e_n theta / hbar).
void rhs(const CoefficientState& state, const WallProfile& profile, const CouplingMatrix& A,
         const PhaseConstants& W, VecC& dC, Real& dtheta);

/// Adaptive 5(4) integration with dense output at config.sample_times.
/// Requires validate_profile to have passed and |C|^2 = 1 to 1e-12.
Trajectory integrate(const CoefficientState& initial, const WallProfile& profile,
                     const IntegratorConfig& config, Real t_end,
                     const PhysicalConstants& pc = {});

/// Same propagation, but streams dense samples to `observer` instead of
/// storing them (used by parameter sweeps).
IntegrationStats integrate_observed(
    const CoefficientState& initial, const WallProfile& profile, const IntegratorConfig& config,
    Real t_end, const std::function<void(Real t, const VecC& C, Real theta)>& observer,
    const PhysicalConstants& pc = {});

/// max_t | sum_n |C_n|^2 - 1 | over the trajectory samples.
Real richardson_norm_check(const Trajectory& trajectory);

}  // namespace movingbox
