#pragma once

// Two independent cross-validation solvers for the coefficient ODE method:
//  * the exact modes of the linearly moving wall (valid for L = L0 + v t),
//  * a fixed-domain Crank-Nicolson grid propagator for arbitrary profiles.
// Both are used only to certify the primary method.

#include "movingbox/core.hpp"
#include "movingbox/wall_motion.hpp"

#include <vector>

namespace movingbox {

/// Exact modes of the uniformly moving wall:
///   Phi_n(x,t) = sqrt(2/L) sin(n pi x / L)
///                * exp(i (m v x^2 / (2 hbar L) - e_n theta_lin / hbar)),
/// with L = L0 + v t and theta_lin = t / (L0 L). At v = 0 they reduce to the
/// stationary eigenstates with their usual phase evolution.
struct AnalyticModeSet {
  Real L0 = 1.0;
  Real v = 0.0;
  int mode_count = 48;
  PhysicalConstants constants;

  Real length(Real t) const { return L0 + v * t; }
  Real theta_lin(Real t) const { return t / (L0 * length(t)); }
  Complex mode(int n, Real x, Real t) const;
};

struct AnalyticOptions {
  int nodes_per_halfwave = 64;  // composite Gauss-Legendre density
  int points_per_panel = 16;
};

/// Populations |<u_k(L(t))|psi(t)>|^2, k = 1..n_report, of the state that
/// starts as the ground state of the initial box. Throws NumericalError if
/// mode_count is too small to represent the initial state (completeness
/// deficit above 1e-8).
VecR analytic_populations(Real v, Real L0, Real t, int n_modes, int n_report,
                          const AnalyticOptions& opt = {}, const PhysicalConstants& pc = {});

/// Same, evaluated on a shared time grid (the initial-state expansion is
/// reused across times).
std::vector<VecR> analytic_populations_grid(Real v, Real L0, const std::vector<Real>& times,
                                            int n_modes, int n_report,
                                            const AnalyticOptions& opt = {},
                                            const PhysicalConstants& pc = {});

struct GridOptions {
  int n_grid = 1024;   // interior resolution of y in [0, 1]
  Real dt = 5e-5;      // nominal step (sub-divided to land on sample times)
  int n_report = 5;
  Real norm_tol = 1e-6;
};

struct GridResult {
  std::vector<Real> times;
  std::vector<VecR> populations;  // per sample, k = 1..n_report
  Real max_norm_drift = 0.0;
};

/// Propagates the fixed-domain transformed wavefunction
///   phi(y, t) = sqrt(L) psi(y L, t),  y = x / L(t),
/// which obeys
///   i hbar dphi/dt = -(hbar^2/(2 m L^2)) d2phi/dy2
///                    + i hbar (Ldot/L) (y dphi/dy + phi/2),
/// using second-order central differences (the convective part in the skew
/// form (Y D1 + D1 Y)/2, keeping the semi-discrete generator anti-Hermitian)
/// and an implicit-midpoint step, so the discrete norm is conserved exactly.
/// Starts from the ground state; reports populations at the sample times.
GridResult grid_evolve(const WallProfile& profile, const std::vector<Real>& sample_times,
                       const GridOptions& opt = {}, const PhysicalConstants& pc = {});

}  // namespace movingbox
