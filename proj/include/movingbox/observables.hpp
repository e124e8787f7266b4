#pragma once

// Everything computed from a coefficient state: populations, expectation
// values of position/momentum, kinetic energy, reconstructed wavefunctions
// and probability-density maps.
//
// The physical wavefunction is
//   psi(x, t) = sum_n C_n(t) u_n(x; L(t)) exp(-i e_n theta(t) / hbar),
// so off-diagonal observables use the phase-dressed coefficients
// Ct_n = C_n exp(-i e_n theta / hbar).

#include "movingbox/core.hpp"
#include "movingbox/dynamics.hpp"
#include "movingbox/wall_motion.hpp"

namespace movingbox {

struct ObservableSample {
  Real t = 0.0;
  Real L = 0.0;
  VecR populations;  // first n_report entries of |C_n|^2
  Real x_mean = 0.0;
  Real p_mean = 0.0;
  Real kinetic = 0.0;
  Real norm = 0.0;  // sum of all |C_n|^2
};

enum class DensityCoordinate { Fractional, Absolute };

/// Probability density on a (time x space) grid. In fractional mode the
/// space grid is y = x/L(t) over [0, 1]; in absolute mode it is x over
/// [0, max_t L(t)], with zeros outside the instantaneous box.
struct DensityMap {
  DensityCoordinate coordinate = DensityCoordinate::Fractional;
  VecR times;
  VecR coords;
  VecR lengths;  // L(t) per row
  MatR values;   // values(i, j) = |psi|^2 at (times[i], coords[j])

  /// Trapezoid integral of |psi|^2 over x for one row.
  Real row_norm(Eigen::Index row) const;
};

/// Phase-dressed coefficients Ct_n = C_n exp(-i e_n theta / hbar).
VecC dressed_coefficients(const CoefficientState& state, const PhysicalConstants& pc = {});

/// psi(x, t) for the instantaneous box length L.
Complex reconstruct_wavefunction(const CoefficientState& state, Real L, Real x,
                                 const PhysicalConstants& pc = {});

/// Elementwise |C_n|^2.
VecR populations(const CoefficientState& state);

/// sum_n |C_n|^2 E_n(L); the eigenbasis diagonalizes p^2/2m inside the box.
Real kinetic_energy(const CoefficientState& state, Real L, const PhysicalConstants& pc = {});

/// <psi| x |psi> via the closed-form position matrix elements.
Real position_expectation(const CoefficientState& state, Real L,
                          const PhysicalConstants& pc = {});

/// <psi| p |psi>; real up to rounding.
Real momentum_expectation(const CoefficientState& state, Real L,
                          const PhysicalConstants& pc = {});

/// All scalar observables at once. n_report limits the stored populations
/// (<= 0 means all).
ObservableSample observe(const CoefficientState& state, Real L, int n_report = 0,
                         const PhysicalConstants& pc = {});

DensityMap density_map(const Trajectory& trajectory, const WallProfile& profile, int n_x = 512,
                       DensityCoordinate coordinate = DensityCoordinate::Fractional,
                       const PhysicalConstants& pc = {});

/// Count of strict interior local minima along one row of a density map.
int interior_minima(const DensityMap& map, Eigen::Index row);

}  // namespace movingbox
