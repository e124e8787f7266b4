#pragma once

// Higher-level protocols on top of the propagator: driving-frequency sweeps,
// resonance refinement, oracle validation, convergence studies and the
// exponential state-preparation runs.

#include "movingbox/dynamics.hpp"
#include "movingbox/observables.hpp"
#include "movingbox/oracles.hpp"

#include <optional>
#include <string>
#include <vector>

namespace movingbox {

struct SweepSpec {
  Real omega_min = 1.0;
  Real omega_max = 100.0;
  int n_omega = 2000;
  Real amplitude = 0.05;  // drive amplitude v (length)
  Real L0 = 1.0;
  Real t_end = 10.0;
  int n_report = 5;
  int n_basis = 64;
  Real rel_tol = 1e-9;
  Real abs_tol = 1e-11;
  unsigned threads = 0;  // 0: worker_count()

  void validate() const;
};

struct SweepPoint {
  Real omega = 0.0;
  VecR max_pop;    // max_t |C_k(t)|^2, k = 1..n_report
  VecR argmax_t;   // times of those maxima
  bool ok = true;
  std::string error;
};

struct SweepResult {
  SweepSpec spec;
  std::vector<SweepPoint> points;
};

struct ResonanceReport {
  int state = 0;
  Real omega_star = 0.0;
  Real max_population = 0.0;
  Real argmax_time = 0.0;
  Real bracket_lo = 0.0;
  Real bracket_hi = 0.0;
  int iterations = 0;
  bool unimodal = true;  // false if the endpoint beat every interior point
};

struct ValidationResult {
  std::vector<Real> times;
  std::vector<VecR> ode_populations;
  std::vector<VecR> analytic_populations;
  Real max_discrepancy = 0.0;
};

struct ConvergenceRow {
  std::string label;
  Real factor = 1.0;
  Real max_shift = 0.0;
};

struct PreparationResult {
  Trajectory trajectory;
  std::vector<ObservableSample> samples;
  Real plateau_delta = 0.0;  // max population change over the final 10%
};

/// Maximum populations over dense trajectory samples for one sinusoidal
/// drive frequency (sample spacing <= 2 pi / (50 omega) to avoid aliasing
/// the drive period).
SweepPoint max_population_run(Real omega, const SweepSpec& spec);

/// Uniform omega grid; per-point integrations run on the worker pool and
/// failures are flagged per point without aborting the sweep.
SweepResult frequency_sweep(const SweepSpec& spec);

/// Golden-section maximization of omega -> max_t |C_k|^2 inside the bracket,
/// refined to width <= width_tol. Stops early once `early_stop` population is
/// reached, when given.
ResonanceReport refine_resonance(int state, Real omega_lo, Real omega_hi, const SweepSpec& spec,
                                 Real width_tol = 1e-4,
                                 std::optional<Real> early_stop = std::nullopt);

/// Propagator vs analytic moving-wall solution on a shared time grid;
/// returns the max absolute population difference over the first 5 states.
ValidationResult validate_constant_velocity(Real v, Real L0, Real t_end, int n_basis = 128,
                                            int n_samples = 101, int n_modes = 48,
                                            const IntegratorConfig& config = {});

/// Reruns a reference sinusoidal trajectory at scaled basis sizes and
/// tolerance factors; reports the max absolute shift of tracked populations
/// across the shared sample times.
std::vector<ConvergenceRow> convergence_study(Real omega, const SweepSpec& reference,
                                              const std::vector<Real>& basis_factors,
                                              const std::vector<Real>& tol_factors);

/// Exponential wall run with densely sampled populations and kinetic energy.
PreparationResult exponential_preparation(Real v, Real L0, Real t_end, int n_basis = 32,
                                          int n_samples = 1001,
                                          const IntegratorConfig& config = {});

}  // namespace movingbox
