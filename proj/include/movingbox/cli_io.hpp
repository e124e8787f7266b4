#pragma once

// Config-file parsing (line-oriented `key = value` with a bracketed profile
// section), canonical rendering, CSV/PGM serialization and the CLI driver.
// All floating-point output is locale-independent at 17 significant digits,
// so identical configs reproduce data files byte for byte.

#include "movingbox/dynamics.hpp"
#include "movingbox/experiments.hpp"
#include "movingbox/observables.hpp"
#include "movingbox/wall_motion.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace movingbox {

inline constexpr const char* kVersion = "0.1.0";

/// Initial coefficients: a level index, or an explicit complex vector
/// (normalized on load).
struct InitialStateSpec {
  int level = 1;
  std::vector<Complex> vector;  // non-empty: explicit superposition

  bool is_vector() const { return !vector.empty(); }
  bool operator==(const InitialStateSpec&) const = default;
};

struct SegmentSpec {
  Real t_start = 0.0;
  std::string kind;  // constant_velocity | exponential | sinusoidal
  std::optional<Real> L0;  // only honored on the first segment
  Real v = 0.0;
  Real omega = 0.0;  // sinusoidal only

  bool operator==(const SegmentSpec&) const = default;
};

struct RunConfig {
  std::string profile_kind;  // constant_velocity | exponential | sinusoidal |
                             // piecewise | tabulated
  Real L0 = 1.0;
  Real v = 0.0;
  Real omega = 0.0;
  std::vector<SegmentSpec> segments;            // piecewise
  std::vector<std::pair<Real, Real>> samples_tL;  // tabulated

  int n_basis = 0;  // 0: per-profile default
  Real rel_tol = 1e-9;
  Real abs_tol = 1e-11;
  Real t_end = 10.0;
  int samples = 1001;
  int n_report = 5;
  InitialStateSpec initial_state;
  std::string output_dir = ".";
  unsigned long seed = 0;  // reserved; deterministic runs ignore it
  Real hbar = 1.0;
  Real mass = 1.0;
  int n_x = 512;                        // density-map spatial points
  std::string coordinate = "fractional";  // density-map mode

  bool operator==(const RunConfig&) const = default;

  int effective_n_basis() const;
  WallProfile build_profile() const;
  PhysicalConstants constants() const { return {hbar, mass}; }
  CoefficientState build_initial_state() const;
  IntegratorConfig build_integrator(Real t_end_override = -1.0) const;
};

/// Parses and fully validates a simulate/density-map config. Errors carry
/// line numbers; range violations name the field and the bound.
RunConfig parse_config(const std::string& text);

/// Canonical text form; parse_config(render_config(c)) == c.
std::string render_config(const RunConfig& config);

struct SweepConfig {
  SweepSpec spec;
  std::string output_dir = ".";
};
SweepConfig parse_sweep_config(const std::string& text);

struct ResonanceConfig {
  int state = 2;
  Real omega_lo = 0.0;
  Real omega_hi = 0.0;
  Real width_tol = 1e-4;
  SweepSpec spec;
  std::string output_dir = ".";
};
ResonanceConfig parse_resonance_config(const std::string& text);

struct ValidateConfig {
  Real v = 2.0;
  Real L0 = 1.0;
  Real t_end = 1.0;
  int n_basis = 128;
  int samples = 101;
  int n_modes = 48;
  Real rel_tol = 1e-9;
  Real abs_tol = 1e-11;
  std::string output_dir = ".";
};
ValidateConfig parse_validate_config(const std::string& text);

struct ConvergeConfig {
  Real omega = 0.0;
  std::vector<Real> basis_factors{1.0, 2.0};
  std::vector<Real> tol_factors{1.0, 0.1};
  SweepSpec reference;
  std::string output_dir = ".";
};
ConvergeConfig parse_converge_config(const std::string& text);

/// 17-significant-digit, locale-independent float formatting.
std::string format_double(Real value);

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory,
                          const WallProfile& profile, int n_report,
                          const PhysicalConstants& pc);
void write_sweep_csv(std::ostream& os, const SweepResult& result);
void write_resonance_csv(std::ostream& os, const ResonanceReport& report);
void write_validate_csv(std::ostream& os, const ValidationResult& result);
void write_converge_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows);
void write_density_csv(std::ostream& os, const DensityMap& map);

/// 16-bit PGM (P5, maxval 65535, big-endian), rows = time, columns = space,
/// linearly scaled to the map's global maximum.
void write_pgm16(std::ostream& os, const MatR& values);

/// Entry point used by main(): dispatches subcommands
/// {simulate, sweep, resonance, validate, density-map, converge}.
/// Returns 0 on success, 1 on validation errors, 2 on numerical failures.
int run_cli(int argc, const char* const* argv);

}  // namespace movingbox
