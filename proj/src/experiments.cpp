#include "movingbox/experiments.hpp"

#include "movingbox/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <numbers>

namespace movingbox {

namespace {
constexpr Real kGolden = 0.6180339887498949;  // (sqrt(5) - 1) / 2
}

void SweepSpec::validate() const {
  if (!(omega_min < omega_max)) throw DomainError("SweepSpec: need omega_min < omega_max");
  if (!(omega_min > 0.0)) throw DomainError("SweepSpec: need omega_min > 0");
  if (n_omega < 2) throw DomainError("SweepSpec: need n_omega >= 2");
  if (!(amplitude >= 0.0)) throw DomainError("SweepSpec: amplitude must be >= 0");
  if (!(amplitude < L0)) throw DomainError("SweepSpec: amplitude must be < L0");
  if (!(t_end > 0.0)) throw DomainError("SweepSpec: t_end must be > 0");
  if (n_report < 1 || n_report > n_basis)
    throw DomainError("SweepSpec: n_report must be in [1, n_basis]");
  if (n_basis < 2) throw DomainError("SweepSpec: n_basis must be >= 2");
}

SweepPoint max_population_run(Real omega, const SweepSpec& spec) {
  spec.validate();
  SweepPoint point;
  point.omega = omega;
  point.max_pop = VecR::Zero(spec.n_report);
  point.argmax_t = VecR::Zero(spec.n_report);

  const WallProfile profile(Sinusoidal{spec.L0, spec.amplitude, omega});
  if (auto violation = validate_profile(profile, spec.t_end))
    throw DomainError("max_population_run: " + violation->message);

  IntegratorConfig config;
  config.rel_tol = spec.rel_tol;
  config.abs_tol = spec.abs_tol;
  const Real spacing = 2.0 * std::numbers::pi / (50.0 * omega);
  const long n_samples = std::max<long>(2, std::lround(std::ceil(spec.t_end / spacing)) + 1);
  config.sample_times.resize(n_samples);
  for (long i = 0; i < n_samples; ++i)
    config.sample_times[i] = spec.t_end * Real(i) / Real(n_samples - 1);

  const auto initial = CoefficientState::ground_state(spec.n_basis);
  integrate_observed(initial, profile, config, spec.t_end,
                     [&](Real t, const VecC& C, Real) {
                       for (int k = 0; k < spec.n_report; ++k) {
                         const Real p = std::norm(C[k]);
                         if (p > point.max_pop[k]) {
                           point.max_pop[k] = p;
                           point.argmax_t[k] = t;
                         }
                       }
                     });
  return point;
}

SweepResult frequency_sweep(const SweepSpec& spec) {
  spec.validate();
  SweepResult result;
  result.spec = spec;
  result.points.resize(spec.n_omega);

  parallel_for(
      static_cast<std::size_t>(spec.n_omega),
      [&](std::size_t i) {
        const Real omega = spec.omega_min + (spec.omega_max - spec.omega_min) * Real(i) /
                                                Real(spec.n_omega - 1);
        try {
          result.points[i] = max_population_run(omega, spec);
        } catch (const std::exception& e) {
          result.points[i].omega = omega;
          result.points[i].max_pop = VecR::Constant(spec.n_report,
                                                    std::numeric_limits<Real>::quiet_NaN());
          result.points[i].argmax_t = VecR::Zero(spec.n_report);
          result.points[i].ok = false;
          result.points[i].error = e.what();
        }
      },
      spec.threads);
  return result;
}

ResonanceReport refine_resonance(int state, Real omega_lo, Real omega_hi, const SweepSpec& spec,
                                 Real width_tol, std::optional<Real> early_stop) {
  spec.validate();
  if (state < 1 || state > spec.n_report)
    throw DomainError("refine_resonance: state must be in [1, n_report]");
  if (!(omega_lo < omega_hi)) throw DomainError("refine_resonance: invalid bracket");
  if (!(width_tol > 0.0)) throw DomainError("refine_resonance: width_tol must be > 0");

  ResonanceReport report;
  report.state = state;
  report.bracket_lo = omega_lo;
  report.bracket_hi = omega_hi;

  Real best_omega = omega_lo;
  Real best_value = -1.0;
  Real best_time = 0.0;
  Real endpoint_best = -1.0;
  auto eval = [&](Real omega) -> Real {
    const SweepPoint p = max_population_run(omega, spec);
    ++report.iterations;
    if (p.max_pop[state - 1] > best_value) {
      best_value = p.max_pop[state - 1];
      best_omega = omega;
      best_time = p.argmax_t[state - 1];
    }
    return p.max_pop[state - 1];
  };

  endpoint_best = std::max(eval(omega_lo), eval(omega_hi));

  Real a = omega_lo, b = omega_hi;
  Real x1 = b - kGolden * (b - a);
  Real x2 = a + kGolden * (b - a);
  Real f1 = eval(x1);
  Real f2 = eval(x2);
  while (b - a > width_tol) {
    if (early_stop && best_value >= *early_stop) break;
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = eval(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = eval(x1);
    }
  }

  report.omega_star = best_omega;
  report.max_population = best_value;
  report.argmax_time = best_time;
  report.unimodal = best_value >= endpoint_best &&
                    best_omega > omega_lo && best_omega < omega_hi;
  return report;
}

ValidationResult validate_constant_velocity(Real v, Real L0, Real t_end, int n_basis,
                                            int n_samples, int n_modes,
                                            const IntegratorConfig& config) {
  if (n_samples < 2) throw DomainError("validate_constant_velocity: need n_samples >= 2");
  const WallProfile profile(ConstantVelocity{L0, v});
  if (auto violation = validate_profile(profile, t_end))
    throw DomainError("validate_constant_velocity: " + violation->message);

  ValidationResult result;
  result.times.resize(n_samples);
  for (int i = 0; i < n_samples; ++i) result.times[i] = t_end * Real(i) / Real(n_samples - 1);

  IntegratorConfig cfg = config;
  cfg.sample_times = result.times;
  const auto initial = CoefficientState::ground_state(n_basis);
  const int n_report = 5;
  integrate_observed(initial, profile, cfg, t_end, [&](Real, const VecC& C, Real) {
    result.ode_populations.push_back(C.head(n_report).cwiseAbs2());
  });

  result.analytic_populations =
      analytic_populations_grid(v, L0, result.times, n_modes, n_report);

  for (int i = 0; i < n_samples; ++i) {
    const Real d =
        (result.ode_populations[i] - result.analytic_populations[i]).cwiseAbs().maxCoeff();
    result.max_discrepancy = std::max(result.max_discrepancy, d);
  }
  return result;
}

std::vector<ConvergenceRow> convergence_study(Real omega, const SweepSpec& reference,
                                              const std::vector<Real>& basis_factors,
                                              const std::vector<Real>& tol_factors) {
  reference.validate();
  for (Real f : basis_factors)
    if (!(f >= 1.0)) throw DomainError("convergence_study: basis factors must be >= 1");
  for (Real f : tol_factors)
    if (!(f > 0.0) || f > 1.0)
      throw DomainError("convergence_study: tolerance factors must be in (0, 1]");

  // Reference populations on a fixed sample grid.
  const WallProfile profile(Sinusoidal{reference.L0, reference.amplitude, omega});
  const int n_samples = 501;
  std::vector<Real> times(n_samples);
  for (int i = 0; i < n_samples; ++i)
    times[i] = reference.t_end * Real(i) / Real(n_samples - 1);

  auto run = [&](int n_basis, Real rel, Real abs) {
    IntegratorConfig cfg;
    cfg.rel_tol = rel;
    cfg.abs_tol = abs;
    cfg.sample_times = times;
    std::vector<VecR> pops;
    pops.reserve(times.size());
    integrate_observed(CoefficientState::ground_state(n_basis), profile, cfg, reference.t_end,
                       [&](Real, const VecC& C, Real) {
                         pops.push_back(C.head(reference.n_report).cwiseAbs2());
                       });
    return pops;
  };

  const auto base = run(reference.n_basis, reference.rel_tol, reference.abs_tol);
  auto max_shift = [&](const std::vector<VecR>& other) {
    Real shift = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i)
      shift = std::max(shift, (base[i] - other[i]).cwiseAbs().maxCoeff());
    return shift;
  };

  std::vector<ConvergenceRow> rows;
  for (Real f : basis_factors) {
    const int scaled = static_cast<int>(std::lround(reference.n_basis * f));
    ConvergenceRow row;
    row.label = "basis_x" + std::to_string(f);
    row.factor = f;
    row.max_shift = (scaled == reference.n_basis)
                        ? 0.0
                        : max_shift(run(scaled, reference.rel_tol, reference.abs_tol));
    rows.push_back(row);
  }
  for (Real f : tol_factors) {
    ConvergenceRow row;
    row.label = "tol_x" + std::to_string(f);
    row.factor = f;
    row.max_shift =
        (f == 1.0) ? 0.0
                   : max_shift(run(reference.n_basis, reference.rel_tol * f,
                                   reference.abs_tol * f));
    rows.push_back(row);
  }
  return rows;
}

PreparationResult exponential_preparation(Real v, Real L0, Real t_end, int n_basis,
                                          int n_samples, const IntegratorConfig& config) {
  if (n_samples < 11) throw DomainError("exponential_preparation: need n_samples >= 11");
  const WallProfile profile(Exponential{L0, v});
  if (auto violation = validate_profile(profile, t_end))
    throw NumericalError("exponential_preparation: " + violation->message);

  IntegratorConfig cfg = config;
  cfg.sample_times.resize(n_samples);
  for (int i = 0; i < n_samples; ++i)
    cfg.sample_times[i] = t_end * Real(i) / Real(n_samples - 1);

  PreparationResult result;
  result.trajectory =
      integrate(CoefficientState::ground_state(n_basis), profile, cfg, t_end);

  result.samples.reserve(result.trajectory.samples.size());
  for (const auto& s : result.trajectory.samples)
    result.samples.push_back(observe(s, length(profile, s.t), std::min(n_basis, 8)));

  // Plateau metric: max |P_k(t) - P_k(t')| over the final 10% of the run.
  const Real window_start = t_end * 0.9;
  VecR lo, hi;
  for (const auto& s : result.trajectory.samples) {
    if (s.t < window_start) continue;
    const VecR p = populations(s);
    if (lo.size() == 0) {
      lo = p;
      hi = p;
    } else {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  }
  result.plateau_delta = (lo.size() == 0) ? 0.0 : (hi - lo).maxCoeff();
  return result;
}

}  // namespace movingbox
