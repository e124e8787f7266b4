#pragma once

// Embedded explicit Runge-Kutta 5(4) pair (Dormand-Prince coefficients) for
// complex-vector ODEs, with PI step-size control, FSAL, and quartic dense
// output evaluated at caller-supplied sample times.

#include "movingbox/types.hpp"

#include <functional>
#include <span>

namespace movingbox {

struct Dopri5Options {
  Real rel_tol = 1e-9;
  Real abs_tol = 1e-11;
  Real initial_step = 0.0;  // 0: automatic
  Real max_step = 0.0;      // 0: span / 10
};

struct Dopri5Stats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
};

using OdeRhs = std::function<void(Real t, const VecC& y, VecC& dy)>;
using SampleFn = std::function<void(Real t, const VecC& y)>;

/// Integrates y' = f(t, y) from t0 to t1 (t1 > t0), advancing `y` in place.
/// `sample_times` must be sorted within [t0, t1]; each is evaluated through
/// the dense interpolant and passed to `on_sample`. Steps never straddle a
/// breakpoint. Throws NumericalError on step-size underflow, reporting the
/// time reached.
Dopri5Stats dopri5_integrate(const OdeRhs& f, Real t0, Real t1, VecC& y,
                             const Dopri5Options& opt, std::span<const Real> sample_times,
                             const SampleFn& on_sample, std::span<const Real> breakpoints = {});

}  // namespace movingbox
