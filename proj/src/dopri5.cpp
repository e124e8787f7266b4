#include "movingbox/dopri5.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace movingbox {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr Real c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr Real a21 = 1.0 / 5;
constexpr Real a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr Real a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr Real a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
               a54 = -212.0 / 729;
constexpr Real a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
               a65 = -5103.0 / 18656;
constexpr Real a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
               a76 = 11.0 / 84;
// Embedded error weights (5th minus 4th order).
constexpr Real e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
               e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense-output weights.
constexpr Real d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
               d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
               d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

// PI controller constants (Lund stabilization).
constexpr Real kSafe = 0.9;
constexpr Real kBeta = 0.04;
constexpr Real kAlpha = 0.2 - kBeta * 0.75;
constexpr Real kShrinkMax = 0.2;  // hnew/h lower bound
constexpr Real kGrowMax = 10.0;   // hnew/h upper bound

Real scaled_error(const VecC& e, const VecC& y0, const VecC& y1, Real atol, Real rtol) {
  Real acc = 0.0;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const Real sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const Real q = std::abs(e[i]) / sc;
    acc += q * q;
  }
  return std::sqrt(acc / static_cast<Real>(e.size()));
}

Real initial_step_guess(const OdeRhs& f, Real t0, const VecC& y0, const VecC& f0, Real atol,
                        Real rtol, Real h_max, Dopri5Stats& stats) {
  const Eigen::Index n = y0.size();
  Real d0 = 0.0, d1 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Real sc = atol + rtol * std::abs(y0[i]);
    d0 += std::norm(y0[i] / sc);
    d1 += std::norm(f0[i] / sc);
  }
  d0 = std::sqrt(d0 / n);
  d1 = std::sqrt(d1 / n);
  Real h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, h_max);

  VecC y1 = y0 + h0 * f0;
  VecC f1(n);
  f(t0 + h0, y1, f1);
  ++stats.rhs_evals;
  Real d2 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Real sc = atol + rtol * std::abs(y0[i]);
    d2 += std::norm((f1[i] - f0[i]) / sc);
  }
  d2 = std::sqrt(d2 / n) / h0;

  const Real dmax = std::max(d1, d2);
  Real h1 = (dmax <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                            : std::pow(0.01 / dmax, 0.2);
  return std::min({100.0 * h0, h1, h_max});
}

}  // namespace

Dopri5Stats dopri5_integrate(const OdeRhs& f, Real t0, Real t1, VecC& y,
                             const Dopri5Options& opt, std::span<const Real> sample_times,
                             const SampleFn& on_sample, std::span<const Real> breakpoints) {
  if (!(t1 > t0)) throw DomainError("dopri5: need t1 > t0");
  if (!(opt.rel_tol > 0.0) || !(opt.abs_tol > 0.0))
    throw DomainError("dopri5: tolerances must be > 0");
  const Real span = t1 - t0;
  const Real h_max = opt.max_step > 0.0 ? std::min(opt.max_step, span) : span / 10.0;

  const Eigen::Index n = y.size();
  Dopri5Stats stats;
  VecC k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), y1(n), err(n);
  VecC rc1(n), rc2(n), rc3(n), rc4(n), rc5(n), ydense(n);

  std::size_t sample_idx = 0;
  // Emit samples exactly at t0 before stepping.
  while (sample_idx < sample_times.size() && sample_times[sample_idx] <= t0) {
    if (on_sample) on_sample(t0, y);
    ++sample_idx;
  }
  std::size_t break_idx = 0;
  while (break_idx < breakpoints.size() && breakpoints[break_idx] <= t0) ++break_idx;

  Real t = t0;
  f(t, y, k1);
  ++stats.rhs_evals;
  Real h = opt.initial_step > 0.0
               ? std::min(opt.initial_step, h_max)
               : initial_step_guess(f, t0, y, k1, opt.abs_tol, opt.rel_tol, h_max, stats);
  Real facold = 1e-4;
  bool last_rejected = false;

  while (t < t1) {
    h = std::min(h, h_max);
    // Land exactly on the next breakpoint / the end time.
    Real t_limit = t1;
    bool hits_breakpoint = false;
    if (break_idx < breakpoints.size() && breakpoints[break_idx] <= t_limit) {
      t_limit = breakpoints[break_idx];
      hits_breakpoint = true;
    }
    // Stretch a step that would leave a sub-1% sliver before the limit.
    bool lands_on_limit = false;
    if (t + 1.01 * h >= t_limit) {
      h = t_limit - t;
      lands_on_limit = true;
    }
    const bool closes_segment = hits_breakpoint && lands_on_limit;
    // A step that closes a segment must sample the left limit of the RHS at
    // the joint; the fresh right-limit derivative is picked up after the
    // crossing.
    const Real t_right = closes_segment ? std::nextafter(t + h, t) : t + h;
    if (!(h > std::numeric_limits<Real>::epsilon() * std::max(std::abs(t), 1.0) * 16.0))
      throw NumericalError("dopri5: step size underflow at t = " + std::to_string(t));

    ytmp = y + h * (a21 * k1);
    f(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    f(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(t_right, ytmp, k6);
    y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    f(t_right, y1, k7);
    stats.rhs_evals += 6;

    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const Real errn = scaled_error(err, y, y1, opt.abs_tol, opt.rel_tol);

    if (errn <= 1.0) {
      // Accepted. Serve dense-output samples inside (t, t+h]; a clamped step
      // lands on its limit exactly (t + (t1 - t) may round off t1).
      const Real t_new = lands_on_limit ? t_limit : t + h;
      if (on_sample && sample_idx < sample_times.size() && sample_times[sample_idx] <= t_new) {
        rc1 = y;
        rc2 = y1 - y;
        rc3 = h * k1 - rc2;
        rc4 = rc2 - h * k7 - rc3;
        rc5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        while (sample_idx < sample_times.size() && sample_times[sample_idx] <= t_new) {
          const Real s = sample_times[sample_idx];
          const Real th = (s - t) / h;
          const Real th1 = 1.0 - th;
          ydense = rc1 + th * (rc2 + th1 * (rc3 + th * (rc4 + th1 * rc5)));
          on_sample(s, ydense);
          ++sample_idx;
        }
      }
      t = t_new;
      y.swap(y1);
      k1.swap(k7);  // FSAL
      while (break_idx < breakpoints.size() && breakpoints[break_idx] <= t) ++break_idx;
      if (closes_segment && t < t1) {
        f(t, y, k1);  // right-limit derivative for the next segment
        ++stats.rhs_evals;
      }

      const Real fac11 = std::pow(std::max(errn, 1e-10), kAlpha);
      Real fac = fac11 / std::pow(facold, kBeta);
      fac = std::max(1.0 / kGrowMax, std::min(1.0 / kShrinkMax, fac / kSafe));
      Real h_new = h / fac;
      if (last_rejected) h_new = std::min(h_new, h);
      h = h_new;
      facold = std::max(errn, 1e-4);
      last_rejected = false;
      ++stats.accepted;
    } else {
      const Real fac11 = std::pow(errn, kAlpha);
      h = h / std::min(1.0 / kShrinkMax, fac11 / kSafe);
      last_rejected = true;
      ++stats.rejected;
    }
  }
  return stats;
}

}  // namespace movingbox
