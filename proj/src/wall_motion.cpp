#include "movingbox/wall_motion.hpp"

#include <algorithm>
#include <cmath>

#include <numbers>

namespace movingbox {

CubicSpline::CubicSpline(const VecR& x, const VecR& y) : x_(x), y_(y) {
  const Eigen::Index n = x.size();
  if (n < 2) throw DomainError("CubicSpline: need at least two samples");
  if (y.size() != n) throw DomainError("CubicSpline: times/values size mismatch");
  for (Eigen::Index i = 1; i < n; ++i)
    if (!(x[i] > x[i - 1])) throw DomainError("CubicSpline: times must be strictly increasing");
  // Natural spline: tridiagonal system for the knot second derivatives.
  m_ = VecR::Zero(n);
  if (n > 2) {
    const Eigen::Index m = n - 2;
    VecR diag(m), rhs(m), sub(m), sup(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Real h0 = x[i + 1] - x[i];
      const Real h1 = x[i + 2] - x[i + 1];
      sub[i] = h0;
      diag[i] = 2.0 * (h0 + h1);
      sup[i] = h1;
      rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h1 - (y[i + 1] - y[i]) / h0);
    }
    // Thomas algorithm.
    for (Eigen::Index i = 1; i < m; ++i) {
      const Real w = sub[i] / diag[i - 1];
      diag[i] -= w * sup[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    m_[m] = rhs[m - 1] / diag[m - 1];
    for (Eigen::Index i = m - 1; i >= 1; --i)
      m_[i] = (rhs[i - 1] - sup[i - 1] * m_[i + 1]) / diag[i - 1];
  }
}

Eigen::Index CubicSpline::segment(Real t) const {
  if (t < x_[0] || t > x_[x_.size() - 1])
    throw DomainError("Tabulated profile: time " + std::to_string(t) + " outside sample range [" +
                      std::to_string(x_[0]) + ", " + std::to_string(x_[x_.size() - 1]) + "]");
  Eigen::Index i = std::upper_bound(x_.data(), x_.data() + x_.size(), t) - x_.data() - 1;
  return std::clamp<Eigen::Index>(i, 0, x_.size() - 2);
}

Real CubicSpline::value(Real t) const {
  const Eigen::Index i = segment(t);
  const Real h = x_[i + 1] - x_[i];
  const Real a = (x_[i + 1] - t) / h;
  const Real b = (t - x_[i]) / h;
  return a * y_[i] + b * y_[i + 1] +
         ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

Real CubicSpline::derivative(Real t) const {
  const Eigen::Index i = segment(t);
  const Real h = x_[i + 1] - x_[i];
  const Real a = (x_[i + 1] - t) / h;
  const Real b = (t - x_[i]) / h;
  return (y_[i + 1] - y_[i]) / h +
         ((3.0 * b * b - 1.0) * m_[i + 1] - (3.0 * a * a - 1.0) * m_[i]) * h / 6.0;
}

namespace {

Real closed_length(const ConstantVelocity& p, Real t) { return p.L0 + p.v * t; }
Real closed_length(const Exponential& p, Real t) { return p.L0 * std::exp(p.v * t / p.L0); }
Real closed_length(const Sinusoidal& p, Real t) { return p.L0 + p.v * std::sin(p.omega * t); }

}  // namespace

void WallProfile::init() {
  if (auto* pw = std::get_if<Piecewise>(&var_)) {
    const std::size_t n = pw->segments.size();
    if (n == 0) throw DomainError("Piecewise profile: no segments");
    if (pw->start_times.size() != n)
      throw DomainError("Piecewise profile: start_times/segments size mismatch");
    if (pw->start_times[0] != 0.0)
      throw DomainError("Piecewise profile: first segment must start at t = 0");
    for (std::size_t i = 1; i < n; ++i)
      if (!(pw->start_times[i] > pw->start_times[i - 1]))
        throw DomainError("Piecewise profile: start times must be strictly increasing");
    for (const auto& seg : pw->segments) {
      if (!seg) throw DomainError("Piecewise profile: null segment");
      if (std::holds_alternative<Piecewise>(seg->variant()))
        throw DomainError("Piecewise profile: nested piecewise segments are not supported");
    }
    // Re-anchor: segment i starts at the end length of segment i-1.
    anchors_.resize(n);
    anchors_[0] = 0.0;  // sentinel: first segment keeps its own L0
    for (std::size_t i = 1; i < n; ++i) {
      const Real t_joint = pw->start_times[i];
      breakpoints_.push_back(t_joint);
      const WallProfile& prev = *pw->segments[i - 1];
      const Real tau = t_joint - pw->start_times[i - 1];
      anchors_[i] = std::visit(
          [&](const auto& v) -> Real {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Tabulated>) {
              return prev.spline_.value(tau);
            } else if constexpr (std::is_same_v<T, Piecewise>) {
              return 0.0;  // excluded above
            } else {
              auto local = v;
              if (i - 1 > 0) local.L0 = anchors_[i - 1];
              return closed_length(local, tau);
            }
          },
          prev.var_);
    }
  } else if (auto* tab = std::get_if<Tabulated>(&var_)) {
    if (tab->times.size() < 2) throw DomainError("Tabulated profile: need at least two samples");
    for (Eigen::Index i = 0; i < tab->lengths.size(); ++i)
      if (!(tab->lengths[i] > 0.0)) throw DomainError("Tabulated profile: all lengths must be > 0");
    spline_ = CubicSpline(tab->times, tab->lengths);
  } else if (auto* s = std::get_if<Sinusoidal>(&var_)) {
    if (!(s->L0 > 0.0)) throw DomainError("Sinusoidal profile: L0 must be > 0");
    if (!(s->omega > 0.0)) throw DomainError("Sinusoidal profile: omega must be > 0");
  } else if (auto* c = std::get_if<ConstantVelocity>(&var_)) {
    if (!(c->L0 > 0.0)) throw DomainError("ConstantVelocity profile: L0 must be > 0");
  } else if (auto* e = std::get_if<Exponential>(&var_)) {
    if (!(e->L0 > 0.0)) throw DomainError("Exponential profile: L0 must be > 0");
  }
}

namespace {

// Piecewise lookup: index of the active segment for time t (right-continuous).
std::size_t active_segment(const Piecewise& pw, Real t) {
  auto it = std::upper_bound(pw.start_times.begin(), pw.start_times.end(), t);
  if (it == pw.start_times.begin()) throw DomainError("Piecewise profile: t before first segment");
  return static_cast<std::size_t>(it - pw.start_times.begin()) - 1;
}

}  // namespace

Real length(const WallProfile& profile, Real t) {
  return std::visit(
      [&](const auto& p) -> Real {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Tabulated>) {
          return profile.spline_.value(t);
        } else if constexpr (std::is_same_v<T, Piecewise>) {
          const std::size_t i = active_segment(p, t);
          const Real tau = t - p.start_times[i];
          const WallProfile& seg = *p.segments[i];
          return std::visit(
              [&](const auto& v) -> Real {
                using S = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<S, Tabulated>)
                  return seg.spline_.value(tau);
                else if constexpr (std::is_same_v<S, Piecewise>)
                  throw DomainError("nested piecewise");
                else {
                  auto local = v;
                  if (i > 0) local.L0 = profile.anchors_[i];
                  return closed_length(local, tau);
                }
              },
              seg.variant());
        } else {
          return closed_length(p, t);
        }
      },
      profile.var_);
}

Real velocity(const WallProfile& profile, Real t) {
  return std::visit(
      [&](const auto& p) -> Real {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ConstantVelocity>) {
          return p.v;
        } else if constexpr (std::is_same_v<T, Exponential>) {
          return (p.v / p.L0) * closed_length(p, t);
        } else if constexpr (std::is_same_v<T, Sinusoidal>) {
          return p.v * p.omega * std::cos(p.omega * t);
        } else if constexpr (std::is_same_v<T, Tabulated>) {
          return profile.spline_.derivative(t);
        } else {
          const std::size_t i = active_segment(p, t);
          const Real tau = t - p.start_times[i];
          const WallProfile& seg = *p.segments[i];
          return std::visit(
              [&](const auto& v) -> Real {
                using S = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<S, Tabulated>) {
                  return seg.spline_.derivative(tau);
                } else if constexpr (std::is_same_v<S, Piecewise>) {
                  throw DomainError("nested piecewise");
                } else if constexpr (std::is_same_v<S, ConstantVelocity>) {
                  return v.v;
                } else if constexpr (std::is_same_v<S, Exponential>) {
                  auto local = v;
                  if (i > 0) local.L0 = profile.anchors_[i];
                  return (local.v / local.L0) * closed_length(local, tau);
                } else {
                  return v.v * v.omega * std::cos(v.omega * tau);
                }
              },
              seg.variant());
        }
      },
      profile.var_);
}

std::optional<ProfileViolation> validate_profile(const WallProfile& profile, Real t_end,
                                                 Real min_length) {
  if (!(t_end > 0.0)) throw DomainError("validate_profile: t_end must be > 0");
  if (min_length < 0.0) throw DomainError("validate_profile: min_length must be >= 0");

  // Candidate times beyond the dense grid: analytic extrema of the closed
  // forms (sinusoid troughs; monotone variants are covered by the grid
  // endpoints anyway).
  std::vector<Real> extra;
  if (const auto* s = std::get_if<Sinusoidal>(&profile.variant())) {
    const Real period = 2.0 * std::numbers::pi / s->omega;
    const Real first_min = (s->v >= 0.0 ? 0.75 : 0.25) * period;
    for (Real tc = first_min; tc <= t_end; tc += period) extra.push_back(tc);
  }

  const int n_grid = 10000;
  ProfileViolation worst;
  bool found = false;
  auto check = [&](Real t) {
    const Real L = length(profile, t);
    if (L <= min_length && (!found || t < worst.time)) {
      found = true;
      worst = {t, L,
               "box length " + std::to_string(L) + " <= " + std::to_string(min_length) +
                   " at t = " + std::to_string(t)};
    }
  };
  for (int i = 0; i <= n_grid; ++i) check(t_end * Real(i) / n_grid);
  for (Real t : extra) check(t);
  if (found) return worst;
  return std::nullopt;
}

}  // namespace movingbox
