#pragma once

// Box-length trajectories L(t): the closed-form motion protocols, composite
// (piecewise) schedules with continuity re-anchoring, and tabulated profiles
// interpolated by a natural cubic spline.

#include "movingbox/types.hpp"

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace movingbox {

struct ConstantVelocity {
  Real L0 = 1.0;
  Real v = 0.0;  // L(t) = L0 + v t
};

struct Exponential {
  Real L0 = 1.0;
  Real v = 0.0;  // L(t) = L0 exp(v t / L0)
};

struct Sinusoidal {
  Real L0 = 1.0;
  Real v = 0.0;      // length amplitude
  Real omega = 1.0;  // L(t) = L0 + v sin(omega t)
};

class WallProfile;

/// Ordered segments; segment i starts at start_time[i] and is re-anchored so
/// its length continues the previous segment's end length. Velocity may jump
/// at the joints.
struct Piecewise {
  std::vector<Real> start_times;
  std::vector<std::shared_ptr<const WallProfile>> segments;
};

/// Strictly increasing (t, L) samples, natural cubic spline in between.
struct Tabulated {
  VecR times;
  VecR lengths;
};

class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(const VecR& x, const VecR& y);
  Real value(Real t) const;
  Real derivative(Real t) const;
  Real t_min() const { return x_.size() ? x_[0] : 0.0; }
  Real t_max() const { return x_.size() ? x_[x_.size() - 1] : 0.0; }

 private:
  Eigen::Index segment(Real t) const;
  VecR x_, y_, m_;  // m_ holds second derivatives at the knots
};

class WallProfile {
 public:
  using Variant = std::variant<ConstantVelocity, Exponential, Sinusoidal, Piecewise, Tabulated>;

  WallProfile(ConstantVelocity p) : var_(p) { init(); }
  WallProfile(Exponential p) : var_(p) { init(); }
  WallProfile(Sinusoidal p) : var_(p) { init(); }
  WallProfile(Piecewise p) : var_(std::move(p)) { init(); }
  WallProfile(Tabulated p) : var_(std::move(p)) { init(); }

  const Variant& variant() const { return var_; }

  /// Times where the velocity may jump (piecewise joints); the integrator
  /// lands on these exactly.
  const std::vector<Real>& breakpoints() const { return breakpoints_; }

 private:
  void init();
  friend Real length(const WallProfile&, Real);
  friend Real velocity(const WallProfile&, Real);

  Variant var_;
  std::vector<Real> breakpoints_;
  std::vector<Real> anchors_;  // piecewise: re-anchored L0 per segment
  CubicSpline spline_;         // tabulated only
};

Real length(const WallProfile& profile, Real t);
Real velocity(const WallProfile& profile, Real t);

struct ProfileViolation {
  Real time = 0.0;
  Real length = 0.0;
  std::string message;
};

/// Samples L(t) on a dense grid (>= 10^4 points) plus the analytic extrema of
/// the closed-form variants; reports the first time L(t) <= min_length.
std::optional<ProfileViolation> validate_profile(const WallProfile& profile, Real t_end,
                                                 Real min_length = 0.0);

}  // namespace movingbox
