#pragma once

// Gauss-Legendre quadrature: cached rules on [-1,1], composite panels, and a
// panel-doubling driver for smooth integrands.

#include "movingbox/types.hpp"

#include <functional>
#include <vector>

namespace movingbox {

struct GaussRule {
  VecR nodes;    // on [-1, 1]
  VecR weights;  // sum to 2
};

/// n-point Gauss-Legendre rule (Newton iteration on Legendre polynomials);
/// cached per n, thread-safe.
const GaussRule& gauss_legendre(int n);

/// Nodes/weights of a composite rule: `panels` equal panels over [a,b],
/// `points` Gauss nodes per panel.
void composite_grid(Real a, Real b, int panels, int points, VecR& nodes, VecR& weights);

template <typename F>
auto integrate_composite(F&& f, Real a, Real b, int panels, int points)
    -> decltype(f(Real{})) {
  VecR x, w;
  composite_grid(a, b, panels, points, x, w);
  decltype(f(Real{})) acc{};
  for (Eigen::Index i = 0; i < x.size(); ++i) acc += w[i] * f(x[i]);
  return acc;
}

/// Panel-doubling quadrature for smooth integrands: doubles the panel count
/// until two successive composite results agree to tol (absolute +
/// relative). Throws NumericalError if tol is not reached.
template <typename F>
auto integrate_adaptive(F&& f, Real a, Real b, Real tol = 1e-12, int points = 16,
                        int max_panels = 1 << 14) -> decltype(f(Real{})) {
  auto prev = integrate_composite(f, a, b, 1, points);
  for (int panels = 2; panels <= max_panels; panels *= 2) {
    auto cur = integrate_composite(f, a, b, panels, points);
    if (std::abs(cur - prev) <= tol * (1.0 + std::abs(cur))) return cur;
    prev = cur;
  }
  throw NumericalError("integrate_adaptive: tolerance not reached");
}

}  // namespace movingbox
