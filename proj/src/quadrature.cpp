#include "movingbox/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include <numbers>

namespace movingbox {

namespace {

GaussRule make_rule(int n) {
  if (n < 1) throw DomainError("gauss_legendre: need n >= 1 points");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Chebyshev-based initial guess for the i-th positive root of P_n.
    Real x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    Real dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      // Recurrence for P_n(x) and P'_n(x).
      Real p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const Real p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const Real dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const Real w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static std::mutex mtx;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_rule(n)).first;
  return it->second;
}

void composite_grid(Real a, Real b, int panels, int points, VecR& nodes, VecR& weights) {
  if (panels < 1) throw DomainError("composite_grid: need panels >= 1");
  const GaussRule& rule = gauss_legendre(points);
  const Real h = (b - a) / panels;
  nodes.resize(static_cast<Eigen::Index>(panels) * points);
  weights.resize(nodes.size());
  Eigen::Index idx = 0;
  for (int p = 0; p < panels; ++p) {
    const Real lo = a + p * h;
    const Real mid = lo + 0.5 * h;
    for (int i = 0; i < points; ++i, ++idx) {
      nodes[idx] = mid + 0.5 * h * rule.nodes[i];
      weights[idx] = 0.5 * h * rule.weights[i];
    }
  }
}

}  // namespace movingbox
