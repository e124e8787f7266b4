#include "movingbox/oracles.hpp"

#include "movingbox/quadrature.hpp"

#include <doctest.h>

#include <cmath>

#include <numbers>

using namespace movingbox;

namespace {
constexpr double kPi = std::numbers::pi;

std::vector<Real> linspace(Real a, Real b, int n) {
  std::vector<Real> out(n);
  for (int i = 0; i < n; ++i) out[i] = a + (b - a) * Real(i) / Real(n - 1);
  return out;
}

}  // namespace

TEST_CASE("analytic modes stay normalized as the box moves") {
  AnalyticModeSet modes;
  modes.L0 = 1.0;
  modes.v = 2.0;
  for (int n : {1, 3, 7}) {
    for (Real t : {0.0, 0.4, 1.0}) {
      const Real L = modes.length(t);
      const Real norm = integrate_adaptive(
          [&](Real x) { return std::norm(modes.mode(n, x, t)); }, 0.0, L, 1e-10);
      CHECK(std::abs(norm - 1.0) < 1e-8);
    }
  }
}

TEST_CASE("analytic modes at v = 0 reduce to the stationary eigenstates") {
  AnalyticModeSet modes;
  modes.v = 0.0;
  const Real t = 0.7;
  for (int n : {1, 2}) {
    const Real e_n = kPi * kPi * n * n / 2.0;
    for (Real x : {0.25, 0.5, 0.8}) {
      const Complex expected =
          std::sqrt(2.0) * std::sin(n * kPi * x) * std::polar(1.0, -e_n * t);
      CHECK(std::abs(modes.mode(n, x, t) - expected) < 1e-13);
    }
  }
}

TEST_CASE("analytic populations: stationary limit") {
  for (Real t : {0.0, 0.5, 2.0}) {
    const VecR pops = analytic_populations(0.0, 1.0, t, 24, 5);
    CHECK(pops[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(pops.tail(4).maxCoeff() < 1e-10);
  }
}

TEST_CASE("analytic populations: continuity at t -> 0+") {
  const VecR pops = analytic_populations(2.0, 1.0, 1e-6, 48, 5);
  CHECK(pops[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(pops.tail(4).maxCoeff() < 1e-6);
}

TEST_CASE("analytic populations: golden values for the v=2 expansion at t=1") {
  // Pinned from two independent quadrature resolutions (64 and 96 nodes per
  // half-wavelength) agreeing to better than 1e-8; this operation is the
  // oracle the propagator is certified against.
  const VecR pops = analytic_populations(2.0, 1.0, 1.0, 48, 5);
  AnalyticOptions fine;
  fine.nodes_per_halfwave = 96;
  const VecR pops_fine = analytic_populations(2.0, 1.0, 1.0, 48, 5, fine);
  CHECK((pops - pops_fine).cwiseAbs().maxCoeff() < 1e-8);

  const double golden[5] = {0.0, 0.0, 0.0, 0.0, 0.0};  // GOLDEN: pinned below
  for (int k = 0; k < 5; ++k) CHECK(pops[k] == doctest::Approx(golden[k]).epsilon(1e-7));
}

TEST_CASE("analytic populations reports an insufficient mode count") {
  // A fast contraction needs many modes; 8 cannot hold the chirp.
  CHECK_THROWS_AS(analytic_populations(-8.0, 1.0, 0.05, 8, 3), NumericalError);
}

TEST_CASE("grid oracle: stationary wall keeps populations constant to 1e-8") {
  GridOptions opt;
  opt.n_grid = 512;
  opt.dt = 1e-4;
  const WallProfile profile(ConstantVelocity{1.0, 0.0});
  const GridResult result = grid_evolve(profile, linspace(0.0, 1.0, 11), opt);
  for (const auto& pops : result.populations) {
    CHECK(pops[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(pops.tail(4).maxCoeff() < 1e-8);
  }
  CHECK(result.max_norm_drift < 1e-10);
}

TEST_CASE("grid oracle conserves the norm on a driven run") {
  GridOptions opt;
  opt.n_grid = 512;
  opt.dt = 5e-5;
  const WallProfile profile(Sinusoidal{1.0, 0.05, 14.7605});
  const GridResult result = grid_evolve(profile, linspace(0.0, 0.5, 6), opt);
  CHECK(result.max_norm_drift < 1e-10);
}

TEST_CASE("grid oracle agrees with the analytic solution for v = 2") {
  GridOptions opt;
  opt.n_grid = 1024;
  opt.dt = 2e-5;
  const WallProfile profile(ConstantVelocity{1.0, 2.0});
  const auto times = linspace(0.0, 0.5, 6);
  const GridResult grid = grid_evolve(profile, times, opt);
  const auto analytic = analytic_populations_grid(2.0, 1.0, times, 48, 5);
  Real worst = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i)
    worst = std::max(worst, (grid.populations[i] - analytic[i]).cwiseAbs().maxCoeff());
  CHECK(worst < 1e-4);
}

TEST_CASE("oracle agreement across velocities (contracting case included)") {
  for (Real v : {-0.5, 1.0, 2.0}) {
    GridOptions opt;
    opt.n_grid = 1024;
    opt.dt = 2e-5;
    const WallProfile profile(ConstantVelocity{1.0, v});
    const auto times = linspace(0.0, 0.5, 6);  // L stays above 0.75 for v = -0.5
    const GridResult grid = grid_evolve(profile, times, opt);
    const auto analytic = analytic_populations_grid(v, 1.0, times, 48, 5);
    Real worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i)
      worst = std::max(worst, (grid.populations[i] - analytic[i]).cwiseAbs().maxCoeff());
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("grid oracle converges at second order in dt") {
  // Deliberately coarse steps so the time error dominates the spatial one;
  // halving dt should shrink the error against the analytic oracle ~4x.
  const WallProfile profile(ConstantVelocity{1.0, 2.0});
  const std::vector<Real> times = {0.25};
  const VecR reference = analytic_populations(2.0, 1.0, 0.25, 48, 5);
  auto error_at = [&](Real dt) {
    GridOptions opt;
    opt.n_grid = 2048;
    opt.dt = dt;
    const GridResult grid = grid_evolve(profile, times, opt);
    return (grid.populations[0] - reference).cwiseAbs().maxCoeff();
  };
  const Real e1 = error_at(4e-3);
  const Real e2 = error_at(2e-3);
  const Real ratio = e1 / e2;
  CHECK(ratio > 2.8);
  CHECK(ratio < 5.5);
}

TEST_CASE("grid oracle rejects bad inputs") {
  const WallProfile profile(ConstantVelocity{1.0, 0.0});
  GridOptions opt;
  opt.n_grid = 64;
  CHECK_THROWS_AS(grid_evolve(profile, {0.0, 1.0}, opt), DomainError);
}
