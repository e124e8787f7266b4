#include "movingbox/oracles.hpp"

#include "movingbox/quadrature.hpp"

#include <cmath>

#include <numbers>

namespace movingbox {

namespace {
constexpr Real kPi = std::numbers::pi;

// Sine table on a shared quadrature grid: S(n-1, i) = sin(n pi x_i / L).
MatR sine_table(const VecR& nodes, Real L, int n_max) {
  MatR s(n_max, nodes.size());
  for (int n = 1; n <= n_max; ++n)
    for (Eigen::Index i = 0; i < nodes.size(); ++i)
      s(n - 1, i) = std::sin(Real(n) * kPi * nodes[i] / L);
  return s;
}

}  // namespace

Complex AnalyticModeSet::mode(int n, Real x, Real t) const {
  const Real L = length(t);
  if (!(L > 0.0)) throw DomainError("AnalyticModeSet: box length not positive at t");
  if (x < 0.0 || x > L) throw DomainError("AnalyticModeSet: x outside the box");
  const Real e_n = constants.hbar * constants.hbar * kPi * kPi * Real(n) * Real(n) /
                   (2.0 * constants.mass);
  const Real phase = constants.mass * v * x * x / (2.0 * constants.hbar * L) -
                     e_n * theta_lin(t) / constants.hbar;
  return std::sqrt(2.0 / L) * std::sin(Real(n) * kPi * x / L) * std::polar(1.0, phase);
}

namespace {

// Expansion of the t = 0 ground state on the analytic modes:
// b_n = <Phi_n(., 0) | u_1(.; L0)>.
VecC initial_mode_coefficients(const AnalyticModeSet& modes, const AnalyticOptions& opt) {
  const int nm = modes.mode_count;
  // One panel per half-wavelength of the highest mode.
  VecR x, w;
  composite_grid(0.0, modes.L0, std::max(nm, 1),
                 std::max(opt.points_per_panel, opt.nodes_per_halfwave), x, w);

  const MatR sines = sine_table(x, modes.L0, nm);
  const Real beta = modes.constants.mass * modes.v / (2.0 * modes.constants.hbar * modes.L0);
  VecC kernel(x.size());  // conj(chirp) * u_1 * weight
  for (Eigen::Index i = 0; i < x.size(); ++i)
    kernel[i] = w[i] * std::polar(1.0, -beta * x[i] * x[i]) * sines(0, i);

  VecC b(nm);
  for (int n = 1; n <= nm; ++n) {
    Complex acc = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) acc += kernel[i] * sines(n - 1, i);
    b[n - 1] = (2.0 / modes.L0) * acc;
  }
  return b;
}

VecR populations_at(const AnalyticModeSet& modes, const VecC& b, Real t, int n_report,
                    const AnalyticOptions& opt) {
  const int nm = modes.mode_count;
  const Real L = modes.length(t);
  if (!(L > 0.0)) throw DomainError("analytic_populations: L(t) must be > 0");

  VecR x, w;
  composite_grid(0.0, L, std::max(nm, 1), std::max(opt.points_per_panel, opt.nodes_per_halfwave),
                 x, w);
  const MatR sines = sine_table(x, L, std::max(nm, n_report));

  // g(x) = sum_n b_n exp(-i e_n theta_lin / hbar) sin(n pi x / L)
  const Real theta = modes.theta_lin(t);
  const Real hbar = modes.constants.hbar;
  const Real e1 = hbar * hbar * kPi * kPi / (2.0 * modes.constants.mass);
  VecC g = VecC::Zero(x.size());
  for (int n = 1; n <= nm; ++n) {
    const Complex d = b[n - 1] * std::polar(1.0, -e1 * Real(n) * Real(n) * theta / hbar);
    for (Eigen::Index i = 0; i < x.size(); ++i) g[i] += d * sines(n - 1, i);
  }
  // Fold in chirp and weights, then project on the instantaneous eigenstates.
  const Real beta = modes.constants.mass * modes.v / (2.0 * hbar * L);
  for (Eigen::Index i = 0; i < x.size(); ++i)
    g[i] *= w[i] * std::polar(1.0, beta * x[i] * x[i]);

  VecR pops(n_report);
  for (int k = 1; k <= n_report; ++k) {
    Complex amp = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) amp += g[i] * sines(k - 1, i);
    amp *= 2.0 / L;
    pops[k - 1] = std::norm(amp);
  }
  return pops;
}

}  // namespace

VecR analytic_populations(Real v, Real L0, Real t, int n_modes, int n_report,
                          const AnalyticOptions& opt, const PhysicalConstants& pc) {
  return analytic_populations_grid(v, L0, {t}, n_modes, n_report, opt, pc).front();
}

std::vector<VecR> analytic_populations_grid(Real v, Real L0, const std::vector<Real>& times,
                                            int n_modes, int n_report,
                                            const AnalyticOptions& opt,
                                            const PhysicalConstants& pc) {
  if (n_modes < 1 || n_report < 1)
    throw DomainError("analytic_populations: n_modes and n_report must be >= 1");
  if (!(L0 > 0.0)) throw DomainError("analytic_populations: L0 must be > 0");
  AnalyticModeSet modes;
  modes.L0 = L0;
  modes.v = v;
  modes.mode_count = n_modes;
  modes.constants = pc;

  const VecC b = initial_mode_coefficients(modes, opt);
  const Real deficit = 1.0 - b.squaredNorm();
  if (deficit > 1e-8)
    throw NumericalError("analytic_populations: mode_count " + std::to_string(n_modes) +
                         " insufficient, completeness deficit " + std::to_string(deficit));

  std::vector<VecR> out;
  out.reserve(times.size());
  for (Real t : times) out.push_back(populations_at(modes, b, t, n_report, opt));
  return out;
}

GridResult grid_evolve(const WallProfile& profile, const std::vector<Real>& sample_times,
                       const GridOptions& opt, const PhysicalConstants& pc) {
  if (opt.n_grid < 256) throw DomainError("grid_evolve: need n_grid >= 256");
  if (!(opt.dt > 0.0)) throw DomainError("grid_evolve: dt must be > 0");
  if (sample_times.empty()) throw DomainError("grid_evolve: no sample times");
  for (std::size_t i = 1; i < sample_times.size(); ++i)
    if (!(sample_times[i] > sample_times[i - 1]))
      throw DomainError("grid_evolve: sample times must be strictly increasing");
  if (sample_times.front() < 0.0) throw DomainError("grid_evolve: sample times must be >= 0");

  const int M = opt.n_grid;
  const Eigen::Index n = M - 1;  // interior points
  const Real dy = 1.0 / M;

  // phi(y, 0) = sqrt(2) sin(pi y): the ground state in fractional coordinates.
  VecC phi(n);
  for (Eigen::Index j = 0; j < n; ++j)
    phi[j] = std::sqrt(2.0) * std::sin(kPi * dy * Real(j + 1));
  // Normalize the discrete norm exactly (dy * sum |phi|^2 = 1).
  phi /= std::sqrt(dy * phi.squaredNorm());

  // Projection table for populations.
  const int n_report = opt.n_report;
  MatR proj(n_report, n);
  for (int k = 1; k <= n_report; ++k)
    for (Eigen::Index j = 0; j < n; ++j)
      proj(k - 1, j) = std::sqrt(2.0) * std::sin(Real(k) * kPi * dy * Real(j + 1));

  GridResult result;
  result.times = sample_times;
  result.populations.reserve(sample_times.size());

  auto record = [&]() {
    VecR pops(n_report);
    for (int k = 0; k < n_report; ++k) {
      Complex amp = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) amp += proj(k, j) * phi[j];
      pops[k] = std::norm(amp * dy);
    }
    result.populations.push_back(pops);
    result.max_norm_drift =
        std::max(result.max_norm_drift, std::abs(dy * phi.squaredNorm() - 1.0));
    if (result.max_norm_drift > opt.norm_tol)
      throw NumericalError("grid_evolve: norm drift " + std::to_string(result.max_norm_drift) +
                           " exceeds " + std::to_string(opt.norm_tol));
  };

  // Crank-Nicolson sweep: (I - (dt/2) G) phi' = (I + (dt/2) G) phi with G
  // evaluated at the step midpoint. G is tridiagonal; sub/sup hold the
  // off-diagonals, rhs the explicit half.
  VecC diag(n), sub(n), sup(n), rhs(n), phi_new(n);
  const Real hbar = pc.hbar, mass = pc.mass;

  auto step_to = [&](Real t_from, Real t_to) {
    const Real h = t_to - t_from;
    const Real tm = 0.5 * (t_from + t_to);
    const Real L = length(profile, tm);
    if (!(L > 0.0)) throw NumericalError("grid_evolve: singular box length");
    const Real Ldot = velocity(profile, tm);
    const Complex ikin(0.0, hbar / (2.0 * mass * L * L));  // i hbar/(2 m L^2)
    const Real conv = Ldot / L;

    // G phi = ikin * D2 phi + conv * K phi, K = (Y D1 + D1 Y)/2.
    const Complex g_diag = ikin * (-2.0 / (dy * dy));
    for (Eigen::Index j = 0; j < n; ++j) {
      const Real y = dy * Real(j + 1);
      const Real k_up = (2.0 * y + dy) / (4.0 * dy);    // couples to j+1
      const Real k_dn = -(2.0 * y - dy) / (4.0 * dy);   // couples to j-1
      const Complex g_up = ikin / (dy * dy) + conv * k_up;
      const Complex g_dn = ikin / (dy * dy) + conv * k_dn;
      diag[j] = 1.0 - 0.5 * h * g_diag;
      sup[j] = -0.5 * h * g_up;
      sub[j] = -0.5 * h * g_dn;
      // Explicit half.
      Complex acc = (1.0 + 0.5 * h * g_diag) * phi[j];
      if (j + 1 < n) acc += 0.5 * h * g_up * phi[j + 1];
      if (j > 0) acc += 0.5 * h * g_dn * phi[j - 1];
      rhs[j] = acc;
    }
    // Thomas solve.
    for (Eigen::Index j = 1; j < n; ++j) {
      const Complex wfac = sub[j] / diag[j - 1];
      diag[j] -= wfac * sup[j - 1];
      rhs[j] -= wfac * rhs[j - 1];
    }
    phi_new[n - 1] = rhs[n - 1] / diag[n - 1];
    for (Eigen::Index j = n - 2; j >= 0; --j)
      phi_new[j] = (rhs[j] - sup[j] * phi_new[j + 1]) / diag[j];
    phi.swap(phi_new);
  };

  Real t = 0.0;
  for (Real target : sample_times) {
    if (target == 0.0) {
      record();
      continue;
    }
    const long n_sub = std::max<long>(1, std::lround(std::ceil((target - t) / opt.dt)));
    const Real h = (target - t) / Real(n_sub);
    for (long s = 0; s < n_sub; ++s) step_to(t + s * h, t + (s + 1) * h);
    t = target;
    record();
  }
  return result;
}

}  // namespace movingbox
