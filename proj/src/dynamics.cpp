#include "movingbox/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace movingbox {

CouplingMatrix build_coupling(int n_basis) {
  if (n_basis < 2) throw DomainError("build_coupling: n_basis must be >= 2");
  CouplingMatrix cm;
  cm.A = MatR::Zero(n_basis, n_basis);
  for (int k = 1; k <= n_basis; ++k) {
    for (int n = 1; n <= n_basis; ++n) {
      if (n == k) continue;
      const Real sign = ((k + n) % 2 == 0) ? 1.0 : -1.0;
      cm.A(k - 1, n - 1) = 2.0 * sign * Real(k) * Real(n) / (Real(n) * n - Real(k) * k);
    }
  }
  return cm;
}

PhaseConstants build_phase_constants(int n_basis, const PhysicalConstants& pc) {
  const EigenData eigen = EigenData::build(n_basis, pc);
  PhaseConstants w;
  w.level_rates = eigen.phase_rates();
  w.W.resize(n_basis, n_basis);
  for (int k = 0; k < n_basis; ++k)
    for (int n = 0; n < n_basis; ++n) w.W(k, n) = w.level_rates[n] - w.level_rates[k];
  return w;
}

CoefficientState CoefficientState::ground_state(int n_basis, int level) {
  if (level < 1 || level > n_basis)
    throw DomainError("CoefficientState: level out of range");
  CoefficientState s;
  s.C = VecC::Zero(n_basis);
  s.C[level - 1] = 1.0;
  return s;
}

void IntegratorConfig::validate(Real t_end) const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
    throw DomainError("IntegratorConfig: tolerances must be > 0");
  if (!std::is_sorted(sample_times.begin(), sample_times.end()))
    throw DomainError("IntegratorConfig: sample_times must be sorted");
  if (!sample_times.empty() &&
      (sample_times.front() < 0.0 || sample_times.back() > t_end))
    throw DomainError("IntegratorConfig: sample_times must lie within [0, t_end]");
}

namespace {

// RHS over the packed state y = [C_1..C_N, theta]. Scratch buffers live here
// so the hot loop never allocates.
class WallSystem {
 public:
  WallSystem(const WallProfile& profile, const CouplingMatrix& A, const VecR& level_rates)
      : profile_(profile), A_(A.A), rates_(level_rates) {
    const Eigen::Index n = rates_.size();
    if (A_.rows() != n || A_.cols() != n)
      throw DomainError("WallSystem: coupling/phase size mismatch");
    q_.resize(n);
    w_re_.resize(n);
    w_im_.resize(n);
    aw_re_.resize(n);
    aw_im_.resize(n);
  }

  void operator()(Real t, const VecC& y, VecC& dy) const {
    const Eigen::Index n = rates_.size();
    const Real L = length(profile_, t);
    if (!(L > 0.0))
      throw NumericalError("singular box length L = " + std::to_string(L) +
                           " at t = " + std::to_string(t));
    const Real Ldot = velocity(profile_, t);
    const Real theta = y[n].real();
    dy.resize(n + 1);
    dy[n] = Complex(1.0 / (L * L), 0.0);

    if (Ldot == 0.0) {  // stationary wall: the coefficient block is exactly frozen
      dy.head(n).setZero();
      return;
    }

    // w = q .* C with q_n = exp(-i e_n theta / hbar); then
    // dC = (Ldot/L) * conj(q) .* (A w), done as two real mat-vecs.
    for (Eigen::Index i = 0; i < n; ++i) {
      q_[i] = std::polar(1.0, -rates_[i] * theta);
      const Complex w = q_[i] * y[i];
      w_re_[i] = w.real();
      w_im_[i] = w.imag();
    }
    aw_re_.noalias() = A_ * w_re_;
    aw_im_.noalias() = A_ * w_im_;
    const Real pref = Ldot / L;
    for (Eigen::Index i = 0; i < n; ++i)
      dy[i] = pref * std::conj(q_[i]) * Complex(aw_re_[i], aw_im_[i]);
  }

 private:
  const WallProfile& profile_;
  const MatR& A_;
  const VecR& rates_;
  mutable VecC q_;
  mutable VecR w_re_, w_im_, aw_re_, aw_im_;
};

VecC pack(const CoefficientState& s) {
  VecC y(s.C.size() + 1);
  y.head(s.C.size()) = s.C;
  y[s.C.size()] = Complex(s.theta, 0.0);
  return y;
}

void check_initial(const CoefficientState& initial) {
  if (initial.C.size() < 2) throw DomainError("integrate: need at least two basis states");
  if (std::abs(initial.norm_sq() - 1.0) > 1e-12)
    throw DomainError("integrate: initial coefficients must be normalized to 1e-12");
}

}  // namespace

void rhs(const CoefficientState& state, const WallProfile& profile, const CouplingMatrix& A,
         const PhaseConstants& W, VecC& dC, Real& dtheta) {
  WallSystem sys(profile, A, W.level_rates);
  const VecC y = pack(state);
  VecC dy(y.size());
  sys(state.t, y, dy);
  dC = dy.head(state.C.size());
  dtheta = dy[state.C.size()].real();
}

Trajectory integrate(const CoefficientState& initial, const WallProfile& profile,
                     const IntegratorConfig& config, Real t_end, const PhysicalConstants& pc) {
  check_initial(initial);
  config.validate(t_end);

  Trajectory traj;
  traj.stats = integrate_observed(initial, profile, config, t_end,
                                  [&](Real t, const VecC& C, Real theta) {
                                    CoefficientState s;
                                    s.t = t;
                                    s.C = C;
                                    s.theta = theta;
                                    traj.norm_drift.push_back(std::abs(s.norm_sq() - 1.0));
                                    traj.samples.push_back(std::move(s));
                                  },
                                  pc);
  return traj;
}

IntegrationStats integrate_observed(
    const CoefficientState& initial, const WallProfile& profile, const IntegratorConfig& config,
    Real t_end, const std::function<void(Real t, const VecC& C, Real theta)>& observer,
    const PhysicalConstants& pc) {
  check_initial(initial);
  config.validate(t_end);
  if (!(t_end > initial.t)) throw DomainError("integrate: t_end must exceed the initial time");

  const Eigen::Index n = initial.C.size();
  const auto coupling = build_coupling(static_cast<int>(n));
  const auto phases = build_phase_constants(static_cast<int>(n), pc);
  WallSystem sys(profile, coupling, phases.level_rates);

  std::vector<Real> samples = config.sample_times;
  if (samples.empty()) samples = {initial.t, t_end};

  Dopri5Options opt;
  opt.rel_tol = config.rel_tol;
  opt.abs_tol = config.abs_tol;
  opt.initial_step = config.initial_step;
  opt.max_step = config.max_step;

  VecC y = pack(initial);
  const auto raw = dopri5_integrate(
      [&sys](Real t, const VecC& yy, VecC& dy) { sys(t, yy, dy); }, initial.t, t_end, y, opt,
      samples,
      [&](Real t, const VecC& yy) {
        if (observer) observer(t, yy.head(n), yy[n].real());
      },
      profile.breakpoints());

  IntegrationStats stats;
  stats.accepted = raw.accepted;
  stats.rejected = raw.rejected;
  stats.rhs_evals = raw.rhs_evals;
  return stats;
}

Real richardson_norm_check(const Trajectory& trajectory) {
  if (trajectory.samples.empty())
    throw DomainError("richardson_norm_check: empty trajectory");
  Real worst = 0.0;
  for (const auto& d : trajectory.norm_drift) worst = std::max(worst, d);
  return worst;
}

}  // namespace movingbox
