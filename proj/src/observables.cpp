#include "movingbox/observables.hpp"

#include <cmath>

#include <numbers>

namespace movingbox {

namespace {
constexpr Real kPi = std::numbers::pi;
}

VecC dressed_coefficients(const CoefficientState& state, const PhysicalConstants& pc) {
  const Eigen::Index n = state.C.size();
  const EigenData eigen = EigenData::build(static_cast<int>(n), pc);
  VecC dressed(n);
  for (Eigen::Index i = 0; i < n; ++i)
    dressed[i] = state.C[i] * std::polar(1.0, -eigen.level_constants[i] / pc.hbar * state.theta);
  return dressed;
}

Complex reconstruct_wavefunction(const CoefficientState& state, Real L, Real x,
                                 const PhysicalConstants& pc) {
  if (x < 0.0 || x > L) throw DomainError("reconstruct_wavefunction: x outside the box");
  const VecC dressed = dressed_coefficients(state, pc);
  const Real scale = std::sqrt(2.0 / L);
  Complex psi = 0.0;
  for (Eigen::Index i = 0; i < dressed.size(); ++i)
    psi += dressed[i] * scale * std::sin(Real(i + 1) * kPi * x / L);
  return psi;
}

VecR populations(const CoefficientState& state) { return state.C.cwiseAbs2(); }

Real kinetic_energy(const CoefficientState& state, Real L, const PhysicalConstants& pc) {
  if (!(L > 0.0)) throw DomainError("kinetic_energy: L must be > 0");
  const Eigen::Index n = state.C.size();
  const EigenData eigen = EigenData::build(static_cast<int>(n), pc);
  return state.C.cwiseAbs2().dot(eigen.level_constants) / (L * L);
}

Real position_expectation(const CoefficientState& state, Real L, const PhysicalConstants& pc) {
  if (!(L > 0.0)) throw DomainError("position_expectation: L must be > 0");
  const VecC dressed = dressed_coefficients(state, pc);
  const int n = static_cast<int>(dressed.size());
  // x matrix: diagonal L/2; off-diagonal nonzero only for odd k+n.
  Real acc = 0.5 * L * dressed.squaredNorm();
  for (int k = 1; k <= n; ++k) {
    for (int m = k + 1; m <= n; ++m) {
      if ((k + m) % 2 == 0) continue;
      const Real x_km = position_matrix_element(k, m, L);
      acc += 2.0 * x_km * (std::conj(dressed[k - 1]) * dressed[m - 1]).real();
    }
  }
  return acc;
}

Real momentum_expectation(const CoefficientState& state, Real L, const PhysicalConstants& pc) {
  if (!(L > 0.0)) throw DomainError("momentum_expectation: L must be > 0");
  const VecC dressed = dressed_coefficients(state, pc);
  const int n = static_cast<int>(dressed.size());
  // p matrix is anti-symmetric pure-imaginary: p_km = i g_km, so
  // <p> = sum_{k<m} 2 g_km Im(conj(c_k) c_m) ... with g_km real.
  Real acc = 0.0;
  for (int k = 1; k <= n; ++k) {
    for (int m = k + 1; m <= n; ++m) {
      if ((k + m) % 2 == 0) continue;
      const Real g = -4.0 * pc.hbar * Real(k) * Real(m) / (L * (Real(k) * k - Real(m) * m));
      acc += -2.0 * g * (std::conj(dressed[k - 1]) * dressed[m - 1]).imag();
    }
  }
  return acc;
}

ObservableSample observe(const CoefficientState& state, Real L, int n_report,
                         const PhysicalConstants& pc) {
  ObservableSample s;
  s.t = state.t;
  s.L = L;
  const VecR pops = populations(state);
  const int m = (n_report > 0) ? std::min<int>(n_report, static_cast<int>(pops.size()))
                               : static_cast<int>(pops.size());
  s.populations = pops.head(m);
  s.norm = pops.sum();
  s.x_mean = position_expectation(state, L, pc);
  s.p_mean = momentum_expectation(state, L, pc);
  s.kinetic = kinetic_energy(state, L, pc);
  return s;
}

Real DensityMap::row_norm(Eigen::Index row) const {
  const Eigen::Index m = coords.size();
  Real acc = 0.0;
  for (Eigen::Index j = 0; j + 1 < m; ++j)
    acc += 0.5 * (values(row, j) + values(row, j + 1)) * (coords[j + 1] - coords[j]);
  if (coordinate == DensityCoordinate::Fractional) acc *= lengths[row];
  return acc;
}

DensityMap density_map(const Trajectory& trajectory, const WallProfile& profile, int n_x,
                       DensityCoordinate coordinate, const PhysicalConstants& pc) {
  if (n_x < 16) throw DomainError("density_map: need n_x >= 16");
  const Eigen::Index rows = static_cast<Eigen::Index>(trajectory.samples.size());
  if (rows == 0) throw DomainError("density_map: empty trajectory");

  DensityMap map;
  map.coordinate = coordinate;
  map.times.resize(rows);
  map.lengths.resize(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    map.times[i] = trajectory.samples[i].t;
    map.lengths[i] = length(profile, map.times[i]);
  }

  const Real coord_max =
      (coordinate == DensityCoordinate::Fractional) ? 1.0 : map.lengths.maxCoeff();
  map.coords = VecR::LinSpaced(n_x, 0.0, coord_max);
  map.values.resize(rows, n_x);

  for (Eigen::Index i = 0; i < rows; ++i) {
    const Real L = map.lengths[i];
    const VecC dressed = dressed_coefficients(trajectory.samples[i], pc);
    for (Eigen::Index j = 0; j < n_x; ++j) {
      const Real x = (coordinate == DensityCoordinate::Fractional) ? map.coords[j] * L
                                                                   : map.coords[j];
      if (x > L) {
        map.values(i, j) = 0.0;
        continue;
      }
      Complex psi = 0.0;
      for (Eigen::Index k = 0; k < dressed.size(); ++k)
        psi += dressed[k] * std::sin(Real(k + 1) * kPi * x / L);
      map.values(i, j) = std::norm(psi) * (2.0 / L);
    }
  }
  return map;
}

int interior_minima(const DensityMap& map, Eigen::Index row) {
  int count = 0;
  const Eigen::Index m = map.coords.size();
  for (Eigen::Index j = 1; j + 1 < m; ++j) {
    // Only minima inside the instantaneous box count.
    if (map.coordinate == DensityCoordinate::Absolute && map.coords[j] >= map.lengths[row])
      break;
    if (map.values(row, j) < map.values(row, j - 1) && map.values(row, j) < map.values(row, j + 1))
      ++count;
  }
  return count;
}

}  // namespace movingbox
