// Copyright 2026 The qrnme Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qrnme/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qrnme/errors.hpp"

namespace qrnme::dynamics {

using linalg::adjoint;
using linalg::anticommutator;
using linalg::commutator;
using linalg::kron;
using linalg::matmul;

namespace ops {
CMatrix sigma_x() { return CMatrix{{0.0, 1.0}, {1.0, 0.0}}; }
CMatrix sigma_y() { return CMatrix{{0.0, Complex{0.0, -1.0}}, {Complex{0.0, 1.0}, 0.0}}; }
CMatrix sigma_z() { return CMatrix{{1.0, 0.0}, {0.0, -1.0}}; }
CMatrix sigma_plus() { return CMatrix{{0.0, 1.0}, {0.0, 0.0}}; }
CMatrix sigma_minus() { return CMatrix{{0.0, 0.0}, {1.0, 0.0}}; }
}  // namespace ops

bool StateDiagnostics::ok(const Tolerances& tol) const {
  return hermiticity_defect <= tol.hermiticity && trace_error <= tol.trace &&
         min_eigenvalue >= tol.min_eigenvalue;
}

StateDiagnostics diagnose_state(const CMatrix& rho) {
  if (!rho.is_square()) throw DimensionError("diagnose_state: matrix is not square");
  StateDiagnostics d;
  d.hermiticity_defect = linalg::hermiticity_defect(rho);
  d.trace_error = std::abs(linalg::trace(rho) - Complex{1.0, 0.0});
  // Eigenvalues of the Hermitian part; the defect is reported separately.
  const CMatrix herm = (rho + adjoint(rho)) * Complex{0.5, 0.0};
  d.min_eigenvalue = linalg::herm_eigenvalues(herm).front();
  return d;
}

DensityMatrix::DensityMatrix(CMatrix mat, const Tolerances& tol) : mat_(std::move(mat)) {
  const StateDiagnostics d = diagnose_state(mat_);
  if (!d.ok(tol)) {
    std::ostringstream msg;
    msg << "invalid density matrix: hermiticity defect " << d.hermiticity_defect
        << ", trace error " << d.trace_error << ", min eigenvalue " << d.min_eigenvalue;
    throw InvariantError(msg.str());
  }
}

DensityMatrix DensityMatrix::unchecked(CMatrix mat) {
  return DensityMatrix(std::move(mat), NoCheck{});
}

double decay_rate(double t, const DecayParams& p) {
  if (t < 0.0) throw std::invalid_argument("decay_rate: t must be non-negative");
  if (!(p.gamma0 > 0.0) || !(p.lambda > 0.0)) {
    throw std::invalid_argument("decay_rate: gamma0 and lambda must be positive");
  }
  const double eta_sq = p.eta_squared();
  const double numer_scale = 2.0 * p.gamma0 * p.lambda;
  double numer = 0.0;
  double denom = 0.0;
  if (eta_sq > 0.0) {
    const double eta = std::sqrt(eta_sq);
    const double sh = std::sinh(0.5 * eta * t);
    numer = numer_scale * sh;
    denom = eta * std::cosh(0.5 * eta * t) + p.lambda * sh;
  } else if (eta_sq < 0.0) {
    // eta = i kappa; the common factor i cancels between numerator and denominator.
    const double kappa = std::sqrt(-eta_sq);
    const double sn = std::sin(0.5 * kappa * t);
    numer = numer_scale * sn;
    denom = kappa * std::cos(0.5 * kappa * t) + p.lambda * sn;
  } else {
    // eta -> 0 limit: sinh(eta t / 2) / eta -> t / 2, cosh -> 1.
    numer = numer_scale * 0.5 * t;
    denom = 1.0 + p.lambda * 0.5 * t;
  }
  if (std::abs(denom) < 1e-14) {
    throw SingularPointError("decay_rate: denominator vanishes at t = " + std::to_string(t));
  }
  return numer / denom;
}

void LindbladModel::validate() const {
  if (!hamiltonian.is_square()) throw DimensionError("LindbladModel: Hamiltonian not square");
  if (!linalg::is_hermitian(hamiltonian, 1e-10)) {
    throw InvariantError("LindbladModel: Hamiltonian is not Hermitian");
  }
  for (const auto& j : jumps) {
    if (j.op.rows() != dim() || j.op.cols() != dim()) {
      throw DimensionError("LindbladModel: jump operator dimension mismatch");
    }
  }
}

CMatrix liouvillian_apply(const CMatrix& rho, const LindbladModel& model, double t) {
  if (rho.rows() != model.dim() || rho.cols() != model.dim()) {
    throw DimensionError("liouvillian_apply: state and model dimensions differ");
  }
  CMatrix out = commutator(model.hamiltonian, rho) * Complex{0.0, -1.0};
  for (const auto& jump : model.jumps) {
    const double g = jump.rate ? jump.rate(t) : 1.0;
    if (g == 0.0) continue;
    const CMatrix ldag = adjoint(jump.op);
    CMatrix d = matmul(matmul(jump.op, rho), ldag);
    d -= anticommutator(matmul(ldag, jump.op), rho) * Complex{0.5, 0.0};
    out += d * Complex{g, 0.0};
  }
  return out;
}

LindbladModel two_level_model(double omega, const DecayParams& decay) {
  LindbladModel m;
  m.hamiltonian = ops::sigma_z() * Complex{omega, 0.0};
  m.jumps.push_back({ops::sigma_minus(), [decay](double t) { return decay_rate(t, decay); }});
  return m;
}

CMatrix two_qubit_hamiltonian(double omega, double c1, double c2, double c3) {
  const CMatrix id = CMatrix::identity(2);
  CMatrix h = kron(ops::sigma_z(), id) * Complex{omega, 0.0};
  h += kron(ops::sigma_x(), ops::sigma_x()) * Complex{c1, 0.0};
  h += kron(ops::sigma_y(), ops::sigma_y()) * Complex{c2, 0.0};
  h += kron(ops::sigma_z(), ops::sigma_z()) * Complex{c3, 0.0};
  return h;
}

LindbladModel two_qubit_model(double omega, const Couplings& c, const DecayParams& qubit1,
                              const DecayParams& qubit2) {
  const CMatrix id = CMatrix::identity(2);
  LindbladModel m;
  m.hamiltonian = two_qubit_hamiltonian(omega, c.c1, c.c2, c.c3);
  m.jumps.push_back(
      {kron(ops::sigma_minus(), id), [qubit1](double t) { return decay_rate(t, qubit1); }});
  m.jumps.push_back(
      {kron(id, ops::sigma_minus()), [qubit2](double t) { return decay_rate(t, qubit2); }});
  return m;
}

CMatrix rk4_step_raw(const CMatrix& rho, const LindbladModel& model, double t, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be positive");
  const Complex h{dt, 0.0};
  const Complex half{0.5 * dt, 0.0};
  const CMatrix k1 = liouvillian_apply(rho, model, t);
  const CMatrix k2 = liouvillian_apply(rho + k1 * half, model, t + 0.5 * dt);
  const CMatrix k3 = liouvillian_apply(rho + k2 * half, model, t + 0.5 * dt);
  const CMatrix k4 = liouvillian_apply(rho + k3 * h, model, t + dt);
  CMatrix incr = k1;
  incr += k2 * Complex{2.0, 0.0};
  incr += k3 * Complex{2.0, 0.0};
  incr += k4;
  return rho + incr * Complex{dt / 6.0, 0.0};
}

DensityMatrix rk4_step(const DensityMatrix& rho, const LindbladModel& model, double t,
                       double dt) {
  return DensityMatrix(rk4_step_raw(rho.mat(), model, t, dt));
}

CMatrix partial_trace_second(const CMatrix& rho12) {
  if (rho12.rows() != 4 || rho12.cols() != 4) {
    throw DimensionError("partial_trace_second: expected a 4x4 operator");
  }
  CMatrix r(2, 2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      r(i, j) = rho12(2 * i, 2 * j) + rho12(2 * i + 1, 2 * j + 1);
  return r;
}

DensityMatrix sample_random_state(std::size_t d, std::mt19937_64& rng, StateSampling mode) {
  if (d < 2) throw std::invalid_argument("sample_random_state: d must be at least 2");
  std::normal_distribution<double> normal(0.0, 1.0);
  if (mode == StateSampling::haar_pure) {
    std::vector<Complex> psi(d);
    double norm_sq = 0.0;
    for (auto& c : psi) {
      const double re = normal(rng);
      const double im = normal(rng);
      c = Complex{re, im};
      norm_sq += std::norm(c);
    }
    CMatrix rho(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) rho(i, j) = psi[i] * std::conj(psi[j]) / norm_sq;
    // Hermitize exactly; rounding can break the symmetry in the last bit.
    for (std::size_t i = 0; i < d; ++i) {
      rho(i, i) = rho(i, i).real();
      for (std::size_t j = i + 1; j < d; ++j) rho(j, i) = std::conj(rho(i, j));
    }
    return DensityMatrix(std::move(rho));
  }
  CMatrix g(d, d);
  for (auto& c : g.data()) {
    const double re = normal(rng);
    const double im = normal(rng);
    c = Complex{re, im};
  }
  CMatrix rho = matmul(g, adjoint(g));
  rho *= Complex{1.0 / linalg::trace(rho).real(), 0.0};
  return DensityMatrix(std::move(rho));
}

DensityMatrix sample_random_state(std::size_t d, std::uint64_t seed, StateSampling mode) {
  std::mt19937_64 rng(seed);
  return sample_random_state(d, rng, mode);
}

Trajectory Trajectory::truncated(std::size_t n) const {
  if (n > n_steps()) throw std::out_of_range("Trajectory::truncated: not enough steps");
  Trajectory out{t0, dt, {}};
  out.states.assign(states.begin(), states.begin() + static_cast<std::ptrdiff_t>(n + 1));
  return out;
}

Trajectory generate_trajectory(const DensityMatrix& rho0, const LindbladModel& model,
                               double dt, std::size_t n_steps, double t0) {
  if (rho0.dim() != model.dim()) {
    throw DimensionError("generate_trajectory: state and model dimensions differ");
  }
  Trajectory traj{t0, dt, {}};
  traj.states.reserve(n_steps + 1);
  traj.states.push_back(rho0);
  for (std::size_t j = 0; j < n_steps; ++j) {
    traj.states.push_back(rk4_step(traj.states.back(), model, traj.time(j), dt));
  }
  return traj;
}

Trajectory generate_reduced_trajectory(const DensityMatrix& rho12_0,
                                       const LindbladModel& model4, double dt,
                                       std::size_t n_steps, double t0) {
  if (rho12_0.dim() != 4 || model4.dim() != 4) {
    throw DimensionError("generate_reduced_trajectory: expected a two-qubit model");
  }
  Trajectory traj{t0, dt, {}};
  traj.states.reserve(n_steps + 1);
  DensityMatrix full = rho12_0;
  traj.states.emplace_back(partial_trace_second(full.mat()));
  for (std::size_t j = 0; j < n_steps; ++j) {
    full = rk4_step(full, model4, traj.time(j), dt);
    traj.states.emplace_back(partial_trace_second(full.mat()));
  }
  return traj;
}

double trace_distance(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("trace_distance: dimension mismatch");
  }
  CMatrix diff = a - b;
  // Symmetrize so round-off never trips the eigensolver's Hermiticity check.
  diff = (diff + adjoint(diff)) * Complex{0.5, 0.0};
  double s = 0.0;
  for (double l : linalg::herm_eigenvalues(diff)) s += std::abs(l);
  return std::clamp(0.5 * s, 0.0, 1.0);
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  return trace_distance(a.mat(), b.mat());
}

}  // namespace qrnme::dynamics
