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

#pragma once

// Ground-truth open-system dynamics.
//
// Basis convention (fixed project-wide): |0> is the sigma_z eigenvector with
// eigenvalue +1 (the excited state) and sigma^- = |1><0|. Two-qubit indices
// are qubit-1-major: index = 2 * i1 + i2.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "qrnme/linalg.hpp"

namespace qrnme::dynamics {

using linalg::CMatrix;
using linalg::Complex;

namespace ops {
CMatrix sigma_x();
CMatrix sigma_y();
CMatrix sigma_z();
CMatrix sigma_plus();   // |0><1|
CMatrix sigma_minus();  // |1><0|
}  // namespace ops

struct Tolerances {
  double hermiticity = 1e-9;
  double trace = 1e-9;
  double min_eigenvalue = -1e-8;
};

struct StateDiagnostics {
  double hermiticity_defect = 0.0;
  double trace_error = 0.0;
  double min_eigenvalue = 0.0;
  bool ok(const Tolerances& tol = {}) const;
};

StateDiagnostics diagnose_state(const CMatrix& rho);

// Hermitian, unit-trace, positive-semidefinite d x d matrix.
class DensityMatrix {
 public:
  // Validates against the tolerances; throws InvariantError on failure.
  explicit DensityMatrix(CMatrix mat, const Tolerances& tol = {});

  // Skips validation. For states that are valid by construction.
  static DensityMatrix unchecked(CMatrix mat);

  const CMatrix& mat() const noexcept { return mat_; }
  std::size_t dim() const noexcept { return mat_.rows(); }

  friend bool operator==(const DensityMatrix&, const DensityMatrix&) = default;

 private:
  struct NoCheck {};
  DensityMatrix(CMatrix mat, NoCheck) : mat_(std::move(mat)) {}
  CMatrix mat_;
};

struct DecayParams {
  double gamma0 = 0.5;
  double lambda = 2.0;

  // eta^2 = lambda^2 - 2 gamma0 lambda; negative in the non-Markovian regime.
  double eta_squared() const { return lambda * lambda - 2.0 * gamma0 * lambda; }
  bool markovian() const { return lambda > 2.0 * gamma0; }
};

// Time-dependent decay rate of the damped Jaynes-Cummings-type reservoir.
// For lambda < 2 gamma0 eta is imaginary and the rate is evaluated through
// sinh(ix) = i sin(x), cosh(ix) = cos(x) in real arithmetic. Throws
// SingularPointError when the denominator falls below 1e-14 in magnitude and
// std::invalid_argument for t < 0 or non-positive parameters.
double decay_rate(double t, const DecayParams& p);

using RateFunction = std::function<double(double)>;

struct Jump {
  CMatrix op;
  RateFunction rate;
};

struct LindbladModel {
  CMatrix hamiltonian;
  std::vector<Jump> jumps;

  std::size_t dim() const { return hamiltonian.rows(); }
  // Throws InvariantError unless the Hamiltonian is Hermitian within 1e-10.
  void validate() const;
};

// -i[H, rho] + sum_k g_k(t) (L_k rho L_k^+ - 1/2 {L_k^+ L_k, rho}).
CMatrix liouvillian_apply(const CMatrix& rho, const LindbladModel& model, double t);

// omega sz + gamma(t) sigma^- dissipator.
LindbladModel two_level_model(double omega, const DecayParams& decay);

struct Couplings {
  double c1 = 0.3242;
  double c2 = 0.6723;
  double c3 = 0.1353;
};

// omega sz(x)I + c1 sx(x)sx + c2 sy(x)sy + c3 sz(x)sz.
CMatrix two_qubit_hamiltonian(double omega, double c1, double c2, double c3);

// Two qubits, each with its own sigma^- decay channel at rate gamma_i(t).
LindbladModel two_qubit_model(double omega, const Couplings& c, const DecayParams& qubit1,
                              const DecayParams& qubit2);

// Classical four-stage Runge-Kutta step. The result is checked against the
// DensityMatrix invariants; InvariantError signals a step that is too large.
DensityMatrix rk4_step(const DensityMatrix& rho, const LindbladModel& model, double t,
                       double dt);

// Same step on an unconstrained matrix (no validation).
CMatrix rk4_step_raw(const CMatrix& rho, const LindbladModel& model, double t, double dt);

// Tr_2 of a 4x4 two-qubit operator.
CMatrix partial_trace_second(const CMatrix& rho12);

enum class StateSampling { haar_pure, ginibre_mixed };

DensityMatrix sample_random_state(std::size_t d, std::mt19937_64& rng,
                                  StateSampling mode = StateSampling::haar_pure);
DensityMatrix sample_random_state(std::size_t d, std::uint64_t seed,
                                  StateSampling mode = StateSampling::haar_pure);

struct Trajectory {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<DensityMatrix> states;

  std::size_t n_steps() const { return states.empty() ? 0 : states.size() - 1; }
  double time(std::size_t j) const { return t0 + static_cast<double>(j) * dt; }
  // First n_steps + 1 states.
  Trajectory truncated(std::size_t n_steps) const;
};

Trajectory generate_trajectory(const DensityMatrix& rho0, const LindbladModel& model,
                               double dt, std::size_t n_steps, double t0 = 0.0);

// Integrates a 4x4 two-qubit model and returns the qubit-1 marginals.
Trajectory generate_reduced_trajectory(const DensityMatrix& rho12_0,
                                       const LindbladModel& model4, double dt,
                                       std::size_t n_steps, double t0 = 0.0);

// 1/2 sum |lambda_k(a - b)|.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);
double trace_distance(const CMatrix& a, const CMatrix& b);

}  // namespace qrnme::dynamics
