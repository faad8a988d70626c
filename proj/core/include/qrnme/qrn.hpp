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

// Recurrent-network master equations.
//
// A network output vector is decoded into complex matrices with the re/im
// row-major layout: for an m x m matrix the first m^2 reals are the real parts
// and the next m^2 the imaginary parts. In the master-equation mode one output
// vector holds, in order, the raw Lamb-shift block A (only when enabled, with
// H_LS = A + A^+) followed by mu Lindblad operators.
//
// Gradients of real-valued costs with respect to a complex matrix M are
// reported as G = dC/dRe(M) + i dC/dIm(M), so dC = Re Tr(G^+ dM).

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "qrnme/dynamics.hpp"
#include "qrnme/linalg.hpp"
#include "qrnme/neural.hpp"

namespace qrnme::qrn {

using dynamics::DensityMatrix;
using dynamics::Trajectory;
using linalg::CMatrix;
using linalg::Complex;

CMatrix decode_complex(std::span<const double> encoded, std::size_t m);
std::vector<double> encode_complex(const CMatrix& mat);
// Gradient of a complex matrix in the encoding layout (re block, im block).
std::vector<double> encode_gradient(const CMatrix& grad);

// A + A^+.
CMatrix hermitize(const CMatrix& a);

// A A^+ / Tr[A A^+]. Throws DegenerateOutputError when Tr[A A^+] <= 1e-14.
DensityMatrix density_from_output(const CMatrix& a);
// Pulls dC/drho back to dC/dA for rho = A A^+ / Tr[A A^+].
CMatrix density_from_output_grad(const CMatrix& a, const CMatrix& grad_rho);

struct QrnOutput {
  CMatrix lamb_shift;             // Hermitian
  std::vector<CMatrix> lindblads;
};

struct QrnConfig {
  std::size_t dim = 2;
  std::size_t mu_count = 1;
  bool include_lamb_shift = false;
  int rk_order = 1;
  double dt = 0.01;
  CMatrix known_hamiltonian;

  std::size_t output_size() const {
    return 2 * dim * dim * (mu_count + (include_lamb_shift ? 1 : 0));
  }
  // Throws std::invalid_argument on mu_count == 0, rk_order != 1, dt <= 0 or a
  // Hamiltonian of the wrong size.
  void validate() const;
};

QrnOutput decode_output(std::span<const double> raw, const QrnConfig& cfg);

// -i[H + H_LS, rho] + sum_mu (L rho L^+ - 1/2 {L^+ L, rho}).
CMatrix qrn_liouvillian_apply(const CMatrix& rho, const CMatrix& hamiltonian,
                              const QrnOutput& out);

// d^2 x d^2 generator acting on row-major flattened states; column (i*d + j)
// is the image of |i><j|.
CMatrix superoperator_matrix(const CMatrix& hamiltonian, const QrnOutput& out);

// Applies expm(dt * S) to rho.
CMatrix propagate(const CMatrix& rho, const CMatrix& superop, double dt);

struct StateCost {
  double value = 0.0;
  // grads[a][j] = dC/d predicted.states[j + 1] of trajectory a.
  std::vector<std::vector<CMatrix>> grads;
};

// Mean over trajectories and steps j >= 1 of ||rho - rho_pred||_F^2.
StateCost cost_state_sequence(std::span<const Trajectory> predicted,
                              std::span<const Trajectory> target);

struct ResidualCost {
  double value = 0.0;
  std::vector<double> per_step;  // residual ||.||_F^2 of each transition
  // Per trajectory, per transition.
  std::vector<std::vector<QrnOutput>> grads;
};

// Teacher-forced first-order residual:
// mean_{a,j} ||rho(t_{j+1}) - rho(t_j) - dt L_j[rho(t_j)]||_F^2, with L_j built
// from outputs[a][j]. Gradients are with respect to H_LS and each L.
ResidualCost cost_residual(std::span<const Trajectory> targets,
                           std::span<const std::vector<QrnOutput>> outputs,
                           const QrnConfig& cfg);

// Single-trajectory form; per-trajectory Hamiltonians go through cfg.
ResidualCost cost_residual(const Trajectory& target, const std::vector<QrnOutput>& outputs,
                           const QrnConfig& cfg);

// Maps a gradient on QrnOutput back onto the raw network output vector.
std::vector<double> output_gradient(const QrnOutput& grad, const QrnConfig& cfg);

// Input vector for the network: encoded initial state, plus optional extra.
std::vector<double> network_input(const DensityMatrix& rho0);

Trajectory rollout_state_predictor(const DensityMatrix& rho0, const neural::GruNetwork& net,
                                   std::size_t n_steps, double dt,
                                   std::optional<double> extra_input = std::nullopt);

// Per-step decoded operators for a master-equation network.
std::vector<QrnOutput> predict_operators(const DensityMatrix& rho0,
                                         const neural::GruNetwork& net, const QrnConfig& cfg,
                                         std::size_t n_steps,
                                         std::optional<double> extra_input = std::nullopt);

Trajectory rollout_master_equation(const DensityMatrix& rho0, const neural::GruNetwork& net,
                                   const QrnConfig& cfg, std::size_t n_steps,
                                   std::optional<double> extra_input = std::nullopt);

}  // namespace qrnme::qrn
