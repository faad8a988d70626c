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

#include "qrnme/qrn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "qrnme/errors.hpp"

namespace qrnme::qrn {

using linalg::adjoint;
using linalg::anticommutator;
using linalg::commutator;
using linalg::matmul;

namespace {

const Complex kMinusI{0.0, -1.0};

std::size_t dim_from_encoding(std::size_t length) {
  const auto m = static_cast<std::size_t>(std::lround(std::sqrt(length / 2.0)));
  if (m == 0 || 2 * m * m != length) {
    throw DimensionError("encoding length " + std::to_string(length) + " is not 2 m^2");
  }
  return m;
}

}  // namespace

CMatrix decode_complex(std::span<const double> o, std::size_t m) {
  if (o.size() != 2 * m * m) {
    throw DimensionError("decode_complex: expected " + std::to_string(2 * m * m) +
                         " reals, got " + std::to_string(o.size()));
  }
  CMatrix mat(m, m);
  const std::size_t n = m * m;
  auto data = mat.data();
  for (std::size_t k = 0; k < n; ++k) data[k] = Complex{o[k], o[n + k]};
  return mat;
}

std::vector<double> encode_complex(const CMatrix& mat) {
  const std::size_t n = mat.size();
  std::vector<double> o(2 * n);
  auto data = mat.data();
  for (std::size_t k = 0; k < n; ++k) {
    o[k] = data[k].real();
    o[n + k] = data[k].imag();
  }
  return o;
}

std::vector<double> encode_gradient(const CMatrix& grad) { return encode_complex(grad); }

CMatrix hermitize(const CMatrix& a) {
  if (!a.is_square()) throw DimensionError("hermitize: matrix is not square");
  CMatrix h(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    h(i, i) = 2.0 * a(i, i).real();
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      h(i, j) = a(i, j) + std::conj(a(j, i));
      h(j, i) = std::conj(h(i, j));
    }
  }
  return h;
}

DensityMatrix density_from_output(const CMatrix& a) {
  if (!a.is_square()) throw DimensionError("density_from_output: matrix is not square");
  CMatrix p = matmul(a, adjoint(a));
  const double tau = linalg::trace(p).real();
  if (!(tau > 1e-14)) {
    throw DegenerateOutputError("density_from_output: Tr[A A^+] = " + std::to_string(tau));
  }
  p *= Complex{1.0 / tau, 0.0};
  for (std::size_t i = 0; i < p.rows(); ++i) {
    p(i, i) = p(i, i).real();
    for (std::size_t j = i + 1; j < p.cols(); ++j) p(j, i) = std::conj(p(i, j));
  }
  return DensityMatrix::unchecked(std::move(p));
}

CMatrix density_from_output_grad(const CMatrix& a, const CMatrix& grad_rho) {
  const CMatrix p = matmul(a, adjoint(a));
  const double tau = linalg::trace(p).real();
  if (!(tau > 1e-14)) {
    throw DegenerateOutputError("density_from_output_grad: Tr[A A^+] vanishes");
  }
  const double c = linalg::trace(matmul(adjoint(grad_rho), p)).real() / (tau * tau);
  CMatrix k = grad_rho * Complex{1.0 / tau, 0.0};
  for (std::size_t i = 0; i < k.rows(); ++i) k(i, i) -= c;
  return matmul(k + adjoint(k), a);
}

void QrnConfig::validate() const {
  if (mu_count == 0) throw std::invalid_argument("QrnConfig: mu_count must be at least 1");
  if (rk_order != 1) throw std::invalid_argument("QrnConfig: only rk_order 1 is supported");
  if (!(dt > 0.0)) throw std::invalid_argument("QrnConfig: dt must be positive");
  if (known_hamiltonian.rows() != dim || known_hamiltonian.cols() != dim) {
    throw std::invalid_argument("QrnConfig: known Hamiltonian must be dim x dim");
  }
}

QrnOutput decode_output(std::span<const double> raw, const QrnConfig& cfg) {
  if (raw.size() != cfg.output_size()) {
    throw DimensionError("decode_output: expected " + std::to_string(cfg.output_size()) +
                         " values, got " + std::to_string(raw.size()));
  }
  const std::size_t block = 2 * cfg.dim * cfg.dim;
  QrnOutput out;
  std::size_t offset = 0;
  if (cfg.include_lamb_shift) {
    out.lamb_shift = hermitize(decode_complex(raw.subspan(0, block), cfg.dim));
    offset = block;
  } else {
    out.lamb_shift = CMatrix::zeros(cfg.dim, cfg.dim);
  }
  out.lindblads.reserve(cfg.mu_count);
  for (std::size_t mu = 0; mu < cfg.mu_count; ++mu, offset += block) {
    out.lindblads.push_back(decode_complex(raw.subspan(offset, block), cfg.dim));
  }
  return out;
}

CMatrix qrn_liouvillian_apply(const CMatrix& rho, const CMatrix& hamiltonian,
                              const QrnOutput& out) {
  const std::size_t d = rho.rows();
  if (!rho.is_square() || hamiltonian.rows() != d || out.lamb_shift.rows() != d) {
    throw DimensionError("qrn_liouvillian_apply: dimension mismatch");
  }
  CMatrix result = commutator(hamiltonian + out.lamb_shift, rho) * kMinusI;
  for (const auto& l : out.lindblads) {
    if (l.rows() != d || l.cols() != d) {
      throw DimensionError("qrn_liouvillian_apply: Lindblad operator dimension mismatch");
    }
    const CMatrix ldag = adjoint(l);
    result += matmul(matmul(l, rho), ldag);
    result -= anticommutator(matmul(ldag, l), rho) * Complex{0.5, 0.0};
  }
  return result;
}

CMatrix superoperator_matrix(const CMatrix& hamiltonian, const QrnOutput& out) {
  const std::size_t d = hamiltonian.rows();
  const std::size_t n = d * d;
  CMatrix s(n, n);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const CMatrix image = qrn_liouvillian_apply(CMatrix::unit(d, i, j), hamiltonian, out);
      const std::size_t col = i * d + j;
      auto data = image.data();
      for (std::size_t row = 0; row < n; ++row) s(row, col) = data[row];
    }
  }
  return s;
}

CMatrix propagate(const CMatrix& rho, const CMatrix& superop, double dt) {
  const std::size_t d = rho.rows();
  if (superop.rows() != d * d) throw DimensionError("propagate: superoperator size mismatch");
  const CMatrix channel = linalg::expm(superop * Complex{dt, 0.0});
  const auto flat = linalg::apply(channel, rho.data());
  return CMatrix(d, d, flat);
}

StateCost cost_state_sequence(std::span<const Trajectory> predicted,
                              std::span<const Trajectory> target) {
  if (predicted.size() != target.size()) {
    throw DimensionError("cost_state_sequence: trajectory counts differ");
  }
  StateCost out;
  std::size_t terms = 0;
  for (std::size_t a = 0; a < predicted.size(); ++a) {
    if (predicted[a].states.size() != target[a].states.size() ||
        predicted[a].dt != target[a].dt || predicted[a].t0 != target[a].t0) {
      throw DimensionError("cost_state_sequence: trajectories are not aligned");
    }
    terms += predicted[a].n_steps();
  }
  if (terms == 0) return out;
  const double scale = 1.0 / static_cast<double>(terms);
  out.grads.resize(predicted.size());
  for (std::size_t a = 0; a < predicted.size(); ++a) {
    const auto& p = predicted[a].states;
    const auto& t = target[a].states;
    out.grads[a].reserve(p.size() - 1);
    for (std::size_t j = 1; j < p.size(); ++j) {
      const CMatrix diff = p[j].mat() - t[j].mat();
      out.value += linalg::frobenius_norm_sq(diff) * scale;
      out.grads[a].push_back(diff * Complex{2.0 * scale, 0.0});
    }
  }
  return out;
}

namespace {

// Residual R = rho1 - rho0 - dt L[rho0] and its cost gradient for one
// transition, scaled by `scale`.
double residual_term(const CMatrix& rho0, const CMatrix& rho1, const CMatrix& hamiltonian,
                     const QrnOutput& out, double dt, double scale, QrnOutput* grad) {
  const CMatrix gen = qrn_liouvillian_apply(rho0, hamiltonian, out);
  const CMatrix r = rho1 - rho0 - gen * Complex{dt, 0.0};
  const double value = linalg::frobenius_norm_sq(r);
  if (grad != nullptr) {
    const CMatrix m = adjoint(r);
    const CMatrix mdag = r;
    const double two_dt = 2.0 * dt * scale;
    // d/dH_LS: -2i dt [R, rho].
    grad->lamb_shift = commutator(mdag, rho0) * Complex{0.0, -two_dt};
    grad->lindblads.clear();
    for (const auto& l : out.lindblads) {
      const CMatrix lrho = matmul(l, rho0);
      CMatrix g = matmul(mdag, lrho) + matmul(m, lrho);
      CMatrix half = matmul(lrho, m) + matmul(matmul(l, mdag), rho0) +
                     matmul(matmul(l, m), rho0) + matmul(lrho, mdag);
      g -= half * Complex{0.5, 0.0};
      grad->lindblads.push_back(g * Complex{-two_dt, 0.0});
    }
  }
  return value;
}

}  // namespace

ResidualCost cost_residual(std::span<const Trajectory> targets,
                           std::span<const std::vector<QrnOutput>> outputs,
                           const QrnConfig& cfg) {
  if (targets.size() != outputs.size()) {
    throw DimensionError("cost_residual: trajectory and output counts differ");
  }
  std::size_t terms = 0;
  for (std::size_t a = 0; a < targets.size(); ++a) {
    if (outputs[a].size() != targets[a].n_steps()) {
      throw DimensionError("cost_residual: need one output per transition (trajectory " +
                           std::to_string(a) + ")");
    }
    terms += targets[a].n_steps();
  }
  ResidualCost cost;
  if (terms == 0) return cost;
  const double scale = 1.0 / static_cast<double>(terms);
  cost.grads.resize(targets.size());
  for (std::size_t a = 0; a < targets.size(); ++a) {
    const auto& states = targets[a].states;
    cost.grads[a].resize(outputs[a].size());
    for (std::size_t j = 0; j + 1 < states.size(); ++j) {
      const double r = residual_term(states[j].mat(), states[j + 1].mat(),
                                     cfg.known_hamiltonian, outputs[a][j], cfg.dt, scale,
                                     &cost.grads[a][j]);
      cost.per_step.push_back(r);
      cost.value += r * scale;
    }
  }
  return cost;
}

ResidualCost cost_residual(const Trajectory& target, const std::vector<QrnOutput>& outputs,
                           const QrnConfig& cfg) {
  return cost_residual(std::span<const Trajectory>(&target, 1),
                       std::span<const std::vector<QrnOutput>>(&outputs, 1), cfg);
}

std::vector<double> output_gradient(const QrnOutput& grad, const QrnConfig& cfg) {
  std::vector<double> raw;
  raw.reserve(cfg.output_size());
  if (cfg.include_lamb_shift) {
    // H_LS = A + A^+ so dC/dA = G + G^+.
    const auto g = encode_gradient(grad.lamb_shift + adjoint(grad.lamb_shift));
    raw.insert(raw.end(), g.begin(), g.end());
  }
  if (grad.lindblads.size() != cfg.mu_count) {
    throw DimensionError("output_gradient: wrong number of Lindblad gradients");
  }
  for (const auto& l : grad.lindblads) {
    const auto g = encode_gradient(l);
    raw.insert(raw.end(), g.begin(), g.end());
  }
  return raw;
}

std::vector<double> network_input(const DensityMatrix& rho0) {
  return encode_complex(rho0.mat());
}

Trajectory rollout_state_predictor(const DensityMatrix& rho0, const neural::GruNetwork& net,
                                   std::size_t n_steps, double dt,
                                   std::optional<double> extra_input) {
  const std::size_t d = dim_from_encoding(net.shape().output_size);
  if (d != rho0.dim()) throw DimensionError("rollout_state_predictor: dimension mismatch");
  const auto input = network_input(rho0);
  const neural::Tape tape = neural::network_forward_rollout(input, n_steps, net, extra_input);
  Trajectory traj{0.0, dt, {}};
  traj.states.reserve(n_steps + 1);
  traj.states.push_back(rho0);
  for (const auto& out : tape.outputs) {
    traj.states.push_back(density_from_output(decode_complex(out, d)));
  }
  return traj;
}

std::vector<QrnOutput> predict_operators(const DensityMatrix& rho0,
                                         const neural::GruNetwork& net, const QrnConfig& cfg,
                                         std::size_t n_steps,
                                         std::optional<double> extra_input) {
  if (net.shape().output_size != cfg.output_size()) {
    throw DimensionError("predict_operators: network output does not match the config");
  }
  const auto input = network_input(rho0);
  const neural::Tape tape = neural::network_forward_rollout(input, n_steps, net, extra_input);
  std::vector<QrnOutput> ops;
  ops.reserve(n_steps);
  for (const auto& out : tape.outputs) ops.push_back(decode_output(out, cfg));
  return ops;
}

Trajectory rollout_master_equation(const DensityMatrix& rho0, const neural::GruNetwork& net,
                                   const QrnConfig& cfg, std::size_t n_steps,
                                   std::optional<double> extra_input) {
  cfg.validate();
  if (rho0.dim() != cfg.dim) throw DimensionError("rollout_master_equation: dimension mismatch");
  const auto ops = predict_operators(rho0, net, cfg, n_steps, extra_input);
  Trajectory traj{0.0, cfg.dt, {}};
  traj.states.reserve(n_steps + 1);
  traj.states.push_back(rho0);
  for (const auto& op : ops) {
    const CMatrix s = superoperator_matrix(cfg.known_hamiltonian, op);
    CMatrix next = propagate(traj.states.back().mat(), s, cfg.dt);
    next = (next + adjoint(next)) * Complex{0.5, 0.0};
    traj.states.emplace_back(std::move(next));
  }
  return traj;
}

}  // namespace qrnme::qrn
