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

#include "qrnme/neural.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "qrnme/errors.hpp"

namespace qrnme::neural {

namespace {

double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

// y = M x + b for a row-major rows x cols matrix.
void affine(std::span<const double> m, std::span<const double> x, std::span<const double> b,
            std::span<double> y) {
  const std::size_t rows = y.size(), cols = x.size();
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = m.data() + i * cols;
    double acc = b[i];
    for (std::size_t j = 0; j < cols; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

// y += M x
void gemv_add(std::span<const double> m, std::span<const double> x, std::span<double> y) {
  const std::size_t rows = y.size(), cols = x.size();
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = m.data() + i * cols;
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) acc += row[j] * x[j];
    y[i] += acc;
  }
}

// y += M^T d
void gemv_t_add(std::span<const double> m, std::span<const double> d, std::span<double> y) {
  const std::size_t rows = d.size(), cols = y.size();
  for (std::size_t i = 0; i < rows; ++i) {
    const double di = d[i];
    if (di == 0.0) continue;
    const double* row = m.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) y[j] += row[j] * di;
  }
}

// G += d x^T
void outer_add(std::span<const double> d, std::span<const double> x, std::span<double> g) {
  const std::size_t rows = d.size(), cols = x.size();
  for (std::size_t i = 0; i < rows; ++i) {
    const double di = d[i];
    if (di == 0.0) continue;
    double* row = g.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) row[j] += di * x[j];
  }
}

bool all_zero(std::span<const double> x) {
  for (double v : x)
    if (v != 0.0) return false;
  return true;
}

void require(bool cond, const std::string& what) {
  if (!cond) throw DimensionError(what);
}

}  // namespace

GruNetwork::GruNetwork(NetworkShape shape) : shape_(shape) {
  if (shape_.num_layers == 0 || shape_.hidden_size == 0 || shape_.input_size == 0 ||
      shape_.output_size == 0) {
    throw DimensionError("GruNetwork: all sizes must be positive");
  }
  std::size_t offset = 0;
  auto add = [&](std::string name, std::size_t size, bool is_weight) {
    blocks_.push_back({std::move(name), offset, size, is_weight});
    offset += size;
  };
  const std::size_t h = shape_.hidden_size;
  for (std::size_t l = 0; l < shape_.num_layers; ++l) {
    const std::size_t in = l == 0 ? shape_.input_size : h;
    const std::string p = "gru" + std::to_string(l) + ".";
    add(p + "w_update", h * in, true);
    add(p + "w_reset", h * in, true);
    add(p + "w_cand", h * in, true);
    add(p + "u_update", h * h, true);
    add(p + "u_reset", h * h, true);
    add(p + "u_cand", h * h, true);
    add(p + "b_update", h, false);
    add(p + "b_reset", h, false);
    add(p + "b_cand", h, false);
  }
  add("head.weight", shape_.output_size * h, true);
  add("head.bias", shape_.output_size, false);
  params_.assign(offset, 0.0);
}

std::vector<std::uint8_t> GruNetwork::head_weight_mask() const {
  std::vector<std::uint8_t> mask(params_.size(), 0);
  const ParameterBlock& w = blocks_.at(blocks_.size() - 2);
  for (std::size_t i = 0; i < w.size; ++i) mask[w.offset + i] = 1;
  return mask;
}

void gru_cell_forward(std::span<const double> x, std::span<const double> s_prev,
                      const GruCellParams& p, CellCache& c) {
  require(x.size() == p.input, "gru_cell_forward: input size mismatch");
  require(s_prev.size() == p.hidden, "gru_cell_forward: hidden size mismatch");
  const std::size_t h = p.hidden;
  c.x.assign(x.begin(), x.end());
  c.s_prev.assign(s_prev.begin(), s_prev.end());
  c.z.resize(h);
  c.r.resize(h);
  c.cand.resize(h);
  c.s.resize(h);

  const bool zero_input = all_zero(x);
  std::vector<double> rs(h);
  if (zero_input) {
    c.z.assign(p.b_update.begin(), p.b_update.end());
    c.r.assign(p.b_reset.begin(), p.b_reset.end());
    c.cand.assign(p.b_cand.begin(), p.b_cand.end());
  } else {
    affine(p.w_update, x, p.b_update, c.z);
    affine(p.w_reset, x, p.b_reset, c.r);
    affine(p.w_cand, x, p.b_cand, c.cand);
  }
  gemv_add(p.u_update, s_prev, c.z);
  gemv_add(p.u_reset, s_prev, c.r);
  for (std::size_t i = 0; i < h; ++i) {
    c.z[i] = sigmoid(c.z[i]);
    c.r[i] = sigmoid(c.r[i]);
    rs[i] = c.r[i] * s_prev[i];
  }
  gemv_add(p.u_cand, rs, c.cand);
  for (std::size_t i = 0; i < h; ++i) {
    c.cand[i] = std::tanh(c.cand[i]);
    c.s[i] = (1.0 - c.z[i]) * s_prev[i] + c.z[i] * c.cand[i];
  }
}

CellCache gru_cell_forward(std::span<const double> x, std::span<const double> s_prev,
                           const GruCellParams& p) {
  CellCache c;
  gru_cell_forward(x, s_prev, p, c);
  return c;
}

void gru_cell_backward(const CellCache& c, std::span<const double> ds, const GruCellParams& p,
                       GruCellGrads& g, std::span<double> dx, std::span<double> ds_prev) {
  const std::size_t h = p.hidden;
  require(ds.size() == h && ds_prev.size() == h && dx.size() == p.input,
          "gru_cell_backward: size mismatch");
  std::vector<double> da_z(h), da_r(h), da_c(h), rs(h), dq(h, 0.0);
  for (std::size_t i = 0; i < h; ++i) {
    const double z = c.z[i];
    const double cand = c.cand[i];
    ds_prev[i] = ds[i] * (1.0 - z);
    da_z[i] = ds[i] * (cand - c.s_prev[i]) * z * (1.0 - z);
    da_c[i] = ds[i] * z * (1.0 - cand * cand);
    rs[i] = c.r[i] * c.s_prev[i];
  }
  // Candidate branch.
  outer_add(da_c, c.x, g.w_cand);
  outer_add(da_c, rs, g.u_cand);
  for (std::size_t i = 0; i < h; ++i) g.b_cand[i] += da_c[i];
  gemv_t_add(p.u_cand, da_c, dq);
  for (std::size_t i = 0; i < h; ++i) {
    const double r = c.r[i];
    da_r[i] = dq[i] * c.s_prev[i] * r * (1.0 - r);
    ds_prev[i] += dq[i] * r;
  }
  // Gates.
  outer_add(da_z, c.x, g.w_update);
  outer_add(da_z, c.s_prev, g.u_update);
  outer_add(da_r, c.x, g.w_reset);
  outer_add(da_r, c.s_prev, g.u_reset);
  for (std::size_t i = 0; i < h; ++i) {
    g.b_update[i] += da_z[i];
    g.b_reset[i] += da_r[i];
  }
  gemv_t_add(p.u_update, da_z, ds_prev);
  gemv_t_add(p.u_reset, da_r, ds_prev);

  std::fill(dx.begin(), dx.end(), 0.0);
  gemv_t_add(p.w_cand, da_c, dx);
  gemv_t_add(p.w_update, da_z, dx);
  gemv_t_add(p.w_reset, da_r, dx);
}

namespace {

std::vector<double> head_forward(const HeadView<const double>& head,
                                 std::span<const double> s) {
  std::vector<double> y(head.output);
  affine(head.weight, s, head.bias, y);
  return y;
}

}  // namespace

Tape network_forward_rollout(std::span<const double> initial_input, std::size_t n_steps,
                             const GruNetwork& net, std::optional<double> extra_input) {
  const NetworkShape& shape = net.shape();
  const std::size_t expected = initial_input.size() + (extra_input ? 1 : 0);
  if (expected != shape.input_size) {
    throw DimensionError("network_forward_rollout: input size " + std::to_string(expected) +
                         " does not match network input " + std::to_string(shape.input_size));
  }
  Tape tape;
  tape.steps.resize(n_steps);
  tape.outputs.reserve(n_steps);
  std::vector<std::vector<double>> state(shape.num_layers,
                                         std::vector<double>(shape.hidden_size, 0.0));
  std::vector<double> x(shape.input_size, 0.0);
  for (std::size_t j = 0; j < n_steps; ++j) {
    if (j == 0) {
      std::copy(initial_input.begin(), initial_input.end(), x.begin());
    } else {
      std::fill(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(initial_input.size()), 0.0);
    }
    if (extra_input) x.back() = *extra_input;
    tape.steps[j].resize(shape.num_layers);
    std::span<const double> in = x;
    for (std::size_t l = 0; l < shape.num_layers; ++l) {
      CellCache& cache = tape.steps[j][l];
      gru_cell_forward(in, state[l], net.cell(l), cache);
      state[l] = cache.s;
      in = cache.s;
    }
    tape.outputs.push_back(head_forward(net.head(), in));
  }
  return tape;
}

std::vector<std::vector<double>> replay(const Tape& tape, const GruNetwork& net) {
  const NetworkShape& shape = net.shape();
  std::vector<std::vector<double>> outputs;
  outputs.reserve(tape.n_steps());
  std::vector<std::vector<double>> state(shape.num_layers,
                                         std::vector<double>(shape.hidden_size, 0.0));
  for (const auto& step : tape.steps) {
    std::span<const double> in = step.at(0).x;
    CellCache cache;
    for (std::size_t l = 0; l < shape.num_layers; ++l) {
      gru_cell_forward(in, state[l], net.cell(l), cache);
      state[l] = cache.s;
      in = state[l];
    }
    outputs.push_back(head_forward(net.head(), in));
  }
  return outputs;
}

void backward(const Tape& tape, std::span<const std::vector<double>> output_grads,
              const GruNetwork& net, std::span<double> grads) {
  if (output_grads.size() != tape.n_steps()) {
    throw DimensionError("backward: " + std::to_string(output_grads.size()) +
                         " output gradients for " + std::to_string(tape.n_steps()) + " steps");
  }
  if (grads.size() != net.parameter_count()) {
    throw DimensionError("backward: gradient buffer has the wrong length");
  }
  const NetworkShape& shape = net.shape();
  const std::size_t h = shape.hidden_size;
  const std::size_t layers = shape.num_layers;
  const auto head = net.head();
  auto head_g = net.head_grads(grads);
  std::vector<GruCellGrads> cell_g;
  std::vector<GruCellParams> cell_p;
  for (std::size_t l = 0; l < layers; ++l) {
    cell_g.push_back(net.cell_grads(grads, l));
    cell_p.push_back(net.cell(l));
  }

  // carry[l] = dLoss/ds^l_j flowing back from step j+1.
  std::vector<std::vector<double>> carry(layers, std::vector<double>(h, 0.0));
  std::vector<double> ds(h), ds_prev(h), dx_hidden(h);
  std::vector<double> dx_input(shape.input_size);
  for (std::size_t jj = tape.n_steps(); jj-- > 0;) {
    const auto& dy = output_grads[jj];
    if (dy.size() != shape.output_size) {
      throw DimensionError("backward: output gradient length mismatch at step " +
                           std::to_string(jj));
    }
    const auto& top = tape.steps[jj][layers - 1];
    // Head.
    outer_add(dy, top.s, head_g.weight);
    for (std::size_t k = 0; k < dy.size(); ++k) head_g.bias[k] += dy[k];
    std::vector<double> from_above(h, 0.0);
    gemv_t_add(head.weight, dy, from_above);

    for (std::size_t l = layers; l-- > 0;) {
      for (std::size_t i = 0; i < h; ++i) ds[i] = carry[l][i] + from_above[i];
      std::span<double> dx = l == 0 ? std::span<double>(dx_input) : std::span<double>(dx_hidden);
      gru_cell_backward(tape.steps[jj][l], ds, cell_p[l], cell_g[l], dx, ds_prev);
      carry[l] = ds_prev;
      if (l > 0) from_above.assign(dx_hidden.begin(), dx_hidden.end());
    }
  }
}

std::vector<double> backward(const Tape& tape, std::span<const std::vector<double>> output_grads,
                             const GruNetwork& net) {
  std::vector<double> grads(net.parameter_count(), 0.0);
  backward(tape, output_grads, net, grads);
  return grads;
}

namespace {

void glorot_uniform(std::span<double> w, std::size_t fan_in, std::size_t fan_out,
                    std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (auto& x : w) x = dist(rng);
}

// Q factor of a Gaussian matrix by modified Gram-Schmidt; the implied R has a
// positive diagonal, which is the usual sign fix.
void random_orthogonal(std::span<double> u, std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> a(n * n);
  for (auto& x : a) x = normal(rng);
  // Orthonormalize columns of a (row-major), writing into u.
  std::vector<double> col(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) col[i] = a[i * n + k];
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t q = 0; q < k; ++q) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += u[i * n + q] * col[i];
        for (std::size_t i = 0; i < n; ++i) col[i] -= dot * u[i * n + q];
      }
    }
    double norm = 0.0;
    for (double c : col) norm += c * c;
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < n; ++i) u[i * n + k] = col[i] / norm;
  }
}

}  // namespace

GruNetwork init_params(const NetworkShape& shape, std::uint64_t seed) {
  GruNetwork net(shape);
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < shape.num_layers; ++l) {
    GruCellGrads c = net.mutable_cell(l);
    glorot_uniform(c.w_update, c.input, c.hidden, rng);
    glorot_uniform(c.w_reset, c.input, c.hidden, rng);
    glorot_uniform(c.w_cand, c.input, c.hidden, rng);
    random_orthogonal(c.u_update, c.hidden, rng);
    random_orthogonal(c.u_reset, c.hidden, rng);
    random_orthogonal(c.u_cand, c.hidden, rng);
  }
  auto head = net.mutable_head();
  glorot_uniform(head.weight, head.input, head.output, rng);
  return net;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& st,
               std::span<const std::uint8_t> decay_mask, double weight_decay) {
  if (grads.size() != params.size() || st.m.size() != params.size() ||
      st.v.size() != params.size()) {
    throw DimensionError("adam_step: parameter, gradient and moment sizes differ");
  }
  if (!decay_mask.empty() && decay_mask.size() != params.size()) {
    throw DimensionError("adam_step: decay mask has the wrong length");
  }
  ++st.step;
  const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    double g = grads[i];
    if (!decay_mask.empty() && decay_mask[i]) g += 2.0 * weight_decay * params[i];
    st.m[i] = st.beta1 * st.m[i] + (1.0 - st.beta1) * g;
    st.v[i] = st.beta2 * st.v[i] + (1.0 - st.beta2) * g * g;
    const double m_hat = st.m[i] / bc1;
    const double v_hat = st.v[i] / bc2;
    params[i] -= st.learning_rate * m_hat / (std::sqrt(v_hat) + st.epsilon);
  }
}

}  // namespace qrnme::neural
