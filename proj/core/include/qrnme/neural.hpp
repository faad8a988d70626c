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

// Stacked GRU network with a linear read-out head, backpropagation through
// time and an Adam optimizer. All parameters live in one flat buffer so the
// optimizer and checkpointing see a single vector; typed views slice it.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qrnme::neural {

struct NetworkShape {
  std::size_t input_size = 0;
  std::size_t hidden_size = 40;
  std::size_t output_size = 0;
  std::size_t num_layers = 2;

  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

// Gate weights of one GRU cell. Input matrices are hidden x input, recurrent
// matrices hidden x hidden, both row-major.
template <class T>
struct CellView {
  std::size_t input = 0;
  std::size_t hidden = 0;
  std::span<T> w_update, w_reset, w_cand;
  std::span<T> u_update, u_reset, u_cand;
  std::span<T> b_update, b_reset, b_cand;
};
using GruCellParams = CellView<const double>;
using GruCellGrads = CellView<double>;

template <class T>
struct HeadView {
  std::size_t input = 0;
  std::size_t output = 0;
  std::span<T> weight;  // output x input
  std::span<T> bias;
};

// One named contiguous block of the flat parameter vector.
struct ParameterBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 0;
  bool is_weight = false;  // matrix (true) or bias (false)

  friend bool operator==(const ParameterBlock&, const ParameterBlock&) = default;
};

class GruNetwork {
 public:
  GruNetwork() = default;
  explicit GruNetwork(NetworkShape shape);

  const NetworkShape& shape() const noexcept { return shape_; }
  std::size_t parameter_count() const noexcept { return params_.size(); }
  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }

  // Blocks in their fixed storage order: layer cells, then the head.
  const std::vector<ParameterBlock>& blocks() const noexcept { return blocks_; }

  GruCellParams cell(std::size_t layer) const { return cell_view<const double>(params_, layer); }
  HeadView<const double> head() const { return head_view<const double>(params_); }

  // Views into any buffer laid out like the parameters (e.g. gradients).
  GruCellGrads cell_grads(std::span<double> flat, std::size_t layer) const {
    return cell_view<double>(flat, layer);
  }
  HeadView<double> head_grads(std::span<double> flat) const { return head_view<double>(flat); }
  GruCellGrads mutable_cell(std::size_t layer) { return cell_view<double>(params_, layer); }
  HeadView<double> mutable_head() { return head_view<double>(params_); }

  // 1 for the fully connected weight matrix, 0 elsewhere.
  std::vector<std::uint8_t> head_weight_mask() const;

  friend bool operator==(const GruNetwork&, const GruNetwork&) = default;

 private:
  template <class T, class Buf>
  CellView<T> cell_view(Buf&& flat, std::size_t layer) const;
  template <class T, class Buf>
  HeadView<T> head_view(Buf&& flat) const;

  NetworkShape shape_;
  std::vector<double> params_;
  std::vector<ParameterBlock> blocks_;
};

template <class T, class Buf>
CellView<T> GruNetwork::cell_view(Buf&& flat, std::size_t layer) const {
  const std::size_t base = layer * 9;
  auto block = [&](std::size_t k) {
    const ParameterBlock& b = blocks_.at(base + k);
    return std::span<T>(flat.data() + b.offset, b.size);
  };
  CellView<T> v;
  v.input = layer == 0 ? shape_.input_size : shape_.hidden_size;
  v.hidden = shape_.hidden_size;
  v.w_update = block(0);
  v.w_reset = block(1);
  v.w_cand = block(2);
  v.u_update = block(3);
  v.u_reset = block(4);
  v.u_cand = block(5);
  v.b_update = block(6);
  v.b_reset = block(7);
  v.b_cand = block(8);
  return v;
}

template <class T, class Buf>
HeadView<T> GruNetwork::head_view(Buf&& flat) const {
  const ParameterBlock& w = blocks_.at(blocks_.size() - 2);
  const ParameterBlock& b = blocks_.back();
  return {shape_.hidden_size, shape_.output_size,
          std::span<T>(flat.data() + w.offset, w.size),
          std::span<T>(flat.data() + b.offset, b.size)};
}

struct CellCache {
  std::vector<double> x, s_prev, z, r, cand, s;
};

// One GRU step: z and r gates, candidate state, interpolation. Writes all
// intermediates into `cache` (its `s` holds the new state).
void gru_cell_forward(std::span<const double> x, std::span<const double> s_prev,
                      const GruCellParams& p, CellCache& cache);
CellCache gru_cell_forward(std::span<const double> x, std::span<const double> s_prev,
                           const GruCellParams& p);

// Gradient of one cell step. `ds` is dLoss/ds; accumulates into `grads` and
// writes dLoss/dx and dLoss/ds_prev.
void gru_cell_backward(const CellCache& cache, std::span<const double> ds,
                       const GruCellParams& p, GruCellGrads& grads, std::span<double> dx,
                       std::span<double> ds_prev);

struct Tape {
  // steps[j][layer]
  std::vector<std::vector<CellCache>> steps;
  std::vector<std::vector<double>> outputs;

  std::size_t n_steps() const { return steps.size(); }
};

// One-to-many rollout: the encoded initial state enters at step 0, zero
// vectors afterwards; `extra_input`, when present, is appended at every step.
// Hidden states start at zero. Output j is head(s_top_j).
Tape network_forward_rollout(std::span<const double> initial_input, std::size_t n_steps,
                             const GruNetwork& net,
                             std::optional<double> extra_input = std::nullopt);

// Re-evaluates the recorded inputs through the network, returning outputs.
std::vector<std::vector<double>> replay(const Tape& tape, const GruNetwork& net);

// Full BPTT. `output_grads[j]` is dLoss/d(output j). Accumulates into `grads`
// (length parameter_count()).
void backward(const Tape& tape, std::span<const std::vector<double>> output_grads,
              const GruNetwork& net, std::span<double> grads);
std::vector<double> backward(const Tape& tape,
                             std::span<const std::vector<double>> output_grads,
                             const GruNetwork& net);

// Glorot-uniform input and head weights, orthogonal recurrent matrices,
// zero biases.
GruNetwork init_params(const NetworkShape& shape, std::uint64_t seed);

struct AdamState {
  long step = 0;
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::vector<double> m;
  std::vector<double> v;

  AdamState() = default;
  AdamState(std::size_t n, double lr) : learning_rate(lr), m(n, 0.0), v(n, 0.0) {}

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

// Bias-corrected Adam update in place. Entries with decay_mask[i] != 0 get
// 2 * weight_decay * w added to their gradient first (L2 penalty).
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               std::span<const std::uint8_t> decay_mask = {}, double weight_decay = 0.0);

}  // namespace qrnme::neural
