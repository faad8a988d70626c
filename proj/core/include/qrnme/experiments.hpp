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

// End-to-end experiment drivers: dataset generation, training, held-out
// evaluation and the untrained baseline.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qrnme/dynamics.hpp"
#include "qrnme/neural.hpp"
#include "qrnme/qrn.hpp"

namespace qrnme::experiments {

using dynamics::DecayParams;
using dynamics::DensityMatrix;
using dynamics::Trajectory;

enum class Mode { state_predictor, master_equation };

struct ExperimentConfig {
  int experiment = 1;
  std::size_t n_train = 500;
  std::size_t n_test = 100;
  double dt = 0.01;
  double t_max = 0.7;
  double t_eval = 1.0;

  double omega = 1.0;
  DecayParams decay1{0.5, 2.0};
  DecayParams decay2{0.2, 1.0};
  dynamics::Couplings couplings{};
  double omega_min = 0.5;
  double omega_max = 1.5;

  std::size_t mu_count = 1;
  bool include_lamb_shift = false;

  std::uint64_t seed = 2020;
  std::size_t epochs = 60;
  std::size_t batch_size = 32;
  double learning_rate = 0.01;
  double weight_decay = 0.0;
  std::size_t hidden = 40;
  unsigned threads = 0;  // 0: hardware concurrency

  // Desk-scale defaults for experiment 1..5.
  static ExperimentConfig defaults(int experiment);

  void validate() const;
  Mode mode() const;
  bool two_qubit() const { return experiment >= 3; }
  bool omega_conditioned() const { return experiment == 5; }
  std::size_t train_steps() const;
  std::size_t eval_steps() const;
  std::size_t state_dim() const { return 2; }
  std::size_t input_size() const;
  std::size_t output_size() const;
  neural::NetworkShape network_shape() const;
  // Master-equation settings for a record with qubit frequency `omega`.
  qrn::QrnConfig qrn_config(double omega) const;
};

struct Record {
  std::optional<double> omega;
  Trajectory trajectory;
};

struct Dataset {
  int experiment = 1;
  std::size_t dim = 2;
  double dt = 0.01;
  std::size_t n_steps = 0;
  std::uint64_t seed = 0;
  std::string split = "train";
  // Generating parameters.
  double omega = 1.0;
  DecayParams decay1{};
  DecayParams decay2{};
  dynamics::Couplings couplings{};
  double omega_min = 0.5;
  double omega_max = 1.5;

  std::vector<Record> records;

  // Throws SchemaError unless every record has n_steps + 1 valid states.
  void validate() const;
};

enum class Split { train, test };

// Independent seed for record `index` of a split.
std::uint64_t record_seed(std::uint64_t seed, Split split, std::size_t index);

Dataset generate_dataset(const ExperimentConfig& cfg, Split split, std::size_t count,
                         std::size_t n_steps);

// Ground-truth trajectory for one initial state (two-qubit experiments take a
// 4x4 initial state and return qubit-1 marginals).
Trajectory ground_truth(const ExperimentConfig& cfg, const DensityMatrix& initial,
                        double omega, std::size_t n_steps, double dt);

struct TrainingState {
  neural::GruNetwork net;
  neural::AdamState adam;
  std::size_t epoch = 0;
  std::vector<double> epoch_losses;
};

TrainingState init_training(const ExperimentConfig& cfg);

struct LossAndGrad {
  double loss = 0.0;
  std::vector<double> grads;
};

// Per-example objective (mean over the record's steps) and its gradient.
LossAndGrad example_loss_and_grad(const neural::GruNetwork& net, const Record& record,
                                  const ExperimentConfig& cfg);

// Runs one pass over `train` in shuffled mini-batches (shuffle seeded by
// cfg.seed and the epoch index) and returns the mean example loss. Throws
// DivergenceError on a non-finite batch loss.
double train_epoch(TrainingState& state, const Dataset& train, const ExperimentConfig& cfg);

using EpochCallback = std::function<void(const TrainingState&)>;

// Trains until state.epoch == cfg.epochs.
void train(TrainingState& state, const Dataset& train, const ExperimentConfig& cfg,
           const EpochCallback& on_epoch = {});

struct MetricsCurve {
  std::string metric;  // "trace_distance" or "cost"
  std::vector<double> times;
  std::vector<double> values;
  std::size_t samples = 0;

  double mean_over(double t_lo, double t_hi) const;
  double max_over(double t_lo, double t_hi) const;
};

// Mean trace distance between predicted and true states at t_1..t_n.
MetricsCurve evaluate_state_predictor(const neural::GruNetwork& net, const Dataset& test,
                                      const ExperimentConfig& cfg, std::size_t n_steps);

// Mean teacher-forced residual per transition at t_0..t_{n-1}.
MetricsCurve evaluate_master_equation(const neural::GruNetwork& net, const Dataset& test,
                                      const ExperimentConfig& cfg, std::size_t n_steps);

MetricsCurve evaluate(const neural::GruNetwork& net, const Dataset& test,
                      const ExperimentConfig& cfg, std::size_t n_steps);

// Mean |L_ik(t_j)| over held-out records for the first Lindblad operator.
struct OperatorTrace {
  std::vector<double> times;
  std::size_t dim = 2;
  std::vector<std::vector<double>> magnitudes;  // [j][i * dim + k]
  std::vector<double> reference;                // sqrt(gamma(t_j))
};

OperatorTrace trace_operators(const neural::GruNetwork& net, const Dataset& test,
                              const ExperimentConfig& cfg, std::size_t n_steps);

struct ExperimentResult {
  ExperimentConfig config;
  MetricsCurve trained;
  MetricsCurve baseline;  // same architecture at its initialization
  std::vector<double> epoch_losses;
  std::optional<OperatorTrace> operators;
  neural::GruNetwork net;
};

ExperimentResult run_exp1(const ExperimentConfig& cfg);
ExperimentResult run_exp2(const ExperimentConfig& cfg);
ExperimentResult run_exp3(const ExperimentConfig& cfg);

struct Exp4Result {
  ExperimentResult lindblad_only;
  ExperimentResult with_lamb_shift;
};
Exp4Result run_exp4(const ExperimentConfig& cfg);
ExperimentResult run_exp5(const ExperimentConfig& cfg);

// Generic driver behind the run_exp* entry points.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace qrnme::experiments
