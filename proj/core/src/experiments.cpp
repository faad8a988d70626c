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

#include "qrnme/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "qrnme/errors.hpp"
#include "qrnme/parallel.hpp"

namespace qrnme::experiments {

using linalg::CMatrix;
using linalg::Complex;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::size_t steps_for(double horizon, double dt) {
  return static_cast<std::size_t>(std::llround(horizon / dt));
}

// Qubit-1 initial state paired with the ancilla in its ground state |1><1|.
DensityMatrix with_ground_ancilla(const DensityMatrix& rho1) {
  return DensityMatrix::unchecked(linalg::kron(rho1.mat(), CMatrix::unit(2, 1, 1)));
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults(int experiment) {
  ExperimentConfig cfg;
  cfg.experiment = experiment;
  switch (experiment) {
    case 1:
    case 3:
      break;
    case 2:
      cfg.weight_decay = 0.001;
      break;
    case 4:
      break;
    case 5:
      cfg.mu_count = 2;
      cfg.include_lamb_shift = true;
      break;
    default:
      throw std::invalid_argument("experiment id must be in 1..5, got " +
                                  std::to_string(experiment));
  }
  return cfg;
}

void ExperimentConfig::validate() const {
  if (experiment < 1 || experiment > 5) {
    throw std::invalid_argument("experiment id must be in 1..5");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
  if (t_eval < t_max) throw std::invalid_argument("t_eval must be >= t_max");
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  if (hidden == 0) throw std::invalid_argument("hidden size must be positive");
  if (mu_count == 0) throw std::invalid_argument("mu must be at least 1");
  if (omega_max < omega_min) throw std::invalid_argument("omega range is reversed");
}

Mode ExperimentConfig::mode() const {
  return (experiment == 1 || experiment == 3) ? Mode::state_predictor : Mode::master_equation;
}

std::size_t ExperimentConfig::train_steps() const { return steps_for(t_max, dt); }
std::size_t ExperimentConfig::eval_steps() const { return steps_for(t_eval, dt); }

std::size_t ExperimentConfig::input_size() const {
  return 2 * state_dim() * state_dim() + (omega_conditioned() ? 1 : 0);
}

std::size_t ExperimentConfig::output_size() const {
  if (mode() == Mode::state_predictor) return 2 * state_dim() * state_dim();
  return qrn_config(omega).output_size();
}

neural::NetworkShape ExperimentConfig::network_shape() const {
  return {input_size(), hidden, output_size(), 2};
}

qrn::QrnConfig ExperimentConfig::qrn_config(double w) const {
  qrn::QrnConfig q;
  q.dim = state_dim();
  q.mu_count = mu_count;
  q.include_lamb_shift = include_lamb_shift;
  q.rk_order = 1;
  q.dt = dt;
  q.known_hamiltonian = dynamics::ops::sigma_z() * Complex{w, 0.0};
  return q;
}

void Dataset::validate() const {
  for (std::size_t a = 0; a < records.size(); ++a) {
    const auto& traj = records[a].trajectory;
    if (traj.states.size() != n_steps + 1) {
      throw SchemaError("record " + std::to_string(a) + " has " +
                        std::to_string(traj.states.size()) + " states, header says " +
                        std::to_string(n_steps + 1));
    }
    for (const auto& s : traj.states) {
      if (s.dim() != dim) throw SchemaError("record " + std::to_string(a) + ": wrong dimension");
      if (!dynamics::diagnose_state(s.mat()).ok()) {
        throw SchemaError("record " + std::to_string(a) + ": invalid density matrix");
      }
    }
    if (experiment == 5 && !records[a].omega) {
      throw SchemaError("record " + std::to_string(a) + ": missing omega");
    }
  }
}

std::uint64_t record_seed(std::uint64_t seed, Split split, std::size_t index) {
  const std::uint64_t stream = split == Split::train ? 0x7261696eULL : 0x74657374ULL;
  return splitmix64(splitmix64(seed ^ (stream << 32)) + index);
}

Trajectory ground_truth(const ExperimentConfig& cfg, const DensityMatrix& initial,
                        double omega, std::size_t n_steps, double dt) {
  if (!cfg.two_qubit()) {
    return dynamics::generate_trajectory(initial, dynamics::two_level_model(omega, cfg.decay1),
                                         dt, n_steps);
  }
  const auto model = dynamics::two_qubit_model(omega, cfg.couplings, cfg.decay1, cfg.decay2);
  const DensityMatrix full = initial.dim() == 4 ? initial : with_ground_ancilla(initial);
  return dynamics::generate_reduced_trajectory(full, model, dt, n_steps);
}

Dataset generate_dataset(const ExperimentConfig& cfg, Split split, std::size_t count,
                         std::size_t n_steps) {
  cfg.validate();
  Dataset ds;
  ds.experiment = cfg.experiment;
  ds.dim = cfg.state_dim();
  ds.dt = cfg.dt;
  ds.n_steps = n_steps;
  ds.seed = cfg.seed;
  ds.split = split == Split::train ? "train" : "test";
  ds.omega = cfg.omega;
  ds.decay1 = cfg.decay1;
  ds.decay2 = cfg.decay2;
  ds.couplings = cfg.couplings;
  ds.omega_min = cfg.omega_min;
  ds.omega_max = cfg.omega_max;
  ds.records.resize(count);
  parallel_for(count, cfg.threads, [&](std::size_t a) {
    std::mt19937_64 rng(record_seed(cfg.seed, split, a));
    Record rec;
    double omega = cfg.omega;
    if (cfg.omega_conditioned()) {
      std::uniform_real_distribution<double> dist(cfg.omega_min, cfg.omega_max);
      omega = cfg.omega_min == cfg.omega_max ? cfg.omega_min : dist(rng);
      rec.omega = omega;
    }
    const DensityMatrix rho0 = dynamics::sample_random_state(2, rng);
    rec.trajectory = ground_truth(cfg, rho0, omega, n_steps, cfg.dt);
    ds.records[a] = std::move(rec);
  });
  return ds;
}

TrainingState init_training(const ExperimentConfig& cfg) {
  TrainingState st;
  st.net = neural::init_params(cfg.network_shape(), splitmix64(cfg.seed ^ 0x6e6574ULL));
  if (cfg.mode() == Mode::state_predictor) {
    // Zero inputs after step 0 let an untrained hidden state decay to zero;
    // an identity bias keeps A A^+ away from the degenerate point.
    const auto eye = qrn::encode_complex(CMatrix::identity(cfg.state_dim()));
    auto head = st.net.mutable_head();
    std::copy(eye.begin(), eye.end(), head.bias.begin());
  }
  st.adam = neural::AdamState(st.net.parameter_count(), cfg.learning_rate);
  return st;
}

namespace {

double record_omega(const Record& rec, const ExperimentConfig& cfg) {
  return rec.omega.value_or(cfg.omega);
}

std::optional<double> extra_input(const Record& rec, const ExperimentConfig& cfg) {
  if (!cfg.omega_conditioned()) return std::nullopt;
  return record_omega(rec, cfg);
}

}  // namespace

LossAndGrad example_loss_and_grad(const neural::GruNetwork& net, const Record& record,
                                  const ExperimentConfig& cfg) {
  const std::size_t n = cfg.train_steps();
  const auto& states = record.trajectory.states;
  if (states.size() < n + 1) {
    throw SchemaError("record shorter than the training horizon (" +
                      std::to_string(states.size() - 1) + " < " + std::to_string(n) +
                      " steps)");
  }
  const std::size_t d = cfg.state_dim();
  const auto input = qrn::network_input(states.front());
  const neural::Tape tape =
      neural::network_forward_rollout(input, n, net, extra_input(record, cfg));

  LossAndGrad out;
  std::vector<std::vector<double>> out_grads(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  if (cfg.mode() == Mode::state_predictor) {
    for (std::size_t j = 0; j < n; ++j) {
      const CMatrix a = qrn::decode_complex(tape.outputs[j], d);
      const DensityMatrix pred = qrn::density_from_output(a);
      const CMatrix diff = pred.mat() - states[j + 1].mat();
      out.loss += linalg::frobenius_norm_sq(diff) * inv_n;
      const CMatrix grad_rho = diff * Complex{2.0 * inv_n, 0.0};
      out_grads[j] = qrn::encode_gradient(qrn::density_from_output_grad(a, grad_rho));
    }
  } else {
    const qrn::QrnConfig qcfg = cfg.qrn_config(record_omega(record, cfg));
    std::vector<qrn::QrnOutput> ops;
    ops.reserve(n);
    for (const auto& o : tape.outputs) ops.push_back(qrn::decode_output(o, qcfg));
    const Trajectory target = record.trajectory.truncated(n);
    const qrn::ResidualCost cost = qrn::cost_residual(target, ops, qcfg);
    out.loss = cost.value;
    for (std::size_t j = 0; j < n; ++j) out_grads[j] = qrn::output_gradient(cost.grads[0][j], qcfg);
  }
  out.grads = neural::backward(tape, out_grads, net);
  return out;
}

double train_epoch(TrainingState& st, const Dataset& train, const ExperimentConfig& cfg) {
  const std::size_t n = train.records.size();
  if (n == 0) throw std::invalid_argument("empty dataset");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffle_rng(splitmix64(cfg.seed ^ splitmix64(0x5348554646ULL + st.epoch)));
  std::shuffle(order.begin(), order.end(), shuffle_rng);

  const std::vector<std::uint8_t> mask =
      cfg.weight_decay > 0.0 ? st.net.head_weight_mask() : std::vector<std::uint8_t>{};
  const std::size_t p = st.net.parameter_count();
  std::vector<LossAndGrad> slots(cfg.batch_size);
  std::vector<double> grad(p);
  double epoch_loss = 0.0;
  for (std::size_t start = 0; start < n; start += cfg.batch_size) {
    const std::size_t count = std::min(cfg.batch_size, n - start);
    parallel_for(count, cfg.threads, [&](std::size_t k) {
      slots[k] = example_loss_and_grad(st.net, train.records[order[start + k]], cfg);
    });
    std::fill(grad.begin(), grad.end(), 0.0);
    double batch_loss = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
      batch_loss += slots[k].loss;
      for (std::size_t i = 0; i < p; ++i) grad[i] += slots[k].grads[i];
    }
    const double inv = 1.0 / static_cast<double>(count);
    batch_loss *= inv;
    for (auto& g : grad) g *= inv;
    if (!std::isfinite(batch_loss) ||
        !std::all_of(grad.begin(), grad.end(), [](double g) { return std::isfinite(g); })) {
      throw DivergenceError("non-finite loss in epoch " + std::to_string(st.epoch + 1) +
                                " at optimizer step " + std::to_string(st.adam.step + 1),
                            st.adam.step + 1);
    }
    neural::adam_step(st.net.parameters(), grad, st.adam, mask, cfg.weight_decay);
    epoch_loss += batch_loss * static_cast<double>(count);
  }
  ++st.epoch;
  const double mean = epoch_loss / static_cast<double>(n);
  st.epoch_losses.push_back(mean);
  return mean;
}

void train(TrainingState& st, const Dataset& data, const ExperimentConfig& cfg,
           const EpochCallback& on_epoch) {
  while (st.epoch < cfg.epochs) {
    train_epoch(st, data, cfg);
    if (on_epoch) on_epoch(st);
  }
}

double MetricsCurve::mean_over(double t_lo, double t_hi) const {
  double s = 0.0;
  std::size_t k = 0;
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (times[j] >= t_lo - 1e-12 && times[j] <= t_hi + 1e-12) {
      s += values[j];
      ++k;
    }
  }
  return k == 0 ? std::numeric_limits<double>::quiet_NaN() : s / static_cast<double>(k);
}

double MetricsCurve::max_over(double t_lo, double t_hi) const {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < times.size(); ++j)
    if (times[j] >= t_lo - 1e-12 && times[j] <= t_hi + 1e-12) m = std::max(m, values[j]);
  return m;
}

namespace {

void require_horizon(const Dataset& test, std::size_t n_steps) {
  if (test.n_steps < n_steps) {
    throw SchemaError("dataset holds " + std::to_string(test.n_steps) +
                      " steps, evaluation needs " + std::to_string(n_steps));
  }
}

}  // namespace

MetricsCurve evaluate_state_predictor(const neural::GruNetwork& net, const Dataset& test,
                                      const ExperimentConfig& cfg, std::size_t n_steps) {
  require_horizon(test, n_steps);
  const std::size_t m = test.records.size();
  std::vector<std::vector<double>> per(m);
  parallel_for(m, cfg.threads, [&](std::size_t a) {
    const Record& rec = test.records[a];
    const Trajectory pred = qrn::rollout_state_predictor(rec.trajectory.states.front(), net,
                                                         n_steps, cfg.dt, extra_input(rec, cfg));
    per[a].resize(n_steps);
    for (std::size_t j = 1; j <= n_steps; ++j) {
      per[a][j - 1] = dynamics::trace_distance(pred.states[j], rec.trajectory.states[j]);
    }
  });
  MetricsCurve c;
  c.metric = "trace_distance";
  c.samples = m;
  c.times.resize(n_steps);
  c.values.assign(n_steps, 0.0);
  for (std::size_t j = 0; j < n_steps; ++j) c.times[j] = static_cast<double>(j + 1) * cfg.dt;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t j = 0; j < n_steps; ++j) c.values[j] += per[a][j] / static_cast<double>(m);
  return c;
}

MetricsCurve evaluate_master_equation(const neural::GruNetwork& net, const Dataset& test,
                                      const ExperimentConfig& cfg, std::size_t n_steps) {
  require_horizon(test, n_steps);
  const std::size_t m = test.records.size();
  std::vector<std::vector<double>> per(m);
  parallel_for(m, cfg.threads, [&](std::size_t a) {
    const Record& rec = test.records[a];
    const qrn::QrnConfig qcfg = cfg.qrn_config(record_omega(rec, cfg));
    const auto ops = qrn::predict_operators(rec.trajectory.states.front(), net, qcfg, n_steps,
                                            extra_input(rec, cfg));
    per[a] = qrn::cost_residual(rec.trajectory.truncated(n_steps), ops, qcfg).per_step;
  });
  MetricsCurve c;
  c.metric = "cost";
  c.samples = m;
  c.times.resize(n_steps);
  c.values.assign(n_steps, 0.0);
  for (std::size_t j = 0; j < n_steps; ++j) c.times[j] = static_cast<double>(j) * cfg.dt;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t j = 0; j < n_steps; ++j) c.values[j] += per[a][j] / static_cast<double>(m);
  return c;
}

MetricsCurve evaluate(const neural::GruNetwork& net, const Dataset& test,
                      const ExperimentConfig& cfg, std::size_t n_steps) {
  return cfg.mode() == Mode::state_predictor
             ? evaluate_state_predictor(net, test, cfg, n_steps)
             : evaluate_master_equation(net, test, cfg, n_steps);
}

OperatorTrace trace_operators(const neural::GruNetwork& net, const Dataset& test,
                              const ExperimentConfig& cfg, std::size_t n_steps) {
  if (cfg.mode() != Mode::master_equation) {
    throw std::invalid_argument("trace_operators: not a master-equation experiment");
  }
  const std::size_t d = cfg.state_dim();
  const std::size_t m = test.records.size();
  std::vector<std::vector<qrn::QrnOutput>> ops(m);
  parallel_for(m, cfg.threads, [&](std::size_t a) {
    const Record& rec = test.records[a];
    ops[a] = qrn::predict_operators(rec.trajectory.states.front(), net,
                                    cfg.qrn_config(record_omega(rec, cfg)), n_steps,
                                    extra_input(rec, cfg));
  });
  OperatorTrace tr;
  tr.dim = d;
  tr.times.resize(n_steps);
  tr.reference.resize(n_steps);
  tr.magnitudes.assign(n_steps, std::vector<double>(d * d, 0.0));
  for (std::size_t j = 0; j < n_steps; ++j) {
    tr.times[j] = static_cast<double>(j) * cfg.dt;
    tr.reference[j] = std::sqrt(std::max(0.0, dynamics::decay_rate(tr.times[j], cfg.decay1)));
    for (std::size_t a = 0; a < m; ++a) {
      const CMatrix& l = ops[a][j].lindblads.front();
      for (std::size_t k = 0; k < d * d; ++k)
        tr.magnitudes[j][k] += std::abs(l.data()[k]) / static_cast<double>(m);
    }
  }
  return tr;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.n_train == 0) throw std::invalid_argument("empty dataset: n_train is 0");
  if (cfg.n_test == 0) throw std::invalid_argument("empty dataset: n_test is 0");
  const Dataset train_set = generate_dataset(cfg, Split::train, cfg.n_train, cfg.train_steps());
  const Dataset test_set = generate_dataset(cfg, Split::test, cfg.n_test, cfg.eval_steps());

  TrainingState st = init_training(cfg);
  ExperimentResult res;
  res.config = cfg;
  res.baseline = evaluate(st.net, test_set, cfg, cfg.eval_steps());
  train(st, train_set, cfg);
  res.trained = evaluate(st.net, test_set, cfg, cfg.eval_steps());
  res.epoch_losses = st.epoch_losses;
  if (cfg.experiment == 2) res.operators = trace_operators(st.net, test_set, cfg, cfg.eval_steps());
  res.net = std::move(st.net);
  return res;
}

namespace {

void require_id(const ExperimentConfig& cfg, int id) {
  if (cfg.experiment != id) {
    throw std::invalid_argument("config is for experiment " + std::to_string(cfg.experiment) +
                                ", expected " + std::to_string(id));
  }
}

}  // namespace

ExperimentResult run_exp1(const ExperimentConfig& cfg) {
  require_id(cfg, 1);
  return run_experiment(cfg);
}

ExperimentResult run_exp2(const ExperimentConfig& cfg) {
  require_id(cfg, 2);
  if (!cfg.decay1.markovian()) {
    throw std::invalid_argument("experiment 2 needs Markovian parameters (lambda > 2 gamma0)");
  }
  return run_experiment(cfg);
}

ExperimentResult run_exp3(const ExperimentConfig& cfg) {
  require_id(cfg, 3);
  return run_experiment(cfg);
}

Exp4Result run_exp4(const ExperimentConfig& cfg) {
  require_id(cfg, 4);
  ExperimentConfig only_l = cfg;
  only_l.include_lamb_shift = false;
  ExperimentConfig with_ls = cfg;
  with_ls.include_lamb_shift = true;
  return {run_experiment(only_l), run_experiment(with_ls)};
}

ExperimentResult run_exp5(const ExperimentConfig& cfg) {
  require_id(cfg, 5);
  return run_experiment(cfg);
}

}  // namespace qrnme::experiments
