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

#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <optional>
#include <sstream>

#include "qrnme/errors.hpp"
#include "qrnme/experiments.hpp"
#include "qrnme/io.hpp"
#include "qrnme/qrn.hpp"

namespace qrnme::cli {

namespace {

namespace fs = std::filesystem;
using dynamics::DensityMatrix;
using experiments::Dataset;
using experiments::ExperimentConfig;
using experiments::Mode;

struct Flags {
  std::optional<int> exp;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string dataset;
  std::string checkpoint;
  std::optional<std::size_t> n;
  std::optional<double> dt;
  std::optional<double> t_max;
  std::optional<double> t_eval;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch;
  std::optional<double> lr;
  std::optional<std::size_t> mu;
  bool lamb_shift = false;
  std::optional<std::string> omega_range;
  std::optional<double> weight_decay;
  std::optional<double> omega;
  std::string split = "train";
  std::string log;
  std::string rho0;
  unsigned threads = 0;
};

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::pair<double, double> parse_range(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw UsageError("--omega-range expects lo:hi, got " + s);
  try {
    return {std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1))};
  } catch (const std::exception&) {
    throw UsageError("--omega-range expects lo:hi, got " + s);
  }
}

std::vector<double> parse_reals(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      v.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw UsageError("--rho0: not a number: " + item);
    }
  }
  return v;
}

// Flags shared by every command that builds an ExperimentConfig.
void apply_training_flags(ExperimentConfig& cfg, const Flags& f) {
  if (f.seed) cfg.seed = *f.seed;
  if (f.t_max) cfg.t_max = *f.t_max;
  if (f.t_eval) cfg.t_eval = *f.t_eval;
  if (f.epochs) cfg.epochs = *f.epochs;
  if (f.batch) cfg.batch_size = *f.batch;
  if (f.lr) cfg.learning_rate = *f.lr;
  if (f.mu) cfg.mu_count = *f.mu;
  if (f.lamb_shift) cfg.include_lamb_shift = true;
  if (f.weight_decay) cfg.weight_decay = *f.weight_decay;
  cfg.threads = f.threads;
}

void copy_model(ExperimentConfig& cfg, const Dataset& ds) {
  cfg.dt = ds.dt;
  cfg.omega = ds.omega;
  cfg.decay1 = ds.decay1;
  cfg.decay2 = ds.decay2;
  cfg.couplings = ds.couplings;
  cfg.omega_min = ds.omega_min;
  cfg.omega_max = ds.omega_max;
}

void require_match(const ExperimentConfig& cfg, const Dataset& ds) {
  if (ds.experiment != cfg.experiment) {
    throw SchemaError("dataset is for experiment " + std::to_string(ds.experiment) +
                      ", checkpoint for experiment " + std::to_string(cfg.experiment));
  }
  if (ds.dt != cfg.dt) {
    throw SchemaError("dataset dt " + std::to_string(ds.dt) + " differs from checkpoint dt " +
                      std::to_string(cfg.dt));
  }
  if (ds.dim != cfg.state_dim()) throw SchemaError("dataset state dimension mismatch");
}

std::size_t steps(double horizon, double dt) {
  return static_cast<std::size_t>(std::llround(horizon / dt));
}

int cmd_generate(const Flags& f, std::ostream& out) {
  if (!f.exp) throw UsageError("generate: --exp is required");
  if (f.out.empty()) throw UsageError("generate: --out is required");
  ExperimentConfig cfg = ExperimentConfig::defaults(*f.exp);
  if (f.seed) cfg.seed = *f.seed;
  if (f.dt) cfg.dt = *f.dt;
  if (f.t_eval) cfg.t_eval = *f.t_eval;
  if (f.t_max) cfg.t_max = *f.t_max;
  // Only the horizon matters here.
  if (!f.t_max) cfg.t_max = std::min(cfg.t_max, cfg.t_eval);
  if (f.omega_range) std::tie(cfg.omega_min, cfg.omega_max) = parse_range(*f.omega_range);
  cfg.threads = f.threads;
  experiments::Split split;
  if (f.split == "train") {
    split = experiments::Split::train;
  } else if (f.split == "test") {
    split = experiments::Split::test;
  } else {
    throw UsageError("--split must be train or test");
  }
  const std::size_t count = f.n.value_or(split == experiments::Split::train ? cfg.n_train
                                                                            : cfg.n_test);
  const Dataset ds = experiments::generate_dataset(cfg, split, count, cfg.eval_steps());

  std::size_t passed = 0;
  for (const auto& rec : ds.records) {
    bool ok = true;
    for (const auto& s : rec.trajectory.states) ok = ok && dynamics::diagnose_state(s.mat()).ok();
    passed += ok ? 1 : 0;
  }
  out << "generated " << count << " trajectories (experiment " << cfg.experiment << ", "
      << f.split << ", " << ds.n_steps << " steps of dt " << cfg.dt << ")\n"
      << "invariant checks passed: " << passed << "/" << count << "\n";
  if (passed != count) throw InvariantError("generated states violate density-matrix checks");
  io::write_dataset(f.out, ds);
  return kOk;
}

int cmd_train(const Flags& f, std::ostream& out, std::ostream& err) {
  if (f.dataset.empty()) throw UsageError("train: --dataset is required");
  if (f.out.empty()) throw UsageError("train: --out is required");
  const Dataset ds = io::read_dataset(f.dataset);

  io::Checkpoint ckpt;
  if (!f.checkpoint.empty()) {
    ckpt = io::read_checkpoint(f.checkpoint);
    if (f.epochs) ckpt.config.epochs = *f.epochs;
    ckpt.config.threads = f.threads;
    require_match(ckpt.config, ds);
  } else {
    if (f.exp && *f.exp != ds.experiment) {
      throw SchemaError("--exp " + std::to_string(*f.exp) + " does not match dataset experiment " +
                        std::to_string(ds.experiment));
    }
    ckpt.config = ExperimentConfig::defaults(ds.experiment);
    copy_model(ckpt.config, ds);
    apply_training_flags(ckpt.config, f);
    ckpt.config.n_train = ds.records.size();
    ckpt.config.validate();
    ckpt.state = experiments::init_training(ckpt.config);
  }
  const ExperimentConfig& cfg = ckpt.config;
  if (ds.n_steps < cfg.train_steps()) {
    throw SchemaError("dataset holds " + std::to_string(ds.n_steps) +
                      " steps, training needs " + std::to_string(cfg.train_steps()));
  }

  const fs::path ckpt_path = f.out;
  const fs::path log_path = f.log.empty() ? fs::path(f.out + ".loss.txt") : fs::path(f.log);
  auto save = [&](const experiments::TrainingState& st) {
    io::write_checkpoint(ckpt_path, {cfg, st});
    io::atomic_write(log_path, io::loss_log(st.epoch_losses));
  };
  save(ckpt.state);
  try {
    experiments::train(ckpt.state, ds, cfg, [&](const experiments::TrainingState& st) {
      save(st);
      out << "epoch " << st.epoch << " loss " << st.epoch_losses.back() << "\n";
    });
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << "; last good checkpoint kept at " << ckpt_path.string()
        << "\n";
    return kNumerical;
  }
  out << "checkpoint written to " << ckpt_path.string() << " after " << ckpt.state.epoch
      << " epochs\n";
  return kOk;
}

int cmd_predict(const Flags& f, std::ostream& out) {
  if (f.checkpoint.empty()) throw UsageError("predict: --checkpoint is required");
  if (f.out.empty()) throw UsageError("predict: --out is required");
  const io::Checkpoint ckpt = io::read_checkpoint(f.checkpoint);
  const ExperimentConfig& cfg = ckpt.config;
  const std::size_t d = cfg.state_dim();
  const std::size_t n = f.n.value_or(cfg.eval_steps());

  DensityMatrix rho0 = DensityMatrix::unchecked(linalg::CMatrix::identity(d));
  if (!f.rho0.empty()) {
    const auto v = parse_reals(f.rho0);
    if (v.size() != 2 * d * d) {
      throw UsageError("--rho0 needs " + std::to_string(2 * d * d) + " reals, got " +
                       std::to_string(v.size()));
    }
    try {
      rho0 = DensityMatrix(qrn::decode_complex(v, d));
    } catch (const InvariantError& e) {
      throw SchemaError(std::string("--rho0 is not a density matrix: ") + e.what());
    }
  } else {
    rho0 = dynamics::sample_random_state(d, f.seed.value_or(cfg.seed));
  }
  const double omega = f.omega.value_or(cfg.omega);
  std::optional<double> extra;
  if (cfg.omega_conditioned()) extra = omega;

  experiments::Record rec;
  if (cfg.omega_conditioned()) rec.omega = omega;
  rec.trajectory = cfg.mode() == Mode::state_predictor
                       ? qrn::rollout_state_predictor(rho0, ckpt.state.net, n, cfg.dt, extra)
                       : qrn::rollout_master_equation(rho0, ckpt.state.net,
                                                      cfg.qrn_config(omega), n, extra);
  Dataset ds;
  ds.experiment = cfg.experiment;
  ds.dim = d;
  ds.dt = cfg.dt;
  ds.n_steps = n;
  ds.seed = cfg.seed;
  ds.split = "predict";
  ds.omega = omega;
  ds.decay1 = cfg.decay1;
  ds.decay2 = cfg.decay2;
  ds.couplings = cfg.couplings;
  ds.omega_min = cfg.omega_min;
  ds.omega_max = cfg.omega_max;
  ds.records.push_back(std::move(rec));
  ds.validate();
  io::write_dataset(f.out, ds);
  out << "predicted " << n << " steps, written to " << f.out << "\n";
  return kOk;
}

int cmd_evaluate(const Flags& f, std::ostream& out) {
  if (f.checkpoint.empty()) throw UsageError("evaluate: --checkpoint is required");
  if (f.dataset.empty()) throw UsageError("evaluate: --dataset is required");
  io::Checkpoint ckpt = io::read_checkpoint(f.checkpoint);
  ExperimentConfig& cfg = ckpt.config;
  cfg.threads = f.threads;
  const Dataset ds = io::read_dataset(f.dataset);
  require_match(cfg, ds);
  if (cfg.omega_conditioned()) {
    for (const auto& rec : ds.records)
      if (!rec.omega) throw SchemaError("experiment 5 dataset record without omega");
  }
  const std::size_t n = f.n.value_or(std::min(ds.n_steps, steps(cfg.t_eval, cfg.dt)));
  const auto curve = experiments::evaluate(ckpt.state.net, ds, cfg, n);
  const std::string csv = io::metrics_to_csv(curve);
  if (f.out.empty()) {
    out << csv;
  } else {
    io::atomic_write(f.out, csv);
    out << curve.metric << " over " << curve.samples << " trajectories: mean "
        << curve.mean_over(0.0, cfg.t_max) << " for t <= " << cfg.t_max << ", mean "
        << curve.mean_over(cfg.t_max + 0.5 * cfg.dt, 1e300) << " after\n";
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum recurrent network master equations"};
  app.require_subcommand(1);
  Flags f;

  auto common = [&](CLI::App* sc) {
    sc->add_option("--exp", f.exp, "Experiment id")->check(CLI::Range(1, 5));
    sc->add_option("--seed", f.seed, "Random seed");
    sc->add_option("--out", f.out, "Output file");
    sc->add_option("--dataset", f.dataset, "Dataset file");
    sc->add_option("--checkpoint", f.checkpoint, "Checkpoint file");
    sc->add_option("--n", f.n, "Trajectory count (generate) or step count (predict, evaluate)");
    sc->add_option("--dt", f.dt, "Time step (default 0.01)");
    sc->add_option("--t-max", f.t_max, "Training horizon (default 0.7)");
    sc->add_option("--t-eval", f.t_eval, "Evaluation horizon (default 1.0)");
    sc->add_option("--epochs", f.epochs, "Training epochs (default 60)");
    sc->add_option("--batch", f.batch, "Mini-batch size (default 32)");
    sc->add_option("--lr", f.lr, "Learning rate (default 0.01)");
    sc->add_option("--mu", f.mu, "Lindblad operator count (default 1)");
    sc->add_flag("--lamb-shift", f.lamb_shift, "Learn a Lamb-shift Hamiltonian");
    sc->add_option("--omega-range", f.omega_range, "Omega interval lo:hi (default 0.5:1.5)");
    sc->add_option("--threads", f.threads, "Worker threads, 0 for all cores");
  };
  CLI::App* gen = app.add_subcommand("generate", "Integrate ground-truth trajectories");
  common(gen);
  gen->add_option("--split", f.split, "train or test");
  CLI::App* tr = app.add_subcommand("train", "Train a network on a dataset");
  common(tr);
  tr->add_option("--weight-decay", f.weight_decay, "L2 factor on head weights");
  tr->add_option("--log", f.log, "Loss log path (default <out>.loss.txt)");
  CLI::App* pr = app.add_subcommand("predict", "Roll a trained network out from one state");
  common(pr);
  pr->add_option("--rho0", f.rho0, "Initial state as 2d^2 comma-separated reals");
  pr->add_option("--omega", f.omega, "Qubit frequency for experiment 5");
  CLI::App* ev = app.add_subcommand("evaluate", "Metric table of a checkpoint on a dataset");
  common(ev);

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) return cmd_generate(f, out);
    if (tr->parsed()) return cmd_train(f, out, err);
    if (pr->parsed()) return cmd_predict(f, out);
    return cmd_evaluate(f, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const SchemaError& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const DivergenceError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const DegenerateOutputError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const InvariantError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const SingularPointError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "i/o error: " << e.what() << "\n";
    return kData;
  }
}

}  // namespace qrnme::cli
