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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qrnme/errors.hpp"
#include "qrnme/qrn.hpp"
#include "test_util.hpp"

namespace {

using namespace qrnme::qrn;
using qrnme::dynamics::diagnose_state;
using qrnme::linalg::adjoint;
using qrnme::linalg::max_abs;
using qrnme::testing::max_diff;
using qrnme::testing::random_density;
using qrnme::testing::random_matrix;
namespace ops = qrnme::dynamics::ops;
namespace neural = qrnme::neural;

const Complex I{0.0, 1.0};

CMatrix diag2(double a, double b) {
  const double d[] = {a, b};
  return CMatrix::diag(d);
}

QrnConfig make_config(std::size_t mu, bool ls, double dt, CMatrix h) {
  QrnConfig c;
  c.dim = h.rows();
  c.mu_count = mu;
  c.include_lamb_shift = ls;
  c.dt = dt;
  c.known_hamiltonian = std::move(h);
  return c;
}

// Network whose output is a constant: zero weights, head bias = raw.
neural::GruNetwork constant_network(const std::vector<double>& raw, std::size_t input) {
  neural::GruNetwork net({input, 4, raw.size(), 2});
  auto head = net.mutable_head();
  std::copy(raw.begin(), raw.end(), head.bias.begin());
  return net;
}

// Exact trajectory of a constant generator.
Trajectory exact_trajectory(const DensityMatrix& rho0, const CMatrix& h, const QrnOutput& out,
                            double dt, std::size_t n) {
  const CMatrix s = superoperator_matrix(h, out);
  Trajectory tr{0.0, dt, {rho0}};
  for (std::size_t j = 0; j < n; ++j) {
    CMatrix next = propagate(tr.states.back().mat(), s, dt);
    next = (next + adjoint(next)) * Complex{0.5, 0.0};
    tr.states.push_back(DensityMatrix::unchecked(next));
  }
  return tr;
}

TEST(Encoding, Examples) {
  const std::vector<double> id{1, 0, 0, 1, 0, 0, 0, 0};
  EXPECT_EQ(decode_complex(id, 2), CMatrix::identity(2));
  const std::vector<double> sy{0, 0, 0, 0, 0, -1, 1, 0};
  EXPECT_EQ(decode_complex(sy, 2), ops::sigma_y());
  EXPECT_THROW(decode_complex(std::vector<double>(7, 0.0), 2), qrnme::DimensionError);
}

TEST(Encoding, RoundTripIsBitwise) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  for (std::size_t m : {2u, 3u, 4u}) {
    std::vector<double> o(2 * m * m);
    for (auto& x : o) x = n(rng) * 1e3;
    EXPECT_EQ(encode_complex(decode_complex(o, m)), o);
  }
}

TEST(Hermitize, Examples) {
  EXPECT_EQ(hermitize(ops::sigma_plus()), ops::sigma_x());
  std::mt19937_64 rng(2);
  const CMatrix h = qrnme::testing::random_hermitian(3, rng);
  EXPECT_LT(max_diff(hermitize(h), h * Complex{2.0, 0.0}), 1e-15);
  const CMatrix anti = h * I;
  EXPECT_LT(max_abs(hermitize(anti)), 1e-15);
  const CMatrix a = random_matrix(4, 4, rng);
  const CMatrix ha = hermitize(a);
  EXPECT_EQ(ha, adjoint(ha));
}

TEST(DensityFromOutput, Examples) {
  EXPECT_LT(max_diff(density_from_output(CMatrix::identity(2)).mat(), diag2(0.5, 0.5)), 1e-15);
  EXPECT_EQ(density_from_output(diag2(1, 0)).mat(), diag2(1, 0));
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    EXPECT_TRUE(diagnose_state(density_from_output(random_matrix(3, 3, rng)).mat()).ok());
  }
  EXPECT_THROW(density_from_output(CMatrix(2, 2)), qrnme::DegenerateOutputError);
  EXPECT_THROW(density_from_output(diag2(1e-8, 0)), qrnme::DegenerateOutputError);
}

TEST(DensityFromOutput, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  const CMatrix a = random_matrix(2, 2, rng), w = random_matrix(2, 2, rng);
  auto cost = [&](const CMatrix& x) {
    return qrnme::linalg::trace(adjoint(w) * density_from_output(x).mat()).real();
  };
  const CMatrix g = density_from_output_grad(a, w);
  const double h = 1e-6;
  for (std::size_t k = 0; k < 4; ++k) {
    for (Complex dir : {Complex{1, 0}, I}) {
      CMatrix p = a, m = a;
      p.data()[k] += h * dir;
      m.data()[k] -= h * dir;
      const double fd = (cost(p) - cost(m)) / (2 * h);
      const double an = dir == I ? g.data()[k].imag() : g.data()[k].real();
      EXPECT_NEAR(an, fd, 1e-8);
    }
  }
}

TEST(QrnLiouvillian, ZeroGeneratorGivesZero) {
  QrnOutput out{CMatrix(2, 2), {CMatrix(2, 2)}};
  std::mt19937_64 rng(5);
  EXPECT_EQ(max_abs(qrn_liouvillian_apply(random_density(2, rng), CMatrix(2, 2), out)), 0.0);
}

TEST(QrnLiouvillian, MatchesGroundTruthModel) {
  const qrnme::dynamics::DecayParams p{0.5, 2.0};
  const auto model = qrnme::dynamics::two_level_model(1.0, p);
  std::mt19937_64 rng(6);
  for (double t : {0.1, 0.3, 0.9}) {
    const double g = qrnme::dynamics::decay_rate(t, p);
    QrnOutput out{CMatrix(2, 2), {ops::sigma_minus() * Complex{std::sqrt(g), 0.0}}};
    const CMatrix rho = random_density(2, rng);
    EXPECT_LT(max_diff(qrn_liouvillian_apply(rho, ops::sigma_z(), out),
                       qrnme::dynamics::liouvillian_apply(rho, model, t)),
              1e-12);
  }
}

TEST(QrnLiouvillian, IsTraceless) {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 10; ++rep) {
    QrnOutput out{hermitize(random_matrix(3, 3, rng)),
                  {random_matrix(3, 3, rng), random_matrix(3, 3, rng)}};
    const CMatrix l = qrn_liouvillian_apply(random_density(3, rng),
                                            qrnme::testing::random_hermitian(3, rng), out);
    EXPECT_LT(std::abs(qrnme::linalg::trace(l)), 1e-12);
  }
}

TEST(Superoperator, ColumnsActLikeTheLiouvillian) {
  std::mt19937_64 rng(8);
  QrnOutput out{hermitize(random_matrix(2, 2, rng)), {random_matrix(2, 2, rng)}};
  const CMatrix h = ops::sigma_z();
  const CMatrix s = superoperator_matrix(h, out);
  EXPECT_EQ(s.rows(), 4u);
  const CMatrix rho = random_density(2, rng);
  const auto flat = qrnme::linalg::apply(s, rho.data());
  EXPECT_LT(max_diff(CMatrix(2, 2, flat), qrn_liouvillian_apply(rho, h, out)), 1e-14);
  QrnOutput zero{CMatrix(2, 2), {CMatrix(2, 2)}};
  EXPECT_EQ(max_abs(superoperator_matrix(CMatrix(2, 2), zero)), 0.0);
}

TEST(Superoperator, ExponentialMatchesRk4) {
  std::mt19937_64 rng(9);
  QrnOutput out{hermitize(random_matrix(2, 2, rng, 0.5)), {random_matrix(2, 2, rng, 0.5)}};
  const CMatrix h = ops::sigma_z();
  const CMatrix rho = random_density(2, rng);
  const double dt = 0.01;
  auto f = [&](const CMatrix& r) { return qrn_liouvillian_apply(r, h, out); };
  const CMatrix k1 = f(rho), k2 = f(rho + k1 * Complex{dt / 2, 0}),
                k3 = f(rho + k2 * Complex{dt / 2, 0}), k4 = f(rho + k3 * Complex{dt, 0});
  const CMatrix rk = rho + (k1 + k2 * Complex{2, 0} + k3 * Complex{2, 0} + k4) *
                               Complex{dt / 6, 0};
  EXPECT_LT(max_diff(propagate(rho, superoperator_matrix(h, out), dt), rk), 1e-8);
}

TEST(Superoperator, AmplitudeDampingPopulation) {
  QrnOutput out{CMatrix(2, 2), {ops::sigma_minus()}};
  const CMatrix s = superoperator_matrix(CMatrix(2, 2), out);
  for (double t : {0.1, 0.5, 1.0, 3.0}) {
    const CMatrix r = propagate(diag2(1, 0), s, t);
    EXPECT_NEAR(r(0, 0).real(), std::exp(-t), 1e-12);
    EXPECT_NEAR(r(1, 1).real(), 1.0 - std::exp(-t), 1e-12);
  }
}

TEST(StateCost, Examples) {
  const Trajectory a{0.0, 0.1, {DensityMatrix(diag2(1, 0)), DensityMatrix(diag2(1, 0))}};
  const Trajectory b{0.0, 0.1, {DensityMatrix(diag2(1, 0)), DensityMatrix(diag2(0, 1))}};
  EXPECT_EQ(cost_state_sequence(std::span(&a, 1), std::span(&a, 1)).value, 0.0);
  EXPECT_DOUBLE_EQ(cost_state_sequence(std::span(&a, 1), std::span(&b, 1)).value, 2.0);
  const Trajectory c{0.0, 0.1, {DensityMatrix(diag2(1, 0))}};
  EXPECT_THROW(cost_state_sequence(std::span(&a, 1), std::span(&c, 1)), qrnme::DimensionError);
}

TEST(StateCost, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(10);
  std::vector<Trajectory> pred(2), targ(2);
  for (std::size_t a = 0; a < 2; ++a) {
    pred[a].dt = targ[a].dt = 0.1;
    for (int j = 0; j < 4; ++j) {
      pred[a].states.push_back(DensityMatrix(random_density(2, rng)));
      targ[a].states.push_back(DensityMatrix(random_density(2, rng)));
    }
  }
  const StateCost c = cost_state_sequence(pred, targ);
  const double h = 1e-6;
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t j = 1; j < 4; ++j)
      for (std::size_t k = 0; k < 4; ++k)
        for (Complex dir : {Complex{1, 0}, I}) {
          auto eval = [&](double sign) {
            auto p = pred;
            CMatrix m = p[a].states[j].mat();
            m.data()[k] += sign * h * dir;
            p[a].states[j] = DensityMatrix::unchecked(m);
            return cost_state_sequence(p, targ).value;
          };
          const double fd = (eval(1) - eval(-1)) / (2 * h);
          const Complex g = c.grads[a][j - 1].data()[k];
          EXPECT_NEAR(dir == I ? g.imag() : g.real(), fd, 1e-6);
        }
}

TEST(ResidualCost, ZeroOutputsOnConstantTrajectoryVanish) {
  const DensityMatrix rho(diag2(0.3, 0.7));
  const Trajectory tr{0.0, 0.01, {rho, rho, rho, rho}};
  const QrnConfig cfg = make_config(1, false, 0.01, CMatrix(2, 2));
  const std::vector<QrnOutput> outs(3, QrnOutput{CMatrix(2, 2), {CMatrix(2, 2)}});
  const auto c = cost_residual(tr, outs, cfg);
  EXPECT_EQ(c.value, 0.0);
  EXPECT_EQ(c.per_step.size(), 3u);
  EXPECT_THROW(cost_residual(tr, std::vector<QrnOutput>(2, outs[0]), cfg),
               qrnme::DimensionError);
}

TEST(ResidualCost, ScalesAsFourthPowerOfStep) {
  const CMatrix h = ops::sigma_z();
  QrnOutput gen{CMatrix(2, 2), {ops::sigma_minus() * Complex{std::sqrt(0.8), 0.0}}};
  const DensityMatrix rho0 = qrnme::dynamics::sample_random_state(2, std::uint64_t{11});
  auto per_step = [&](double dt) {
    const Trajectory tr = exact_trajectory(rho0, h, gen, dt, 1);
    return cost_residual(tr, std::vector<QrnOutput>{gen}, make_config(1, false, dt, h)).value;
  };
  for (double dt : {0.04, 0.02, 0.01}) {
    const double ratio = per_step(dt) / per_step(dt / 2);
    EXPECT_NEAR(ratio, 16.0, 16.0 * 0.2) << dt;
  }
  EXPECT_LT(per_step(0.01), 1e-6);
}

TEST(ResidualCost, GaugeInvariantUnderPhase) {
  std::mt19937_64 rng(12);
  const CMatrix h = ops::sigma_z();
  Trajectory tr{0.0, 0.01, {}};
  for (int j = 0; j < 5; ++j) tr.states.push_back(DensityMatrix(random_density(2, rng)));
  std::vector<QrnOutput> outs, rotated;
  for (int j = 0; j < 4; ++j) {
    outs.push_back({hermitize(random_matrix(2, 2, rng)), {random_matrix(2, 2, rng)}});
    rotated.push_back(outs.back());
    rotated.back().lindblads[0] *= std::exp(I * (0.7 + j));
  }
  const auto cfg = make_config(1, true, 0.01, h);
  EXPECT_NEAR(cost_residual(tr, outs, cfg).value, cost_residual(tr, rotated, cfg).value, 1e-15);
}

// Full chain from raw network outputs: decode -> cost -> output_gradient.
void check_raw_gradient(std::size_t mu, bool ls, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const CMatrix h = ops::sigma_z() * Complex{0.9, 0.0};
  const QrnConfig cfg = make_config(mu, ls, 0.05, h);
  std::vector<Trajectory> targets(2);
  std::vector<std::vector<std::vector<double>>> raws(2);
  std::normal_distribution<double> n(0.0, 0.7);
  for (std::size_t a = 0; a < 2; ++a) {
    targets[a].dt = 0.05;
    for (int j = 0; j < 4; ++j) targets[a].states.push_back(DensityMatrix(random_density(2, rng)));
    raws[a].resize(3, std::vector<double>(cfg.output_size()));
    for (auto& r : raws[a])
      for (auto& x : r) x = n(rng);
  }
  auto cost = [&](const std::vector<std::vector<std::vector<double>>>& r) {
    std::vector<std::vector<QrnOutput>> outs(2);
    for (std::size_t a = 0; a < 2; ++a)
      for (const auto& v : r[a]) outs[a].push_back(decode_output(v, cfg));
    return cost_residual(targets, outs, cfg);
  };
  const ResidualCost c = cost(raws);
  const double step = 1e-6;
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t j = 0; j < 3; ++j) {
      const auto g = output_gradient(c.grads[a][j], cfg);
      ASSERT_EQ(g.size(), cfg.output_size());
      for (std::size_t k = 0; k < g.size(); ++k) {
        auto p = raws, m = raws;
        p[a][j][k] += step;
        m[a][j][k] -= step;
        const double fd = (cost(p).value - cost(m).value) / (2 * step);
        EXPECT_LE(std::abs(g[k] - fd), std::max(1e-9, 1e-5 * std::abs(fd)))
            << "a=" << a << " j=" << j << " k=" << k;
      }
    }
}

TEST(ResidualCost, GradientLindbladOnly) { check_raw_gradient(1, false, 13); }
TEST(ResidualCost, GradientWithLambShift) { check_raw_gradient(1, true, 14); }
TEST(ResidualCost, GradientTwoOperatorsAndLambShift) { check_raw_gradient(2, true, 15); }

TEST(DecodeOutput, LayoutLambShiftFirst) {
  const QrnConfig cfg = make_config(2, true, 0.01, CMatrix(2, 2));
  std::vector<double> raw(cfg.output_size(), 0.0);
  raw[1] = 1.0;       // A = sigma^+ -> H_LS = sigma_x
  raw[8 + 2] = 1.0;   // L1 = sigma^-
  raw[16 + 0] = 2.0;  // L2 = 2 |0><0|
  const QrnOutput out = decode_output(raw, cfg);
  EXPECT_EQ(out.lamb_shift, ops::sigma_x());
  ASSERT_EQ(out.lindblads.size(), 2u);
  EXPECT_EQ(out.lindblads[0], ops::sigma_minus());
  EXPECT_EQ(out.lindblads[1], diag2(2, 0));
  EXPECT_THROW(decode_output(std::vector<double>(8, 0.0), cfg), qrnme::DimensionError);
}

TEST(StatePredictor, UntrainedWithHeadBiasGivesValidStates) {
  neural::GruNetwork net = neural::init_params({8, 40, 8, 2}, 3);
  auto head = net.mutable_head();
  head.bias[0] = head.bias[3] = 1.0;
  const DensityMatrix rho0 = qrnme::dynamics::sample_random_state(2, std::uint64_t{16});
  const Trajectory tr = rollout_state_predictor(rho0, net, 70, 0.01);
  ASSERT_EQ(tr.states.size(), 71u);
  for (const auto& s : tr.states) EXPECT_TRUE(diagnose_state(s.mat()).ok());
  const Trajectory zero = rollout_state_predictor(rho0, net, 0, 0.01);
  ASSERT_EQ(zero.states.size(), 1u);
  EXPECT_EQ(zero.states[0], rho0);
}

TEST(MasterEquationRollout, ZeroNetworkIsIdentityChannel) {
  const QrnConfig cfg = make_config(1, false, 0.01, CMatrix(2, 2));
  const auto net = constant_network(std::vector<double>(8, 0.0), 8);
  const DensityMatrix rho0 = qrnme::dynamics::sample_random_state(2, std::uint64_t{17});
  const Trajectory tr = rollout_master_equation(rho0, net, cfg, 20);
  for (const auto& s : tr.states) EXPECT_LT(max_diff(s.mat(), rho0.mat()), 1e-15);
}

TEST(MasterEquationRollout, ConstantDecayMatchesAnalyticSolution) {
  const double gamma = 0.8, dt = 0.01;
  const QrnConfig cfg = make_config(1, false, dt, CMatrix(2, 2));
  const auto net =
      constant_network(encode_complex(ops::sigma_minus() * Complex{std::sqrt(gamma), 0.0}), 8);
  const DensityMatrix rho0 = qrnme::dynamics::sample_random_state(2, std::uint64_t{18});
  const Trajectory tr = rollout_master_equation(rho0, net, cfg, 100);
  for (std::size_t j = 0; j <= 100; ++j) {
    const double t = dt * static_cast<double>(j);
    const CMatrix& r = tr.states[j].mat();
    const CMatrix& r0 = rho0.mat();
    EXPECT_NEAR(r(0, 0).real(), r0(0, 0).real() * std::exp(-gamma * t), 1e-8);
    EXPECT_LT(std::abs(r(0, 1) - r0(0, 1) * std::exp(-gamma * t / 2)), 1e-8);
  }
}

TEST(MasterEquationRollout, RandomNetworksStayPhysical) {
  std::mt19937_64 rng(19);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    const QrnConfig cfg = make_config(2, true, 0.01, ops::sigma_z());
    neural::GruNetwork net({8, 6, cfg.output_size(), 2});
    for (auto& p : net.parameters()) p = n(rng);
    const Trajectory tr =
        rollout_master_equation(qrnme::dynamics::sample_random_state(2, rng), net, cfg, 50);
    for (const auto& s : tr.states) {
      const auto d = diagnose_state(s.mat());
      EXPECT_LT(d.trace_error, 1e-10);
      EXPECT_LT(d.hermiticity_defect, 1e-10);
      EXPECT_GE(d.min_eigenvalue, -1e-10);
    }
  }
}

TEST(QrnConfig, Validation) {
  QrnConfig c = make_config(1, false, 0.01, CMatrix(2, 2));
  EXPECT_NO_THROW(c.validate());
  c.rk_order = 2;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.rk_order = 1;
  c.mu_count = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_EQ(make_config(2, true, 0.01, CMatrix(2, 2)).output_size(), 24u);
}

}  // namespace
