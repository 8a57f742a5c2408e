// Copyright 2026 The qstab Authors
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

// End-to-end acceptance checks. Prints one PASS/FAIL line per check and
// exits non-zero when any check fails. Optional arguments select checks by
// number ("acceptance 1 4 7"); --config overrides the desk training config.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qstab/bench.h"
#include "qstab/catalog.h"
#include "qstab/config.h"
#include "qstab/errors.h"
#include "qstab/parallel.h"
#include "qstab/ppo.h"
#include "qstab/qmat.h"
#include "qstab/random.h"
#include "qstab/rewards.h"
#include "qstab/sme.h"
#include "../test_util.h"

#ifndef QSTAB_DESK_CONFIG
#define QSTAB_DESK_CONFIG "configs/desk_bell2q.yaml"
#endif

namespace qstab {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

double MinEigenvalue(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Superoperator fixed points at eigenprojectors of the measured operator.
Outcome FixedPoints() {
  std::mt19937_64 rng(101);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 << (trial % 3);
    const ComplexMatrix u = testing::RandomUnitary(n, rng);
    std::vector<double> lambda(n);
    for (double& l : lambda) l = g(rng);
    const ComplexMatrix c = u * MakeDiagonal(lambda) * u.adjoint();
    const int k = trial % n;
    const DensityMatrix p = DensityMatrix::FromPureState(u.col(k));
    worst = std::max({worst, testing::MaxAbs(Dissipator(c, p)),
                      testing::MaxAbs(Innovation(c, p))});
  }
  for (const std::string& name : CatalogSystemNames()) {
    const SystemCatalogEntry e = CatalogEntry(name);
    worst = std::max({worst, testing::MaxAbs(Dissipator(e.system.observable, e.target)),
                      testing::MaxAbs(Innovation(e.system.observable, e.target))});
  }
  return {worst <= 1e-12, Fmt("200 random pairs + shipped targets, max |entry| %.3g", worst)};
}

// Trace and positivity along long uncontrolled trajectories.
Outcome Preservation() {
  double worst_trace = 0.0, worst_eig = 0.0;
  std::uint64_t runs = 0;
  for (const std::string& name : CatalogSystemNames()) {
    const SystemCatalogEntry e = CatalogEntry(name);
    const std::vector<double> u(e.system.num_controls(), 0.0);
    for (int r = 0; r < 4; ++r, ++runs) {
      DensityMatrix rho = SampleHaarPure(e.system.dim(), DeriveSeed(7, "preserve", {runs}));
      NoiseStream noise(DeriveSeed(7, "preserve-noise", {runs}));
      for (int step = 0; step < 10000; ++step) {
        rho = SmeStep(e.system, rho, u, noise).next_state;
        worst_trace = std::max(worst_trace, std::abs(rho.matrix().trace().real() - 1.0));
        worst_eig = std::min(worst_eig, MinEigenvalue(rho.matrix()));
      }
    }
  }
  return {worst_trace <= 1e-9 && worst_eig >= -1e-10,
          Fmt("%llu runs x 1e4 steps, max |Tr-1| %.3g, min eigenvalue %.3g",
              static_cast<unsigned long long>(runs),
              worst_trace, worst_eig)};
}

// Fidelity to the GHZ target is a martingale under zero control.
Outcome Martingale() {
  const SystemCatalogEntry e = CatalogEntry("ghz3q");
  const int n = 500;
  const int steps = static_cast<int>(std::lround(1.0 / e.system.dt));
  std::vector<double> fidelity(n);
  ParallelFor(n, DefaultWorkerCount(), [&](int i) {
    DensityMatrix rho = DensityMatrix::MaximallyMixed(8);
    NoiseStream noise(DeriveSeed(11, "martingale", {static_cast<std::uint64_t>(i)}));
    const std::vector<double> u(e.system.num_controls(), 0.0);
    for (int s = 0; s < steps; ++s) rho = SmeStep(e.system, rho, u, noise).next_state;
    fidelity[i] = RealTraceOfProduct(e.target.matrix(), rho.matrix());
  });
  double mean = 0.0;
  for (double f : fidelity) mean += f;
  mean /= n;
  double var = 0.0;
  for (double f : fidelity) var += (f - mean) * (f - mean);
  const double se = std::sqrt(var / (n - 1) / n);
  return {std::abs(mean - 0.125) <= 4 * se,
          Fmt("mean Tr(rho_d rho_T) %.5f, 4 stderr %.5f", mean, 4 * se)};
}

Outcome RewardBoundaries() {
  RewardSpec pnr = DefaultRewardSpec(RewardVariant::kPNR);
  const double r0 = EvaluateReward(pnr, 0.0, 0);
  const double rd = EvaluateReward(pnr, pnr.d, 0);
  const double r1 = EvaluateReward(pnr, 1.0, 0);
  const double mid = EvaluateReward(pnr, 0.0005, 0);
  const double fpr = EvaluateReward(DefaultRewardSpec(RewardVariant::kFPR), 0.0, 0);
  const bool ok = std::abs(r0 - 100.0) <= 1e-12 && std::abs(rd) <= 1e-12 &&
                  std::abs(r1 + 0.1) <= 1e-12 && std::abs(mid - 17.5) <= 1e-9 &&
                  fpr == 5.0;
  return {ok, Fmt("r(0)=%.15g r(d)=%.3g r(1)=%.15g r(d/2)=%.12g fidelity-based(0)=%.17g",
                  r0, rd, r1, mid, fpr)};
}

// Batch whose importance ratios avoid the clip kinks.
Minibatch RandomBatch(const Agent& agent, int b, double clip, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  const int obs_size = agent.policy.mean_net.input_size();
  const int na = agent.policy.action_size();
  Minibatch mb{Eigen::MatrixXd(obs_size, b), Eigen::MatrixXd(na, b), Eigen::VectorXd(b),
               Eigen::VectorXd(b), Eigen::VectorXd(b)};
  for (int k = 0; k < b; ++k) {
    Eigen::VectorXd o(obs_size);
    for (int i = 0; i < obs_size; ++i) o(i) = g(rng);
    mb.obs.col(k) = o;
    const PolicyOutput out = ForwardPolicy(agent.policy, o);
    Eigen::VectorXd a(na);
    for (int i = 0; i < na; ++i) a(i) = out.mean(i) + std::exp(out.log_std(i)) * g(rng);
    mb.actions.col(k) = a;
    double shift;
    do {
      shift = 0.3 * g(rng);
    } while (std::abs(std::exp(-shift) - (1 + clip)) < 1e-3 ||
             std::abs(std::exp(-shift) - (1 - clip)) < 1e-3);
    mb.old_logp(k) = GaussianLogProb(out.mean, out.log_std, a) + shift;
    mb.advantages(k) = g(rng);
    mb.returns(k) = g(rng);
  }
  NormalizeAdvantages(mb.advantages);
  return mb;
}

// Central differences on up to 32 coordinates of params[begin, end); returns
// the worst relative error.
double CheckBlock(const std::function<double()>& loss, Eigen::VectorXd& params,
                  const Eigen::VectorXd& grad, int begin, int end, std::mt19937_64& rng) {
  const double h = 1e-5;
  std::uniform_int_distribution<int> pick(begin, end - 1);
  const int count = std::min(32, end - begin);
  double worst = 0.0;
  for (int n = 0; n < count; ++n) {
    const int i = end - begin <= 32 ? begin + n : pick(rng);
    const double saved = params(i);
    params(i) = saved + h;
    const double up = loss();
    params(i) = saved - h;
    const double down = loss();
    params(i) = saved;
    const double numeric = (up - down) / (2 * h);
    const double rel = std::abs(grad(i) - numeric) /
                       std::max({std::abs(grad(i)), std::abs(numeric), 1e-6});
    worst = std::max(worst, rel);
  }
  return worst;
}

double CheckNet(const std::function<double()>& loss, Mlp& net, const Eigen::VectorXd& grad,
                std::mt19937_64& rng) {
  double worst = 0.0;
  for (int l = 0; l < net.num_layers(); ++l) {
    const int out = net.sizes()[l + 1], in = net.sizes()[l];
    const int w0 = net.weight_offset(l);
    worst = std::max(worst, CheckBlock(loss, net.params(), grad, w0, w0 + out * in, rng));
    worst = std::max(worst, CheckBlock(loss, net.params(), grad, w0 + out * in,
                                       w0 + out * in + out, rng));
  }
  return worst;
}

Outcome GradientChecks() {
  Agent agent = MakeAgent(32, 2, {128, 128}, -0.3, 8);
  agent.policy.mean_net.InitOrthogonal(21, std::sqrt(2.0), 1.0);
  agent.policy.log_std << -0.3, 0.2;
  std::mt19937_64 rng(9);
  const LossCoefficients coef{0.2, 0.5, 0.01};
  const Minibatch mb = RandomBatch(agent, 64, coef.clip, rng);
  AgentGradient grad = AgentGradient::ZerosLike(agent);
  PpoLoss(agent, mb, coef, &grad);
  auto surrogate = [&] { return PpoLoss(agent, mb, coef, nullptr).total; };
  double worst = CheckNet(surrogate, agent.policy.mean_net, grad.mean_net, rng);
  worst = std::max(worst, CheckBlock(surrogate, agent.policy.log_std, grad.log_std, 0, 2, rng));
  worst = std::max(worst, CheckNet(surrogate, agent.value, grad.value, rng));

  std::normal_distribution<double> g;
  Eigen::MatrixXd obs(32, 48);
  Eigen::VectorXd targets(48);
  for (Eigen::Index i = 0; i < obs.size(); ++i) obs(i) = g(rng);
  for (Eigen::Index i = 0; i < targets.size(); ++i) targets(i) = 2.0 * g(rng);
  Eigen::VectorXd vgrad = Eigen::VectorXd::Zero(agent.value.num_params());
  ValueLoss(agent.value, obs, targets, &vgrad);
  auto value_loss = [&] { return ValueLoss(agent.value, obs, targets, nullptr); };
  worst = std::max(worst, CheckNet(value_loss, agent.value, vgrad, rng));
  return {worst <= 1e-4, Fmt("32->128->128->2 nets, worst relative error %.3g", worst)};
}

Outcome GaeOracle() {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> len(1, 64), coin(0, 1);
  const double gamma = 0.99;
  double worst = 0.0;
  for (int ep = 0; ep < 100; ++ep) {
    const int n = len(rng);
    std::vector<double> r(n), v(n);
    std::vector<std::uint8_t> done(n, 0);
    // Half the episodes end inside the buffer, half are cut and bootstrapped.
    const bool terminal = coin(rng) == 1;
    done.back() = terminal ? 1 : 0;
    for (int t = 0; t < n; ++t) {
      r[t] = g(rng);
      v[t] = g(rng);
    }
    const double last = g(rng);
    const GaeResult out = ComputeGae(r, v, done, last, gamma, 1.0);
    for (int t = 0; t < n; ++t) {
      double q = 0.0;
      for (int k = t; k < n; ++k) q += std::pow(gamma, k - t) * r[k];
      if (!terminal) q += std::pow(gamma, n - t) * last;
      worst = std::max({worst, std::abs(out.advantages(t) - (q - v[t])),
                        std::abs(out.returns(t) - q)});
    }
  }
  return {worst <= 1e-10, Fmt("100 episodes, max deviation %.3g", worst)};
}

Outcome ProjectionOracle() {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> shift(-0.2, 0.2);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    ComplexMatrix a = testing::RandomHermitian(4, rng) * 0.3;
    a += Identity(4) * ((1.0 + shift(rng) - a.trace().real()) / 4);
    const DensityMatrix p = ProjectToPhysical(a);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
    std::array<double, 4> mu;
    for (int i = 0; i < 4; ++i) mu[i] = es.eigenvalues()(i);
    const std::array<double, 4> grid = testing::GridSimplexProjection(mu);
    const RealVector lambda = Eigen::Map<const RealVector>(grid.data(), 4);
    const ComplexMatrix expected =
        es.eigenvectors() * lambda.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
    // Operator-norm gap; equals the largest eigenvalue mismatch.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> gap(p.matrix() - expected,
                                                        Eigen::EigenvaluesOnly);
    worst = std::max(worst, gap.eigenvalues().cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-3, Fmt("100 inputs, max operator-norm gap %.3g (grid 1e-3)", worst)};
}

// Shared state for the training-based checks.
struct Trained {
  ExperimentConfig config;
  Agent agent;
  EvalReport report;
};

TrainResult TrainQuietly(const ExperimentConfig& cfg, const std::string& label) {
  TrainHooks hooks;
  hooks.workers = DefaultWorkerCount();
  const auto t0 = std::chrono::steady_clock::now();
  hooks.on_iteration = [&](const IterationLog& log) {
    if (log.iteration % 10 != 0) return;
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cerr << Fmt("  [%s] iter %d steps %ld final distance %.4f success %.2f (%.0fs)\n",
                     label.c_str(), log.iteration, log.steps, log.mean_final_metric,
                     log.success_fraction, secs);
  };
  return Train(MakeEnvFactory(cfg), cfg.train, hooks);
}

EvalReport Evaluate(const Controller& c, const ExperimentConfig& cfg,
                    const EvalProtocol& protocol) {
  return EvaluateController(c, cfg.system, cfg.target, cfg.target_name, protocol,
                            DefaultWorkerCount());
}

std::optional<Trained> TrainPnr(const std::string& config_path, Outcome& out) {
  Trained t;
  t.config = LoadExperimentConfig(config_path);
  if (t.config.reward.variant != RewardVariant::kPNR) {
    throw ConfigError("learning check expects the PNR reward in " + config_path);
  }
  t.agent = TrainQuietly(t.config, "PNR").agent;
  t.report = Evaluate(PolicyController(t.agent.policy), t.config, t.config.eval);
  const EvalReport zero = Evaluate(ZeroController(t.config.system), t.config, t.config.eval);
  out.pass = t.report.success_rate >= 0.8 &&
             t.report.mean_final_distance < zero.mean_final_distance;
  out.detail = Fmt("%ld steps, %dx%d grid, t_max %g: success %.4f (need >= 0.8), final D %.4g "
                   "vs zero control %.4g",
                   t.config.train.total_steps, t.config.eval.n_initial_states,
                   t.config.eval.n_noise_realizations, t.config.eval.t_max,
                   t.report.success_rate, t.report.mean_final_distance,
                   zero.mean_final_distance);
  return t;
}

Outcome AblationOrdering(const Trained& pnr) {
  ExperimentConfig cfg = pnr.config;
  cfg.reward = DefaultRewardSpec(RewardVariant::kPSR);
  if (pnr.config.reward.d != cfg.reward.d) cfg.reward.SetPartition(pnr.config.reward.d);
  const Agent agent = TrainQuietly(cfg, "PSR").agent;
  const EvalReport psr = Evaluate(PolicyController(agent.policy), cfg, cfg.eval);
  return {pnr.report.success_rate >= psr.success_rate,
          Fmt("same %ld-step budget: PNR success %.4f, PSR success %.4f",
              cfg.train.total_steps, pnr.report.success_rate, psr.success_rate)};
}

Outcome Robustness(const Trained& pnr) {
  EvalProtocol inefficient = pnr.config.eval;
  inefficient.eta_c = 0.8;
  EvalProtocol delayed = pnr.config.eval;
  delayed.delay_steps = static_cast<int>(std::lround(0.05 / pnr.config.system.dt));
  const Controller c = PolicyController(pnr.agent.policy);
  const double base = pnr.report.success_rate;
  const double eta = Evaluate(c, pnr.config, inefficient).success_rate;
  const double delay = Evaluate(c, pnr.config, delayed).success_rate;
  return {base - eta <= 0.2 && base - delay <= 0.2,
          Fmt("success ideal %.4f, eta=0.8 %.4f, delay=0.05 %.4f (max drop 0.20)", base, eta,
              delay)};
}

}  // namespace
}  // namespace qstab

int main(int argc, char** argv) {
  using namespace qstab;
  std::string config_path = QSTAB_DESK_CONFIG;
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) {
      config_path = argv[++i];
    } else {
      selected.insert(std::atoi(arg.c_str()));
    }
  }
  auto wanted = [&](int k) { return selected.empty() || selected.count(k) > 0; };

  const char* names[] = {"",
                         "superoperator fixed points",
                         "trace and positivity preservation",
                         "zero-control fidelity martingale",
                         "reward boundary values",
                         "loss gradient checks",
                         "advantage estimator oracle",
                         "physical projection oracle",
                         "two-qubit learning",
                         "reward ablation ordering",
                         "robustness to imperfections"};
  int failures = 0;
  auto report = [&](int k, const Outcome& o) {
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << k << " " << names[k] << ": "
              << o.detail << std::endl;
    if (!o.pass) ++failures;
  };
  auto run = [&](int k, const std::function<Outcome()>& fn) {
    if (!wanted(k)) return;
    try {
      report(k, fn());
    } catch (const std::exception& e) {
      report(k, {false, std::string("error: ") + e.what()});
    }
  };

  run(1, FixedPoints);
  run(2, Preservation);
  run(3, Martingale);
  run(4, RewardBoundaries);
  run(5, GradientChecks);
  run(6, GaeOracle);
  run(7, ProjectionOracle);

  if (wanted(8) || wanted(9) || wanted(10)) {
    std::optional<Trained> pnr;
    Outcome learning;
    try {
      pnr = TrainPnr(config_path, learning);
    } catch (const std::exception& e) {
      learning = {false, std::string("error: ") + e.what()};
    }
    if (wanted(8)) report(8, learning);
    if (pnr) {
      run(9, [&] { return AblationOrdering(*pnr); });
      run(10, [&] { return Robustness(*pnr); });
    } else {
      if (wanted(9)) report(9, {false, "no trained agent"});
      if (wanted(10)) report(10, {false, "no trained agent"});
    }
  }
  return failures == 0 ? 0 : 1;
}
