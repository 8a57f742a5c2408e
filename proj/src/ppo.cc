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

#include "qstab/ppo.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <numbers>

#include "qstab/errors.h"
#include "qstab/parallel.h"

namespace qstab {

namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

bool AllFinite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

Eigen::VectorXd GaussianPolicy::ClampedLogStd() const {
  return log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
}

PolicyOutput ForwardPolicy(const GaussianPolicy& policy,
                           const Eigen::VectorXd& obs) {
  return {policy.mean_net.Forward(obs), policy.ClampedLogStd()};
}

double GaussianLogProb(const Eigen::VectorXd& mean,
                       const Eigen::VectorXd& log_std,
                       const Eigen::VectorXd& action) {
  double logp = 0.0;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    const double z = (action(i) - mean(i)) * std::exp(-log_std(i));
    logp += -0.5 * z * z - log_std(i) - kHalfLog2Pi;
  }
  return logp;
}

PolicySample SampleAction(const GaussianPolicy& policy,
                          const Eigen::VectorXd& obs, NoiseStream& noise) {
  const PolicyOutput out = ForwardPolicy(policy, obs);
  PolicySample s;
  s.action.resize(out.mean.size());
  for (Eigen::Index i = 0; i < out.mean.size(); ++i) {
    s.action(i) = out.mean(i) + std::exp(out.log_std(i)) * noise.NextStandardNormal();
  }
  s.logp = GaussianLogProb(out.mean, out.log_std, s.action);
  return s;
}

Eigen::VectorXd DeterministicAction(const GaussianPolicy& policy,
                                    const Eigen::VectorXd& obs) {
  return policy.mean_net.Forward(obs);
}

Agent MakeAgent(int obs_size, int action_size, const std::vector<int>& hidden,
                double init_log_std, std::uint64_t seed) {
  std::vector<int> policy_sizes = {obs_size};
  policy_sizes.insert(policy_sizes.end(), hidden.begin(), hidden.end());
  std::vector<int> value_sizes = policy_sizes;
  policy_sizes.push_back(action_size);
  value_sizes.push_back(1);
  Agent agent;
  agent.policy.mean_net = Mlp(policy_sizes);
  agent.policy.mean_net.InitOrthogonal(DeriveSeed(seed, "weight-init", {0}),
                                       std::sqrt(2.0), 0.01);
  agent.policy.log_std = Eigen::VectorXd::Constant(action_size, init_log_std);
  agent.value = Mlp(value_sizes);
  agent.value.InitOrthogonal(DeriveSeed(seed, "weight-init", {1}),
                             std::sqrt(2.0), 1.0);
  return agent;
}

GaeResult ComputeGae(std::span<const double> rewards,
                     std::span<const double> values,
                     std::span<const std::uint8_t> dones, double last_value,
                     double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) {
    throw DimensionError("gae: rewards, values and dones differ in length");
  }
  GaeResult out{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  double running = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double live = dones[k] ? 0.0 : 1.0;
    const double next_value = k + 1 < n ? values[k + 1] : last_value;
    const double delta = rewards[k] + gamma * next_value * live - values[k];
    running = delta + gamma * lambda * live * running;
    out.advantages(k) = running;
    out.returns(k) = running + values[k];
  }
  return out;
}

void NormalizeAdvantages(Eigen::VectorXd& advantages) {
  const Eigen::Index n = advantages.size();
  if (n == 0) return;
  const double mean = advantages.mean();
  advantages.array() -= mean;
  if (n < 2) return;
  const double sd = std::sqrt(advantages.squaredNorm() / (n - 1));
  advantages /= sd + 1e-8;
}

double ClippedObjective(double ratio, double advantage, double clip) {
  const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
  return std::min(ratio * advantage, clipped * advantage);
}

AgentGradient AgentGradient::ZerosLike(const Agent& agent) {
  return {Eigen::VectorXd::Zero(agent.policy.mean_net.num_params()),
          Eigen::VectorXd::Zero(agent.policy.log_std.size()),
          Eigen::VectorXd::Zero(agent.value.num_params())};
}

double AgentGradient::Norm() const {
  return std::sqrt(mean_net.squaredNorm() + log_std.squaredNorm() +
                   value.squaredNorm());
}

void AgentGradient::Scale(double s) {
  mean_net *= s;
  log_std *= s;
  value *= s;
}

double ValueLoss(const Mlp& value, const Eigen::MatrixXd& obs,
                 const Eigen::VectorXd& targets, Eigen::VectorXd* grad) {
  const Eigen::Index b = obs.cols();
  if (targets.size() != b) throw DimensionError("value targets length");
  Mlp::Cache cache;
  const Eigen::MatrixXd v = value.Forward(obs, grad ? &cache : nullptr);
  const Eigen::RowVectorXd err = v.row(0) - targets.transpose();
  const double loss = err.squaredNorm() / b;
  if (grad) {
    const Eigen::MatrixXd g = (2.0 / b) * err;
    value.Backward(cache, g, *grad);
  }
  return loss;
}

LossTerms PpoLoss(const Agent& agent, const Minibatch& batch,
                  const LossCoefficients& coef, AgentGradient* grad) {
  const GaussianPolicy& pi = agent.policy;
  const Eigen::Index b = batch.obs.cols();
  const int na = pi.action_size();
  if (batch.actions.rows() != na || batch.actions.cols() != b ||
      batch.old_logp.size() != b || batch.advantages.size() != b ||
      batch.returns.size() != b) {
    throw DimensionError("ppo: minibatch fields disagree in shape");
  }
  Mlp::Cache cache;
  const Eigen::MatrixXd mean = pi.mean_net.Forward(batch.obs, grad ? &cache : nullptr);
  const Eigen::VectorXd log_std = pi.ClampedLogStd();
  const Eigen::VectorXd inv_std = (-log_std).array().exp();

  // Per-sample d(objective)/d(logp_new); zero for skipped or clipped samples.
  Eigen::VectorXd dobj = Eigen::VectorXd::Zero(b);
  LossTerms terms;
  double objective_sum = 0.0;
  int used = 0, clipped = 0;
  double kl_sum = 0.0;
  for (Eigen::Index k = 0; k < b; ++k) {
    double logp = 0.0;
    for (int i = 0; i < na; ++i) {
      const double z = (batch.actions(i, k) - mean(i, k)) * inv_std(i);
      logp += -0.5 * z * z - log_std(i) - kHalfLog2Pi;
    }
    const double log_ratio = logp - batch.old_logp(k);
    const double ratio = std::exp(log_ratio);
    const double adv = batch.advantages(k);
    if (!std::isfinite(ratio) || !std::isfinite(adv)) {
      ++terms.skipped;
      continue;
    }
    ++used;
    const double unclipped = ratio * adv;
    const double clipped_obj =
        std::clamp(ratio, 1.0 - coef.clip, 1.0 + coef.clip) * adv;
    objective_sum += std::min(unclipped, clipped_obj);
    if (unclipped <= clipped_obj) dobj(k) = ratio * adv;
    if (std::abs(ratio - 1.0) > coef.clip) ++clipped;
    kl_sum += (ratio - 1.0) - log_ratio;
  }
  const double denom = std::max(used, 1);
  terms.policy = -objective_sum / denom;
  terms.clip_fraction = clipped / denom;
  terms.approx_kl = kl_sum / denom;
  terms.entropy = log_std.sum() + na * (0.5 + kHalfLog2Pi);

  if (grad) {
    grad->value.setZero(agent.value.num_params());
  }
  terms.value = ValueLoss(agent.value, batch.obs, batch.returns,
                          grad ? &grad->value : nullptr);
  terms.total = terms.policy + coef.vf_coef * terms.value -
                coef.ent_coef * terms.entropy;
  if (!grad) return terms;

  grad->value *= coef.vf_coef;
  // d(-mean objective)/d(mean), d/d(log_std) through logp.
  Eigen::MatrixXd dmean(na, b);
  Eigen::VectorXd dlog_std = Eigen::VectorXd::Zero(na);
  for (Eigen::Index k = 0; k < b; ++k) {
    const double w = -dobj(k) / denom;
    for (int i = 0; i < na; ++i) {
      const double z = (batch.actions(i, k) - mean(i, k)) * inv_std(i);
      dmean(i, k) = w * z * inv_std(i);
      dlog_std(i) += w * (z * z - 1.0);
    }
  }
  dlog_std.array() -= coef.ent_coef;
  for (int i = 0; i < na; ++i) {
    const bool active = pi.log_std(i) > kLogStdMin && pi.log_std(i) < kLogStdMax;
    if (!active) dlog_std(i) = 0.0;
  }
  pi.mean_net.Backward(cache, dmean, grad->mean_net);
  grad->log_std += dlog_std;
  return terms;
}

Adam::Adam(int size, double beta1, double beta2, double eps)
    : beta1_(beta1),
      beta2_(beta2),
      eps_(eps),
      m_(Eigen::VectorXd::Zero(size)),
      v_(Eigen::VectorXd::Zero(size)) {}

void Adam::Step(Eigen::VectorXd& params, const Eigen::VectorXd& grad,
                double lr) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw DimensionError("adam: size mismatch");
  }
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const double step = lr / c1;
  params.array() -= step * m_.array() / ((v_.array() / c2).sqrt() + eps_);
}

double TdValueUpdate(Mlp& value, Adam& optimizer, const Eigen::MatrixXd& obs,
                     const Eigen::VectorXd& targets, double lr) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(value.num_params());
  const double loss = ValueLoss(value, obs, targets, &grad);
  optimizer.Step(value.params(), grad, lr);
  return loss;
}

void TrainConfig::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ContractViolation(std::string("train: ") + what);
  };
  require(total_steps > 0, "total_steps must be > 0");
  require(num_envs > 0, "num_envs must be > 0");
  require(rollout_steps > 0, "rollout_steps must be > 0");
  require(minibatch_size > 0, "minibatch_size must be > 0");
  require(epochs > 0, "epochs must be > 0");
  require(gamma > 0.0 && gamma <= 1.0, "gamma must be in (0, 1]");
  require(gae_lambda >= 0.0 && gae_lambda <= 1.0, "gae_lambda must be in [0, 1]");
  require(clip > 0.0 && clip < 1.0, "clip must be in (0, 1)");
  require(lr_start >= 0.0, "lr_start must be >= 0");
  require(ent_coef >= 0.0, "ent_coef must be >= 0");
  require(vf_coef > 0.0, "vf_coef must be > 0");
  require(max_grad_norm > 0.0, "max_grad_norm must be > 0");
  require(!hidden.empty(), "hidden must list at least one layer");
  for (int h : hidden) require(h > 0, "hidden sizes must be > 0");
  require(init_log_std >= kLogStdMin && init_log_std <= kLogStdMax,
          "init_log_std must be in [-20, 2]");
}

double LearningRate(const TrainConfig& config, long step) {
  return config.lr_start *
         (1.0 - static_cast<double>(step) / static_cast<double>(config.total_steps));
}

nlohmann::json ToJson(const TrainConfig& c) {
  return {{"total_steps", c.total_steps},   {"num_envs", c.num_envs},
          {"rollout_steps", c.rollout_steps}, {"minibatch_size", c.minibatch_size},
          {"epochs", c.epochs},             {"gamma", c.gamma},
          {"gae_lambda", c.gae_lambda},     {"clip", c.clip},
          {"lr_start", c.lr_start},         {"ent_coef", c.ent_coef},
          {"vf_coef", c.vf_coef},           {"max_grad_norm", c.max_grad_norm},
          {"hidden", c.hidden},             {"init_log_std", c.init_log_std},
          {"seed", c.seed}};
}

TrainConfig TrainConfigFromJson(const nlohmann::json& j) {
  TrainConfig c;
  c.total_steps = j.at("total_steps").get<long>();
  c.num_envs = j.at("num_envs").get<int>();
  c.rollout_steps = j.at("rollout_steps").get<int>();
  c.minibatch_size = j.at("minibatch_size").get<int>();
  c.epochs = j.at("epochs").get<int>();
  c.gamma = j.at("gamma").get<double>();
  c.gae_lambda = j.at("gae_lambda").get<double>();
  c.clip = j.at("clip").get<double>();
  c.lr_start = j.at("lr_start").get<double>();
  c.ent_coef = j.at("ent_coef").get<double>();
  c.vf_coef = j.at("vf_coef").get<double>();
  c.max_grad_norm = j.at("max_grad_norm").get<double>();
  c.hidden = j.at("hidden").get<std::vector<int>>();
  c.init_log_std = j.at("init_log_std").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

namespace {

nlohmann::json FiniteOrNull(double x) {
  return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json ToJson(const IterationLog& log) {
  return {{"iteration", log.iteration},
          {"steps", log.steps},
          {"lr", log.lr},
          {"mean_step_reward", FiniteOrNull(log.mean_step_reward)},
          {"episodes", log.episodes},
          {"mean_return", FiniteOrNull(log.mean_return)},
          {"mean_final_distance", FiniteOrNull(log.mean_final_metric)},
          {"success_fraction", FiniteOrNull(log.success_fraction)},
          {"loss", FiniteOrNull(log.loss.total)},
          {"policy_loss", FiniteOrNull(log.loss.policy)},
          {"value_loss", FiniteOrNull(log.loss.value)},
          {"entropy", FiniteOrNull(log.loss.entropy)},
          {"clip_fraction", FiniteOrNull(log.loss.clip_fraction)},
          {"approx_kl", FiniteOrNull(log.loss.approx_kl)},
          {"skipped_samples", log.loss.skipped}};
}

namespace {

struct EpisodeStat {
  double ret;
  double final_metric;
  bool success;
};

// One environment plus everything its rollout owns.
struct EnvSlot {
  std::unique_ptr<RlEnvironment> env;
  Eigen::VectorXd obs;
  NoiseStream sampler;
  std::uint64_t episodes = 0;
  double episode_return = 0.0;

  Eigen::MatrixXd obs_buf, act_buf;
  std::vector<double> logp, rewards, values;
  std::vector<std::uint8_t> dones;
  double last_value = 0.0;
  std::vector<EpisodeStat> finished;
};

Eigen::VectorXd ResetSlot(EnvSlot& slot, std::uint64_t seed, int index) {
  return slot.env->Reset(
      DeriveSeed(seed, "env-reset", {std::uint64_t(index), slot.episodes}));
}

void Collect(EnvSlot& slot, const Agent& agent, const TrainConfig& cfg,
             int index) {
  const int n = cfg.rollout_steps;
  slot.obs_buf.resize(slot.obs.size(), n);
  slot.act_buf.resize(agent.policy.action_size(), n);
  slot.logp.assign(n, 0.0);
  slot.rewards.assign(n, 0.0);
  slot.values.assign(n, 0.0);
  slot.dones.assign(n, 0);
  slot.finished.clear();
  for (int t = 0; t < n; ++t) {
    const PolicySample s = SampleAction(agent.policy, slot.obs, slot.sampler);
    const double v = agent.value.Forward(slot.obs)(0);
    const EnvStep out = slot.env->Step(
        std::span<const double>(s.action.data(), s.action.size()));
    double r = out.reward;
    slot.episode_return += out.reward;
    if (out.done && out.truncated) {
      // Time limits are not part of the task: bootstrap through them.
      r += cfg.gamma * agent.value.Forward(out.obs)(0);
    }
    slot.obs_buf.col(t) = slot.obs;
    slot.act_buf.col(t) = s.action;
    slot.logp[t] = s.logp;
    slot.rewards[t] = r;
    slot.values[t] = v;
    slot.dones[t] = out.done ? 1 : 0;
    if (out.done) {
      slot.finished.push_back({slot.episode_return, out.final_metric, out.success});
      slot.episode_return = 0.0;
      ++slot.episodes;
      slot.obs = ResetSlot(slot, cfg.seed, index);
    } else {
      slot.obs = out.obs;
    }
  }
  slot.last_value = agent.value.Forward(slot.obs)(0);
}

bool AgentFinite(const Agent& agent) {
  return AllFinite(agent.policy.mean_net.params()) &&
         AllFinite(agent.policy.log_std) && AllFinite(agent.value.params());
}

nlohmann::json RngState(const std::vector<EnvSlot>& slots) {
  nlohmann::json j = nlohmann::json::array();
  for (const EnvSlot& s : slots) {
    j.push_back({{"sampler_seed", s.sampler.seed()},
                 {"sampler_counter", s.sampler.counter()},
                 {"episodes", s.episodes}});
  }
  return j;
}

}  // namespace

TrainResult Train(const EnvFactory& make_env, const TrainConfig& cfg,
                  const TrainHooks& hooks) {
  cfg.Validate();
  std::vector<EnvSlot> slots(cfg.num_envs);
  for (int e = 0; e < cfg.num_envs; ++e) {
    slots[e].env = make_env(e);
    if (!slots[e].env) throw ContractViolation("env factory returned null");
    slots[e].sampler =
        NoiseStream(DeriveSeed(cfg.seed, "policy-sampling", {std::uint64_t(e)}));
    slots[e].obs = ResetSlot(slots[e], cfg.seed, e);
  }
  const int obs_size = slots[0].env->observation_size();
  const int act_size = slots[0].env->action_size();

  TrainResult result;
  result.agent = MakeAgent(obs_size, act_size, cfg.hidden, cfg.init_log_std,
                           cfg.seed);
  Agent& agent = result.agent;
  Adam opt_mean(agent.policy.mean_net.num_params());
  Adam opt_log_std(act_size);
  Adam opt_value(agent.value.num_params());

  const long per_iteration = static_cast<long>(cfg.num_envs) * cfg.rollout_steps;
  const int iterations =
      static_cast<int>((cfg.total_steps + per_iteration - 1) / per_iteration);
  const LossCoefficients coef{cfg.clip, cfg.vf_coef, cfg.ent_coef};
  std::deque<EpisodeStat> recent;
  long steps = 0;

  for (int it = 0; it < iterations; ++it) {
    const double lr = std::max(0.0, LearningRate(cfg, steps));
    ParallelFor(cfg.num_envs, hooks.workers,
                [&](int e) { Collect(slots[e], agent, cfg, e); });

    // Flatten in environment order.
    const int n = static_cast<int>(per_iteration);
    Eigen::MatrixXd obs(obs_size, n), actions(act_size, n);
    Eigen::VectorXd logp(n), advantages(n), returns(n);
    IterationLog log;
    double reward_sum = 0.0;
    for (int e = 0; e < cfg.num_envs; ++e) {
      EnvSlot& s = slots[e];
      const GaeResult g = ComputeGae(s.rewards, s.values, s.dones,
                                     s.last_value, cfg.gamma, cfg.gae_lambda);
      const int off = e * cfg.rollout_steps;
      obs.middleCols(off, cfg.rollout_steps) = s.obs_buf;
      actions.middleCols(off, cfg.rollout_steps) = s.act_buf;
      for (int t = 0; t < cfg.rollout_steps; ++t) {
        logp(off + t) = s.logp[t];
        reward_sum += s.rewards[t];
      }
      advantages.segment(off, cfg.rollout_steps) = g.advantages;
      returns.segment(off, cfg.rollout_steps) = g.returns;
      for (const EpisodeStat& st : s.finished) {
        recent.push_back(st);
        if (recent.size() > 100) recent.pop_front();
        ++log.episodes;
      }
    }
    steps += per_iteration;

    // Minibatch epochs.
    NoiseStream shuffle(DeriveSeed(cfg.seed, "minibatch", {std::uint64_t(it)}));
    std::vector<int> order(n);
    LossTerms sum;
    int batches = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      for (int i = 0; i < n; ++i) order[i] = i;
      for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(shuffle.NextUniform() * (i + 1) - 1e-12);
        std::swap(order[i], order[std::clamp(j, 0, i)]);
      }
      for (int start = 0; start < n; start += cfg.minibatch_size) {
        const int b = std::min(cfg.minibatch_size, n - start);
        Minibatch mb{Eigen::MatrixXd(obs_size, b), Eigen::MatrixXd(act_size, b),
                     Eigen::VectorXd(b), Eigen::VectorXd(b), Eigen::VectorXd(b)};
        for (int k = 0; k < b; ++k) {
          const int idx = order[start + k];
          mb.obs.col(k) = obs.col(idx);
          mb.actions.col(k) = actions.col(idx);
          mb.old_logp(k) = logp(idx);
          mb.advantages(k) = advantages(idx);
          mb.returns(k) = returns(idx);
        }
        NormalizeAdvantages(mb.advantages);
        AgentGradient grad = AgentGradient::ZerosLike(agent);
        const LossTerms terms = PpoLoss(agent, mb, coef, &grad);
        const double norm = grad.Norm();
        if (norm > cfg.max_grad_norm) grad.Scale(cfg.max_grad_norm / (norm + 1e-6));
        opt_mean.Step(agent.policy.mean_net.params(), grad.mean_net, lr);
        opt_log_std.Step(agent.policy.log_std, grad.log_std, lr);
        agent.policy.log_std =
            agent.policy.log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
        opt_value.Step(agent.value.params(), grad.value, lr);
        sum.total += terms.total;
        sum.policy += terms.policy;
        sum.value += terms.value;
        sum.entropy += terms.entropy;
        sum.clip_fraction += terms.clip_fraction;
        sum.approx_kl += terms.approx_kl;
        sum.skipped += terms.skipped;
        ++batches;
      }
    }

    log.iteration = it;
    log.steps = steps;
    log.lr = lr;
    log.mean_step_reward = reward_sum / n;
    const double nb = std::max(batches, 1);
    log.loss = {sum.total / nb,    sum.policy / nb,        sum.value / nb,
                sum.entropy / nb, sum.clip_fraction / nb, sum.approx_kl / nb,
                sum.skipped};
    if (recent.empty()) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      log.mean_return = log.mean_final_metric = log.success_fraction = nan;
    } else {
      double ret = 0.0, metric = 0.0, succ = 0.0;
      for (const EpisodeStat& s : recent) {
        ret += s.ret;
        metric += s.final_metric;
        succ += s.success ? 1.0 : 0.0;
      }
      const double m = static_cast<double>(recent.size());
      log.mean_return = ret / m;
      log.mean_final_metric = metric / m;
      log.success_fraction = succ / m;
    }
    result.log.push_back(log);
    if (hooks.on_iteration) hooks.on_iteration(log);

    if (!AgentFinite(agent)) {
      if (!hooks.diagnostic_checkpoint.empty()) {
        Checkpoint ckpt{cfg, agent, steps, hooks.context, RngState(slots)};
        ckpt.context["diagnostic"] = "non-finite parameters";
        SaveCheckpoint(ckpt, hooks.diagnostic_checkpoint);
      }
      throw TrajectoryDiverged("training produced non-finite parameters at "
                               "iteration " + std::to_string(it));
    }
  }
  result.steps = steps;
  return result;
}

namespace {

// Non-finite entries (diagnostic checkpoints) are stored as null.
nlohmann::json VectorJson(const Eigen::VectorXd& v) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(FiniteOrNull(v(i)));
  return j;
}

Eigen::VectorXd VectorFromJson(const nlohmann::json& j) {
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(i) = j[i].is_null() ? std::numeric_limits<double>::quiet_NaN()
                          : j[i].get<double>();
  }
  return v;
}

void LoadParams(Mlp& net, const nlohmann::json& j, const char* what) {
  const Eigen::VectorXd p = VectorFromJson(j);
  if (p.size() != net.num_params()) {
    throw CheckpointError(std::string("checkpoint: ") + what +
                          " parameter count does not match its layer sizes");
  }
  net.params() = p;
}

}  // namespace

void SaveCheckpoint(const Checkpoint& ckpt, const std::string& path) {
  nlohmann::json j;
  j["format"] = kCheckpointFormat;
  j["config"] = ToJson(ckpt.config);
  j["steps"] = ckpt.steps;
  j["context"] = ckpt.context.is_null() ? nlohmann::json::object() : ckpt.context;
  j["rng_state"] = ckpt.rng_state.is_null() ? nlohmann::json::array() : ckpt.rng_state;
  j["policy"] = {{"sizes", ckpt.agent.policy.mean_net.sizes()},
                 {"params", VectorJson(ckpt.agent.policy.mean_net.params())},
                 {"log_std", VectorJson(ckpt.agent.policy.log_std)}};
  j["value"] = {{"sizes", ckpt.agent.value.sizes()},
                {"params", VectorJson(ckpt.agent.value.params())}};
  std::ofstream out(path);
  if (!out) throw Error("cannot write checkpoint " + path);
  out << j.dump() << '\n';
  if (!out) throw Error("failed writing checkpoint " + path);
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot read checkpoint " + path);
  Checkpoint ckpt;
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    const int format = j.at("format").get<int>();
    if (format != kCheckpointFormat) {
      throw CheckpointError("checkpoint format " + std::to_string(format) +
                            " is not supported (expected " +
                            std::to_string(kCheckpointFormat) + ")");
    }
    ckpt.config = TrainConfigFromJson(j.at("config"));
    ckpt.steps = j.at("steps").get<long>();
    ckpt.context = j.at("context");
    ckpt.rng_state = j.at("rng_state");
    ckpt.agent.policy.mean_net = Mlp(j.at("policy").at("sizes").get<std::vector<int>>());
    LoadParams(ckpt.agent.policy.mean_net, j.at("policy").at("params"), "policy");
    ckpt.agent.policy.log_std = VectorFromJson(j.at("policy").at("log_std"));
    if (ckpt.agent.policy.log_std.size() != ckpt.agent.policy.mean_net.output_size()) {
      throw CheckpointError("checkpoint: log_std length does not match the policy");
    }
    ckpt.agent.value = Mlp(j.at("value").at("sizes").get<std::vector<int>>());
    LoadParams(ckpt.agent.value, j.at("value").at("params"), "value");
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError("malformed checkpoint " + path + ": " + e.what());
  }
  return ckpt;
}

}  // namespace qstab
