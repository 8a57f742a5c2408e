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


#include "qstab/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "qstab/catalog.h"
#include "qstab/errors.h"

namespace qstab {
namespace {

int LineOf(const YAML::Node& node) {
  const YAML::Mark m = node.Mark();
  return m.is_null() ? 0 : m.line + 1;
}

// A mapping whose keys must all be consumed by Get/Child calls.
class Section {
 public:
  Section(const YAML::Node& node, std::string name)
      : node_(node), name_(std::move(name)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) {
      throw ConfigError("'" + name_ + "' must be a mapping", LineOf(node_));
    }
  }

  bool Has(const std::string& key) {
    known_.insert(key);
    return node_ && node_.IsMap() && node_[key] && !node_[key].IsNull();
  }

  YAML::Node Child(const std::string& key) {
    return Has(key) ? node_[key] : YAML::Node();
  }

  template <typename T>
  T Get(const std::string& key, T fallback) {
    if (!Has(key)) return fallback;
    const YAML::Node v = node_[key];
    const auto bad = [&]() -> ConfigError {
      return ConfigError("'" + Path(key) + "' has the wrong type", LineOf(v));
    };
    try {
      if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        try {
          return v.as<T>();
        } catch (const YAML::Exception&) {
        }
        // Accept 1e8-style integers.
        const double d = v.as<double>();
        if (std::floor(d) != d || std::abs(d) > 9.0e18 ||
            (std::is_unsigned_v<T> && d < 0)) {
          throw bad();
        }
        return static_cast<T>(d);
      } else {
        return v.as<T>();
      }
    } catch (const YAML::Exception&) {
      throw bad();
    }
  }

  void RejectUnknown() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!known_.count(key)) {
        throw ConfigError("unknown key '" + Path(key) + "'", LineOf(kv.first));
      }
    }
  }

  int line() const { return LineOf(node_); }
  // Line of the key a validation message names, else of the section.
  int LineFor(const std::string& message) const {
    if (!node_ || !node_.IsMap()) return line();
    int best = line();
    std::size_t best_len = 0;
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (key.size() > best_len && message.find(key) != std::string::npos) {
        best = LineOf(kv.first);
        best_len = key.size();
      }
    }
    return best;
  }
  int LineOfKey(const std::string& key) const {
    return node_ && node_.IsMap() && node_[key] ? LineOf(node_[key]) : line();
  }
  std::string Path(const std::string& key) const {
    return name_.empty() ? key : name_ + "." + key;
  }

 private:
  YAML::Node node_;
  std::string name_;
  std::set<std::string> known_;
};

nlohmann::json YamlToJson(const YAML::Node& node) {
  if (node.IsSequence()) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& item : node) a.push_back(YamlToJson(item));
    return a;
  }
  if (node.IsMap()) {
    nlohmann::json o = nlohmann::json::object();
    for (const auto& kv : node) {
      o[kv.first.as<std::string>()] = YamlToJson(kv.second);
    }
    return o;
  }
  if (node.IsScalar()) {
    try {
      return node.as<double>();
    } catch (const YAML::Exception&) {
      return node.as<std::string>();
    }
  }
  return nullptr;
}

ComplexMatrix YamlMatrix(const YAML::Node& node, const std::string& what) {
  try {
    return MatrixFromJson(YamlToJson(node));
  } catch (const Error& e) {
    throw ConfigError("'" + what + "': " + e.what(), LineOf(node));
  }
}

// Runs `fn`, turning library validation errors into line-tagged errors.
template <typename Fn>
void AtLine(int line, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what(), line);
  }
}

template <typename Fn>
void Validated(const Section& s, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what(), s.LineFor(e.what()));
  }
}

ZoneBounds GetZone(Section& s, const std::string& key, ZoneBounds zone) {
  if (!s.Has(key)) return zone;
  const YAML::Node n = s.Child(key);
  std::vector<double> v;
  try {
    v = n.as<std::vector<double>>();
  } catch (const YAML::Exception&) {
  }
  if (v.size() != 4) {
    throw ConfigError("'" + s.Path(key) +
                          "' must be [d_low, d_high, r_low, r_high]",
                      LineOf(n));
  }
  return {v[0], v[1], v[2], v[3]};
}

void ParseSystem(const YAML::Node& node, ExperimentConfig& c) {
  if (!node || node.IsNull()) {
    c.system = CatalogEntry(c.system_name).system;
    return;
  }
  if (node.IsScalar()) {
    c.system_name = node.as<std::string>();
    AtLine(LineOf(node), [&] { c.system = CatalogEntry(c.system_name).system; });
    return;
  }
  Section s(node, "system");
  c.system_name = "inline";
  SystemSpec sys;
  sys.name = s.Get<std::string>("name", "inline");
  if (!s.Has("h0") || !s.Has("controls") || !s.Has("observable")) {
    throw ConfigError("inline system needs h0, controls and observable",
                      s.line());
  }
  sys.h0 = YamlMatrix(s.Child("h0"), "system.h0");
  const YAML::Node controls = s.Child("controls");
  if (!controls.IsSequence()) {
    throw ConfigError("'system.controls' must be a list", LineOf(controls));
  }
  for (const auto& h : controls) {
    sys.controls.push_back(YamlMatrix(h, "system.controls"));
  }
  sys.observable = YamlMatrix(s.Child("observable"), "system.observable");
  sys.kappa_c = s.Get("kappa_c", sys.kappa_c);
  sys.eta_c = s.Get("eta_c", sys.eta_c);
  sys.dt = s.Get("dt", sys.dt);
  sys.action_low = s.Get("action_low",
                         std::vector<double>(sys.controls.size(), -1.0));
  sys.action_high = s.Get("action_high",
                          std::vector<double>(sys.controls.size(), 1.0));
  s.RejectUnknown();
  Validated(s, [&] { sys.Validate(); });
  c.system = std::move(sys);
}

void ParseTarget(const YAML::Node& node, ExperimentConfig& c) {
  if (!node || node.IsNull()) {
    if (c.system_name == "inline") {
      throw ConfigError("'target' is required for an inline system");
    }
    const SystemCatalogEntry e = CatalogEntry(c.system_name);
    c.target_name = e.target_name;
    c.target = e.target;
    return;
  }
  if (node.IsScalar()) {
    c.target_name = node.as<std::string>();
    AtLine(LineOf(node), [&] { c.target = CatalogState(c.target_name); });
  } else {
    c.target_name = "inline";
    const ComplexMatrix m = YamlMatrix(node, "target");
    AtLine(LineOf(node), [&] { c.target = DensityMatrix::FromMatrix(m); });
  }
  if (c.target.dim() != c.system.dim()) {
    throw ConfigError("target dimension " + std::to_string(c.target.dim()) +
                          " does not match system dimension " +
                          std::to_string(c.system.dim()),
                      LineOf(node));
  }
}

// Shortest text that parses back to the same double.
std::string Num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::vector<std::string> Nums(const std::vector<double>& v) {
  std::vector<std::string> out;
  for (double x : v) out.push_back(Num(x));
  return out;
}

void EmitMatrix(YAML::Emitter& out, const ComplexMatrix& m) {
  out << YAML::BeginMap;
  for (const char* part : {"re", "im"}) {
    out << YAML::Key << part << YAML::Value << YAML::BeginSeq;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      out << YAML::Flow << YAML::BeginSeq;
      for (Eigen::Index k = 0; k < m.cols(); ++k) {
        out << Num(part[0] == 'r' ? m(r, k).real() : m(r, k).imag());
      }
      out << YAML::EndSeq;
    }
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;
}

void EmitZone(YAML::Emitter& out, const char* key, const ZoneBounds& z) {
  out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq
      << Num(z.d_low) << Num(z.d_high) << Num(z.r_low) << Num(z.r_high)
      << YAML::EndSeq;
}

}  // namespace

InitialStateSpec ParseInitialStateArg(const std::string& text) {
  InitialStateSpec spec;
  const std::string prefix = "fixed:";
  if (text.rfind(prefix, 0) == 0) {
    spec.mode = InitialStateMode::kFixed;
    spec.fixed = CatalogState(text.substr(prefix.size()));
    return spec;
  }
  spec.mode = ParseInitialStateMode(text);
  if (spec.mode == InitialStateMode::kFixed) {
    throw ContractViolation("fixed initial state needs a name: fixed:<state>");
  }
  return spec;
}

void SetRootSeed(ExperimentConfig& c, std::uint64_t seed) {
  c.seed = seed;
  c.train.seed = seed;
  c.eval.seed = seed;
}

ExperimentConfig ParseExperimentConfig(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.is_null() ? 0 : e.mark.line + 1);
  }
  ExperimentConfig c;
  Section top(root, "");

  ParseSystem(top.Child("system"), c);
  ParseTarget(top.Child("target"), c);
  SetRootSeed(c, top.Get<std::uint64_t>("seed", 0));
  c.output_dir = top.Get<std::string>("output_dir", c.output_dir);

  {
    Section s(top.Child("imperfections"), "imperfections");
    c.eta_c = s.Get("eta_c", c.system.eta_c);
    c.delay_steps = s.Get("delay_steps", 0);
    s.RejectUnknown();
    c.system.eta_c = c.eta_c;
    Validated(s, [&] { c.system.Validate(); });
    if (c.delay_steps < 0) {
      throw ConfigError("'imperfections.delay_steps' must be >= 0",
                        s.LineOfKey("delay_steps"));
    }
  }

  {
    Section s(top.Child("reward"), "reward");
    RewardVariant variant = RewardVariant::kPNR;
    if (s.Has("variant")) {
      AtLine(s.LineOfKey("variant"), [&] {
        variant = ParseVariant(s.Get<std::string>("variant", "PNR"));
      });
    }
    RewardSpec r = DefaultRewardSpec(variant);
    if (s.Has("d")) {
      const double d = s.Get("d", r.d);
      AtLine(s.LineOfKey("d"), [&] { r.SetPartition(d); });
    }
    r.e = s.Get("e", r.e);
    r.f = s.Get("f", r.f);
    r.proximity = GetZone(s, "proximity", r.proximity);
    r.exploration = GetZone(s, "exploration", r.exploration);
    r.whole = GetZone(s, "whole", r.whole);
    r.step_penalty = s.Get("step_penalty", r.step_penalty);
    r.step_penalty_unit = s.Get("step_penalty_unit", r.step_penalty_unit);
    s.RejectUnknown();
    Validated(s, [&] { r.Validate(); });
    c.reward = r;
  }

  {
    Section s(top.Child("episode"), "episode");
    EpisodeConfig& e = c.episode;
    e.dt = c.system.dt;
    e.max_time = s.Get("max_time", c.system_name == "inline"
                                       ? e.max_time
                                       : CatalogEntry(c.system_name).max_time);
    e.success_window = s.Get("success_window", e.success_window);
    c.train_initial_state =
        s.Get<std::string>("initial_state", c.train_initial_state);
    AtLine(s.LineOfKey("initial_state"), [&] {
      e.initial_state = ParseInitialStateArg(c.train_initial_state);
    });
    e.terminate_on_success =
        s.Get("terminate_on_success", e.terminate_on_success);
    e.partition_d = c.reward.d;
    e.delay_steps = c.delay_steps;
    s.RejectUnknown();
    Validated(s, [&] { e.Validate(); });
    if (e.initial_state.fixed && e.initial_state.fixed->dim() != c.system.dim()) {
      throw ConfigError("initial state dimension does not match the system",
                        s.LineOfKey("initial_state"));
    }
  }

  {
    Section s(top.Child("train"), "train");
    TrainConfig& t = c.train;
    t.total_steps = s.Get("total_steps", t.total_steps);
    t.num_envs = s.Get("num_envs", t.num_envs);
    t.rollout_steps = s.Get("rollout_steps", t.rollout_steps);
    t.minibatch_size = s.Get("minibatch_size", t.minibatch_size);
    t.epochs = s.Get("epochs", t.epochs);
    t.gamma = s.Get("gamma", t.gamma);
    t.gae_lambda = s.Get("gae_lambda", t.gae_lambda);
    t.clip = s.Get("clip", t.clip);
    t.lr_start = s.Get("lr_start", t.lr_start);
    t.ent_coef = s.Get("ent_coef", t.ent_coef);
    t.vf_coef = s.Get("vf_coef", t.vf_coef);
    t.max_grad_norm = s.Get("max_grad_norm", t.max_grad_norm);
    t.hidden = s.Get("hidden", t.hidden);
    t.init_log_std = s.Get("init_log_std", t.init_log_std);
    s.RejectUnknown();
    Validated(s, [&] { t.Validate(); });
  }

  {
    Section s(top.Child("eval"), "eval");
    EvalProtocol& p = c.eval;
    p.n_initial_states = s.Get("n_initial_states", p.n_initial_states);
    p.n_noise_realizations =
        s.Get("n_noise_realizations", p.n_noise_realizations);
    p.t_max = s.Get("t_max", p.t_max);
    p.success_threshold = s.Get("success_threshold", c.reward.d);
    p.success_window = s.Get("success_window", c.episode.success_window);
    c.eval_initial_state =
        s.Get<std::string>("initial_state", c.eval_initial_state);
    AtLine(s.LineOfKey("initial_state"), [&] {
      p.initial_state = ParseInitialStateArg(c.eval_initial_state);
    });
    p.downsample = s.Get("downsample", p.downsample);
    p.full_resolution = s.Get("full_resolution", p.full_resolution);
    if (c.eta_c != 1.0) p.eta_c = c.eta_c;
    p.delay_steps = c.delay_steps;
    s.RejectUnknown();
    Validated(s, [&] { p.Validate(); });
  }

  {
    Section s(top.Child("baseline"), "baseline");
    LyapunovConfig& b = c.baseline;
    const std::size_t channels = c.system.controls.size();
    const YAML::Node gain = s.Child("gain");
    if (gain && gain.IsScalar()) {
      b.gain.assign(channels, s.Get("gain", 5.0));
    } else {
      b.gain = s.Get("gain", std::vector<double>(channels, 5.0));
    }
    b.switch_fidelity = s.Get("switch_fidelity", b.switch_fidelity);
    b.switch_drive = s.Get("switch_drive", b.switch_drive);
    s.RejectUnknown();
    Validated(s, [&] { b.Validate(c.system); });
  }

  {
    Section s(top.Child("ablate"), "ablate");
    c.budget_scale = s.Get("budget_scale", c.budget_scale);
    if (!(c.budget_scale > 0.0) || !std::isfinite(c.budget_scale)) {
      throw ConfigError("'ablate.budget_scale' must be > 0",
                        s.LineOfKey("budget_scale"));
    }
    if (s.Has("variants")) {
      const auto names = s.Get("variants", std::vector<std::string>{});
      AtLine(s.LineOfKey("variants"), [&] {
        for (const std::string& n : names) {
          c.ablate_variants.push_back(ParseVariant(n));
        }
      });
    } else {
      c.ablate_variants.assign(std::begin(kAllRewardVariants),
                               std::end(kAllRewardVariants));
    }
    s.RejectUnknown();
  }

  top.RejectUnknown();
  return c;
}

ExperimentConfig LoadExperimentConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return ParseExperimentConfig(buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string ResolvedConfigYaml(const ExperimentConfig& c) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "system" << YAML::Value;
  if (c.system_name == "inline") {
    const SystemSpec& s = c.system;
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << s.name;
    out << YAML::Key << "h0" << YAML::Value;
    EmitMatrix(out, s.h0);
    out << YAML::Key << "controls" << YAML::Value << YAML::BeginSeq;
    for (const ComplexMatrix& h : s.controls) EmitMatrix(out, h);
    out << YAML::EndSeq;
    out << YAML::Key << "observable" << YAML::Value;
    EmitMatrix(out, s.observable);
    out << YAML::Key << "kappa_c" << YAML::Value << Num(s.kappa_c);
    out << YAML::Key << "dt" << YAML::Value << Num(s.dt);
    out << YAML::Key << "action_low" << YAML::Value << YAML::Flow
        << Nums(s.action_low);
    out << YAML::Key << "action_high" << YAML::Value << YAML::Flow
        << Nums(s.action_high);
    out << YAML::EndMap;
  } else {
    out << c.system_name;
  }
  out << YAML::Key << "target" << YAML::Value;
  if (c.target_name == "inline") {
    EmitMatrix(out, c.target.matrix());
  } else {
    out << c.target_name;
  }
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "output_dir" << YAML::Value << c.output_dir;

  out << YAML::Key << "imperfections" << YAML::Value << YAML::BeginMap
      << YAML::Key << "eta_c" << YAML::Value << Num(c.eta_c) << YAML::Key
      << "delay_steps" << YAML::Value << c.delay_steps << YAML::EndMap;

  const RewardSpec& r = c.reward;
  out << YAML::Key << "reward" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "variant" << YAML::Value
      << std::string(VariantName(r.variant));
  out << YAML::Key << "d" << YAML::Value << Num(r.d);
  out << YAML::Key << "e" << YAML::Value << Num(r.e);
  out << YAML::Key << "f" << YAML::Value << Num(r.f);
  EmitZone(out, "proximity", r.proximity);
  EmitZone(out, "exploration", r.exploration);
  EmitZone(out, "whole", r.whole);
  out << YAML::Key << "step_penalty" << YAML::Value << r.step_penalty;
  out << YAML::Key << "step_penalty_unit" << YAML::Value
      << Num(r.step_penalty_unit);
  out << YAML::EndMap;

  const EpisodeConfig& e = c.episode;
  out << YAML::Key << "episode" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "max_time" << YAML::Value << Num(e.max_time);
  out << YAML::Key << "success_window" << YAML::Value << e.success_window;
  out << YAML::Key << "initial_state" << YAML::Value << c.train_initial_state;
  out << YAML::Key << "terminate_on_success" << YAML::Value
      << e.terminate_on_success;
  out << YAML::EndMap;

  const TrainConfig& t = c.train;
  out << YAML::Key << "train" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "total_steps" << YAML::Value << t.total_steps;
  out << YAML::Key << "num_envs" << YAML::Value << t.num_envs;
  out << YAML::Key << "rollout_steps" << YAML::Value << t.rollout_steps;
  out << YAML::Key << "minibatch_size" << YAML::Value << t.minibatch_size;
  out << YAML::Key << "epochs" << YAML::Value << t.epochs;
  out << YAML::Key << "gamma" << YAML::Value << Num(t.gamma);
  out << YAML::Key << "gae_lambda" << YAML::Value << Num(t.gae_lambda);
  out << YAML::Key << "clip" << YAML::Value << Num(t.clip);
  out << YAML::Key << "lr_start" << YAML::Value << Num(t.lr_start);
  out << YAML::Key << "ent_coef" << YAML::Value << Num(t.ent_coef);
  out << YAML::Key << "vf_coef" << YAML::Value << Num(t.vf_coef);
  out << YAML::Key << "max_grad_norm" << YAML::Value << Num(t.max_grad_norm);
  out << YAML::Key << "hidden" << YAML::Value << YAML::Flow << t.hidden;
  out << YAML::Key << "init_log_std" << YAML::Value << Num(t.init_log_std);
  out << YAML::EndMap;

  const EvalProtocol& p = c.eval;
  out << YAML::Key << "eval" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "n_initial_states" << YAML::Value << p.n_initial_states;
  out << YAML::Key << "n_noise_realizations" << YAML::Value
      << p.n_noise_realizations;
  out << YAML::Key << "t_max" << YAML::Value << Num(p.t_max);
  out << YAML::Key << "success_threshold" << YAML::Value
      << Num(p.success_threshold);
  out << YAML::Key << "success_window" << YAML::Value << p.success_window;
  out << YAML::Key << "initial_state" << YAML::Value << c.eval_initial_state;
  out << YAML::Key << "downsample" << YAML::Value << p.downsample;
  out << YAML::Key << "full_resolution" << YAML::Value << p.full_resolution;
  out << YAML::EndMap;

  const LyapunovConfig& b = c.baseline;
  out << YAML::Key << "baseline" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "gain" << YAML::Value << YAML::Flow << Nums(b.gain);
  out << YAML::Key << "switch_fidelity" << YAML::Value << Num(b.switch_fidelity);
  out << YAML::Key << "switch_drive" << YAML::Value << YAML::Flow
      << Nums(b.switch_drive);
  out << YAML::EndMap;

  std::vector<std::string> variants;
  for (RewardVariant v : c.ablate_variants) {
    variants.emplace_back(VariantName(v));
  }
  out << YAML::Key << "ablate" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "budget_scale" << YAML::Value << Num(c.budget_scale);
  out << YAML::Key << "variants" << YAML::Value << YAML::Flow << variants;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

EnvFactory MakeEnvFactory(const ExperimentConfig& c) {
  return [system = c.system, target = c.target, episode = c.episode,
          reward = c.reward](int) -> std::unique_ptr<RlEnvironment> {
    return std::make_unique<QuantumRlEnvironment>(
        Environment(system, target, episode, reward));
  };
}

}  // namespace qstab
