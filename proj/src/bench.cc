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


#include "qstab/bench.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "qstab/catalog.h"
#include "qstab/errors.h"
#include "qstab/parallel.h"
#include "qstab/random.h"

namespace qstab {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Index of the first sample that opens a run of `window` samples <= d.
std::optional<std::size_t> FirstStableIndex(const std::vector<double>& curve,
                                            double d, int window) {
  std::size_t run = 0;
  for (std::size_t k = 0; k < curve.size(); ++k) {
    run = curve[k] <= d ? run + 1 : 0;
    if (run == static_cast<std::size_t>(window)) return k + 1 - run;
  }
  return std::nullopt;
}

std::string FormatNumber(double v) {
  std::ostringstream s;
  s << std::setprecision(12) << v;
  return s.str();
}

std::string Join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string Csv(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

nlohmann::json Finite(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

std::string Interval(double lo, double hi) {
  return "[" + FormatNumber(lo) + ", " + FormatNumber(hi) + "]";
}

}  // namespace

void EvalProtocol::Validate() const {
  if (n_initial_states < 1 || n_noise_realizations < 1) {
    throw ContractViolation("protocol: grid dimensions must be >= 1");
  }
  if (!(t_max > 0.0) || !std::isfinite(t_max)) {
    throw ContractViolation("protocol: t_max must be > 0");
  }
  if (!(success_threshold > 0.0 && success_threshold < 1.0)) {
    throw ContractViolation("protocol: success_threshold must be in (0, 1)");
  }
  if (success_window < 1) {
    throw ContractViolation("protocol: success_window must be >= 1");
  }
  if (eta_c && !(*eta_c >= 0.0 && *eta_c <= 1.0)) {
    throw ContractViolation("protocol: eta_c must be in [0, 1]");
  }
  if (delay_steps < 0) throw ContractViolation("protocol: delay_steps < 0");
  if (downsample < 1) throw ContractViolation("protocol: downsample < 1");
  if (initial_state.mode == InitialStateMode::kFixed && !initial_state.fixed) {
    throw ContractViolation("protocol: fixed initial state missing");
  }
}

std::vector<std::string> EvalProtocol::Tags(double dt) const {
  std::vector<std::string> tags;
  if (eta_c) tags.push_back("eta=" + FormatNumber(*eta_c));
  if (delay_steps > 0) tags.push_back("delay=" + FormatNumber(delay_steps * dt));
  return tags;
}

nlohmann::json ToJson(const EvalProtocol& p) {
  nlohmann::json j = {
      {"n_initial_states", p.n_initial_states},
      {"n_noise_realizations", p.n_noise_realizations},
      {"t_max", p.t_max},
      {"success_threshold", p.success_threshold},
      {"success_window", p.success_window},
      {"initial_state", InitialStateModeName(p.initial_state.mode)},
      {"eta_c", p.eta_c ? nlohmann::json(*p.eta_c) : nlohmann::json(nullptr)},
      {"delay_steps", p.delay_steps},
      {"downsample", p.downsample},
      {"full_resolution", p.full_resolution},
      {"seed", p.seed}};
  if (p.initial_state.fixed) {
    j["fixed_state"] = MatrixToJson(p.initial_state.fixed->matrix());
  }
  return j;
}

EvalProtocol EvalProtocolFromJson(const nlohmann::json& j) {
  EvalProtocol p;
  try {
    p.n_initial_states = j.at("n_initial_states").get<int>();
    p.n_noise_realizations = j.at("n_noise_realizations").get<int>();
    p.t_max = j.at("t_max").get<double>();
    p.success_threshold = j.at("success_threshold").get<double>();
    p.success_window = j.at("success_window").get<int>();
    p.initial_state.mode =
        ParseInitialStateMode(j.at("initial_state").get<std::string>());
    if (j.contains("fixed_state")) {
      p.initial_state.fixed =
          DensityMatrix::FromMatrix(MatrixFromJson(j.at("fixed_state")));
    }
    if (!j.at("eta_c").is_null()) p.eta_c = j.at("eta_c").get<double>();
    p.delay_steps = j.at("delay_steps").get<int>();
    p.downsample = j.at("downsample").get<int>();
    p.full_resolution = j.at("full_resolution").get<bool>();
    p.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ContractViolation(std::string("protocol: ") + e.what());
  }
  p.Validate();
  return p;
}

Controller ZeroController(const SystemSpec& system) {
  const std::vector<double> zero(system.num_controls(), 0.0);
  return {"zero", [zero](const DensityMatrix&) { return zero; }};
}

Controller LyapunovController(const LyapunovConfig& config,
                              const SystemSpec& system,
                              const DensityMatrix& target) {
  config.Validate(system);
  return {kLyapunovLabel, [config, system, target](const DensityMatrix& rho) {
            return LyapunovControl(config, system, target, rho);
          }};
}

Controller PolicyController(const GaussianPolicy& policy) {
  return {"policy (deterministic mean action)",
          [policy](const DensityMatrix& rho) {
            const Eigen::VectorXd a =
                DeterministicAction(policy, Encode(rho).values);
            return std::vector<double>(a.data(), a.data() + a.size());
          }};
}

double StabilizationTime(const std::vector<double>& curve, double d,
                         int window, double dt, double t_max) {
  if (curve.empty()) throw ContractViolation("stabilization_time: empty curve");
  if (window < 1) throw ContractViolation("stabilization_time: window < 1");
  const auto k = FirstStableIndex(curve, d, window);
  return k ? static_cast<double>(*k) * dt : t_max;
}

EvalReport EvaluateController(const Controller& controller,
                              const SystemSpec& system,
                              const DensityMatrix& target,
                              const std::string& target_name,
                              const EvalProtocol& protocol, int workers) {
  protocol.Validate();
  SystemSpec sys = system;
  if (protocol.eta_c) sys.eta_c = *protocol.eta_c;
  sys.Validate();
  if (target.dim() != sys.dim()) {
    throw DimensionError("evaluate: target and system dimensions differ");
  }

  EpisodeConfig ec;
  ec.max_time = protocol.t_max;
  ec.dt = sys.dt;
  ec.success_window = protocol.success_window;
  ec.partition_d = protocol.success_threshold;
  ec.delay_steps = protocol.delay_steps;
  ec.terminate_on_success = false;
  ec.Validate();
  RewardSpec reward = DefaultRewardSpec(RewardVariant::kPNR);
  reward.SetPartition(protocol.success_threshold);

  const int n_init = protocol.n_initial_states;
  const int n_noise = protocol.n_noise_realizations;
  std::vector<DensityMatrix> initial;
  initial.reserve(n_init);
  for (int i = 0; i < n_init; ++i) {
    initial.push_back(SampleInitialState(
        protocol.initial_state, sys.dim(),
        DeriveSeed(protocol.seed, "init-states",
                   {static_cast<std::uint64_t>(i)})));
  }

  const int stride = protocol.full_resolution ? 1 : protocol.downsample;
  const int max_steps = ec.MaxSteps();

  EvalReport report;
  report.controller = controller.label;
  report.system = sys.name;
  report.target = target_name;
  report.protocol = protocol;
  report.tags = protocol.Tags(sys.dt);
  report.dt = sys.dt;
  report.curve_dt = sys.dt * stride;
  report.trajectories.resize(static_cast<std::size_t>(n_init) * n_noise);

  ParallelFor(static_cast<int>(report.trajectories.size()), workers,
              [&](int index) {
    const int i = index / n_noise;
    const int j = index % n_noise;
    Environment env(sys, target, ec, reward);
    env.ResetTo(initial[i],
                DeriveSeed(protocol.seed, "sme-noise",
                           {static_cast<std::uint64_t>(i),
                            static_cast<std::uint64_t>(j)}));
    std::vector<double> full;
    full.reserve(static_cast<std::size_t>(max_steps) + 1);
    full.push_back(env.distance());
    bool diverged = false;
    while (!env.done()) {
      const Transition t = env.Step(controller.act(env.observed_state()));
      if (t.reason == TerminationReason::kDiverged) {
        diverged = true;
        break;
      }
      full.push_back(t.distance);
    }
    // A diverged trajectory holds its last valid distance.
    full.resize(static_cast<std::size_t>(max_steps) + 1, full.back());

    TrajectoryResult& r = report.trajectories[index];
    r.initial_index = i;
    r.noise_index = j;
    r.diverged = diverged;
    const auto k = diverged ? std::nullopt
                            : FirstStableIndex(full, protocol.success_threshold,
                                               protocol.success_window);
    r.success = k.has_value();
    r.stabilization_time =
        k ? static_cast<double>(*k) * sys.dt : protocol.t_max;
    r.final_distance = full.back();
    for (std::size_t s = 0; s < full.size(); s += stride) {
      r.curve.push_back(full[s]);
    }
  });

  const double n = static_cast<double>(report.trajectories.size());
  double sum_t = 0.0, succ = 0.0, sum_final = 0.0;
  for (const TrajectoryResult& r : report.trajectories) {
    sum_t += r.stabilization_time;
    succ += r.success ? 1.0 : 0.0;
    sum_final += r.final_distance;
    report.diverged += r.diverged ? 1 : 0;
  }
  report.mean_time = sum_t / n;
  double ss = 0.0;
  for (const TrajectoryResult& r : report.trajectories) {
    const double dev = r.stabilization_time - report.mean_time;
    ss += dev * dev;
  }
  report.mean_time_stderr = n > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
  report.success_rate = succ / n;
  report.mean_final_distance = sum_final / n;

  const std::size_t len = report.trajectories.front().curve.size();
  report.grand_mean_curve.assign(len, 0.0);
  for (int i = 0; i < n_init; ++i) {
    std::vector<double> mean(len, 0.0);
    for (int j = 0; j < n_noise; ++j) {
      const auto& c = report.trajectories[i * n_noise + j].curve;
      for (std::size_t s = 0; s < len; ++s) mean[s] += c[s];
    }
    for (std::size_t s = 0; s < len; ++s) {
      mean[s] /= n_noise;
      report.grand_mean_curve[s] += mean[s];
    }
    report.mean_curve_per_state.push_back(std::move(mean));
  }
  for (double& v : report.grand_mean_curve) v /= n_init;
  return report;
}

ReportComparison CompareReports(const EvalReport& a, const EvalReport& b) {
  ReportComparison c;
  c.relative_time_reduction = b.mean_time != 0.0
                                  ? (b.mean_time - a.mean_time) / b.mean_time
                                  : (a.mean_time == 0.0 ? 0.0 : kNaN);
  c.success_rate_delta = a.success_rate - b.success_rate;
  const auto check = [&](bool same, const char* what) {
    if (!same) c.mismatches.emplace_back(what);
  };
  const EvalProtocol& p = a.protocol;
  const EvalProtocol& q = b.protocol;
  check(a.system == b.system, "system");
  check(a.target == b.target, "target");
  check(p.n_initial_states == q.n_initial_states, "n_initial_states");
  check(p.n_noise_realizations == q.n_noise_realizations,
        "n_noise_realizations");
  check(p.t_max == q.t_max, "t_max");
  check(p.success_threshold == q.success_threshold, "success_threshold");
  check(p.success_window == q.success_window, "success_window");
  check(p.initial_state.mode == q.initial_state.mode, "initial_state");
  check(p.eta_c == q.eta_c, "eta_c");
  check(p.delay_steps == q.delay_steps, "delay_steps");
  check(p.seed == q.seed, "seed");
  c.protocols_match = c.mismatches.empty();
  return c;
}

nlohmann::json ToJson(const ReportComparison& c) {
  return {{"relative_time_reduction", Finite(c.relative_time_reduction)},
          {"success_rate_delta", c.success_rate_delta},
          {"protocols_match", c.protocols_match},
          {"mismatches", c.mismatches}};
}

nlohmann::json ToJson(const EvalReport& r) {
  nlohmann::json trajectories = nlohmann::json::array();
  for (const TrajectoryResult& t : r.trajectories) {
    trajectories.push_back({{"initial_index", t.initial_index},
                            {"noise_index", t.noise_index},
                            {"stabilization_time", t.stabilization_time},
                            {"success", t.success},
                            {"final_distance", t.final_distance},
                            {"diverged", t.diverged},
                            {"curve", t.curve}});
  }
  return {{"metadata",
           {{"controller", r.controller},
            {"system", r.system},
            {"target", r.target},
            {"tags", r.tags},
            {"dt", r.dt},
            {"curve_dt", r.curve_dt},
            {"protocol", ToJson(r.protocol)}}},
          {"aggregates",
           {{"trajectories", r.trajectories.size()},
            {"mean_time", r.mean_time},
            {"mean_time_stderr", r.mean_time_stderr},
            {"success_rate", r.success_rate},
            {"mean_final_distance", r.mean_final_distance},
            {"diverged", r.diverged}}},
          {"grand_mean_curve", r.grand_mean_curve},
          {"mean_curve_per_state", r.mean_curve_per_state},
          {"trajectories", trajectories}};
}

void WriteTrajectoryCsv(const EvalReport& report, std::ostream& out) {
  out << "initial_index,noise_index,stabilization_time,success,"
         "final_distance,diverged\n";
  for (const TrajectoryResult& t : report.trajectories) {
    out << t.initial_index << ',' << t.noise_index << ','
        << FormatNumber(t.stabilization_time) << ',' << (t.success ? 1 : 0)
        << ',' << FormatNumber(t.final_distance) << ','
        << (t.diverged ? 1 : 0) << '\n';
  }
}

void WriteSummaryCsvHeader(std::ostream& out) {
  out << "controller,system,target,tags,trajectories,t_max,mean_time,"
         "mean_time_stderr,success_rate,mean_final_distance,diverged\n";
}

void WriteSummaryCsvRow(const EvalReport& r, std::ostream& out) {
  out << Csv(r.controller) << ',' << Csv(r.system) << ',' << Csv(r.target)
      << ',' << Csv(Join(r.tags, ";")) << ',' << r.trajectories.size() << ','
      << FormatNumber(r.protocol.t_max) << ',' << FormatNumber(r.mean_time)
      << ',' << FormatNumber(r.mean_time_stderr) << ','
      << FormatNumber(r.success_rate) << ','
      << FormatNumber(r.mean_final_distance) << ',' << r.diverged << '\n';
}

void WriteMeanSeries(const EvalReport& r, std::ostream& out) {
  out << "# t mean_distance\n";
  for (std::size_t s = 0; s < r.grand_mean_curve.size(); ++s) {
    out << FormatNumber(static_cast<double>(s) * r.curve_dt) << ' '
        << FormatNumber(r.grand_mean_curve[s]) << '\n';
  }
}

GainSearchResult TuneLyapunovGain(const LyapunovConfig& base,
                                  const SystemSpec& system,
                                  const DensityMatrix& target,
                                  const std::string& target_name,
                                  const std::vector<double>& gains,
                                  const EvalProtocol& protocol, int workers) {
  if (gains.empty()) throw ContractViolation("gain search: no gains given");
  GainSearchResult result;
  result.gains = gains;
  for (double k : gains) {
    LyapunovConfig cfg = base;
    cfg.gain.assign(static_cast<std::size_t>(system.num_controls()), k);
    result.reports.push_back(EvaluateController(
        LyapunovController(cfg, system, target), system, target, target_name,
        protocol, workers));
  }
  const auto better = [](const EvalReport& a, const EvalReport& b) {
    if (a.mean_time != b.mean_time) return a.mean_time < b.mean_time;
    if (a.success_rate != b.success_rate) return a.success_rate > b.success_rate;
    return a.mean_final_distance < b.mean_final_distance;
  };
  for (std::size_t i = 1; i < gains.size(); ++i) {
    if (better(result.reports[i], result.reports[result.best])) result.best = i;
  }
  return result;
}

void WriteGainSearchCsv(const GainSearchResult& result, std::ostream& out) {
  out << "gain,mean_time,success_rate,mean_final_distance,selected\n";
  for (std::size_t i = 0; i < result.gains.size(); ++i) {
    const EvalReport& r = result.reports[i];
    out << FormatNumber(result.gains[i]) << ',' << FormatNumber(r.mean_time)
        << ',' << FormatNumber(r.success_rate) << ','
        << FormatNumber(r.mean_final_distance) << ','
        << (i == result.best ? 1 : 0) << '\n';
  }
}

AblationRow DescribeVariant(const RewardSpec& spec) {
  AblationRow row;
  row.variant = spec.variant;
  row.partitioned = spec.partitioned();
  row.form = std::string(spec.form());
  const bool nonlinear_formula =
      spec.variant == RewardVariant::kPNR || spec.variant == RewardVariant::kPNR1;
  row.slopes = nonlinear_formula ? "e=" + FormatNumber(spec.e) +
                                       ", f=" + FormatNumber(spec.f)
                                 : "-";
  switch (spec.variant) {
    case RewardVariant::kPSR:
      row.zone_rewards = "PZ 1; EZ 0";
      break;
    case RewardVariant::kFPR:
      row.zone_rewards = "NP fidelity";
      break;
    default:
      row.zone_rewards =
          row.partitioned
              ? "PZ " + Interval(spec.proximity.r_low, spec.proximity.r_high) +
                    "; EZ " +
                    Interval(spec.exploration.r_low, spec.exploration.r_high)
              : "NP " + Interval(spec.whole.r_low, spec.whole.r_high);
  }
  row.mean_time = kNaN;
  row.success_rate = kNaN;
  return row;
}

void WriteAblationCsv(const std::vector<AblationRow>& rows, std::ostream& out) {
  out << "variant,partitioned,e/f,reward form,zone rewards,mean time,"
         "success rate,error\n";
  for (const AblationRow& r : rows) {
    const auto metric = [](double v) {
      return std::isfinite(v) ? FormatNumber(v) : std::string();
    };
    out << VariantName(r.variant) << ',' << (r.partitioned ? "Yes" : "No")
        << ',' << Csv(r.slopes) << ',' << Csv(r.form) << ','
        << Csv(r.zone_rewards) << ',' << metric(r.mean_time) << ','
        << metric(r.success_rate) << ',' << Csv(r.error) << '\n';
  }
}

}  // namespace qstab
