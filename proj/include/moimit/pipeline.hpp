// Copyright 2026 The moimit Authors.
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

#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "moimit/config.hpp"
#include "moimit/eval_metrics.hpp"
#include "moimit/motion_io.hpp"
#include "moimit/ppo.hpp"
#include "moimit/refgen.hpp"
#include "moimit/retarget.hpp"
#include "moimit/svg_plot.hpp"

namespace moimit {

/// Error tagged with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error("[" + stage + "] " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

template <typename F>
auto run_stage(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

/// FNV-1a over the serialized joint angles; identifies a reference motion.
inline std::uint64_t reference_hash(const ReferenceMotion& ref) {
  std::ostringstream os;
  write_reference(os, ref);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : os.str()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Reference generation
// ---------------------------------------------------------------------------

struct RefgenOutput {
  ReferenceMotion reference;
  std::vector<double> ik_residuals;
  std::size_t input_frames = 0;
};

/// load -> ground -> extract -> match base -> rescale -> IK -> spline -> LOWESS.
inline RefgenOutput run_refgen(const PipelineConfig& cfg) {
  const KinematicChain chain = run_stage("load_chain", [&] { return load_chain(cfg.paths.chain.string()); });
  const KeypointIndexMap map = run_stage("load_index_map", [&] {
    return cfg.paths.index_map.empty() ? human36m_index_map() : load_index_map(cfg.paths.index_map.string());
  });
  const KeypointSequence raw = run_stage("load_keypoints", [&] { return load_keypoints(cfg.paths.keypoints.string()); });
  const KeypointSequence grounded = run_stage("ground", [&] { return ground_sequence(raw, cfg.vertical_axis); });
  const ArmMotion arm = run_stage("extract_arm", [&] { return extract_arm(grounded, cfg.side, map); });
  const ArmMotion based = run_stage("match_base", [&] { return match_base(arm, cfg.retarget); });
  const ArmMotion scaled = run_stage("rescale_links", [&] { return rescale_links(based, cfg.retarget); });
  GeneratedReference gen = run_stage("inverse_kinematics", [&] { return generate_reference(chain, scaled, cfg.ik); });
  ReferenceMotion dense = run_stage("interpolate", [&] { return interpolate(chain, gen.motion, cfg.refgen); });
  ReferenceMotion smooth = run_stage("smooth", [&] {
    return dense.size() >= 3 ? smooth_lowess(chain, dense, cfg.refgen) : dense;
  });
  return {std::move(smooth), std::move(gen.residuals), raw.frames.size()};
}

/// Writes reference.txt, reference_positions.txt and refgen_report.txt.
inline RefgenOutput cmd_refgen(const PipelineConfig& cfg, std::ostream& log) {
  RefgenOutput out = run_refgen(cfg);
  run_stage("write", [&] {
    const auto& dir = cfg.paths.output_dir;
    std::filesystem::create_directories(dir);
    save_reference((dir / "reference.txt").string(), out.reference);
    std::ofstream pos(dir / "reference_positions.txt");
    write_reference_positions(pos, out.reference);
    double mean = 0.0, worst = 0.0;
    for (double r : out.ik_residuals) mean += r, worst = std::max(worst, r);
    mean /= static_cast<double>(std::max<std::size_t>(1, out.ik_residuals.size()));
    std::ofstream rep(dir / "refgen_report.txt");
    rep << "input_frames " << out.input_frames << "\noutput_frames " << out.reference.size()
        << "\nik_residual_mean_m " << detail::format_double(mean) << "\nik_residual_max_m "
        << detail::format_double(worst) << '\n';
    log << "refgen: " << out.input_frames << " keypoint frames -> " << out.reference.size()
        << " reference frames, IK residual mean " << mean << " m, max " << worst << " m\n";
    return 0;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

using PolicyScalar = float;

inline ImitationEnv make_env(const KinematicChain& chain, const ReferenceMotion& ref, const EnvConfig& cfg) {
  return ImitationEnv(chain, std::make_shared<const ReferenceMotion>(ref), cfg);
}

/// Pointwise mean of several curves, truncated to the shortest.
inline std::vector<double> mean_curve(const std::vector<std::vector<double>>& curves) {
  if (curves.empty()) return {};
  std::size_t n = curves.front().size();
  for (const auto& c : curves) n = std::min(n, c.size());
  std::vector<double> out(n, 0.0);
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < n; ++i) out[i] += c[i];
  }
  for (double& v : out) v /= static_cast<double>(curves.size());
  return out;
}

struct TrainOutput {
  std::vector<TrainResult<PolicyScalar>> runs;
  std::vector<double> mean_reward_curve;
};

/// Trains `runs` policies with seeds seed, seed+1, ...; writes one
/// checkpoint per run, the averaged reward curve (CSV) and its chart.
inline TrainOutput cmd_train(const PipelineConfig& cfg, std::uint64_t seed, int runs, std::ostream& log) {
  if (runs < 1) throw StageError("train", "--runs must be >= 1");
  if (cfg.paths.reference.empty() || !std::filesystem::exists(cfg.paths.reference)) {
    throw StageError("train", "reference file '" + cfg.paths.reference.string() + "' does not exist");
  }
  const KinematicChain chain = run_stage("load_chain", [&] { return load_chain(cfg.paths.chain.string()); });
  const ReferenceMotion ref =
      run_stage("load_reference", [&] { return load_reference(cfg.paths.reference.string(), chain); });
  const std::uint64_t ref_hash = reference_hash(ref);

  TrainOutput out;
  run_stage("train", [&] {
    for (int r = 0; r < runs; ++r) {
      const std::uint64_t run_seed = seed + static_cast<std::uint64_t>(r);
      log << "train: run " << r << " (seed " << run_seed << ")\n";
      out.runs.push_back(train<PolicyScalar>(make_env(chain, ref, cfg.env), cfg.ppo, run_seed));
      const auto& res = out.runs.back();
      log << "train: run " << r << " finished, " << res.curve.size() << " episodes, " << res.steps << " steps\n";
    }
    return 0;
  });

  run_stage("write", [&] {
    const auto& dir = cfg.paths.output_dir;
    std::filesystem::create_directories(dir);
    std::vector<std::vector<double>> curves;
    for (int r = 0; r < runs; ++r) {
      const auto& res = out.runs[static_cast<std::size_t>(r)];
      const std::string name = r == 0 ? "checkpoint.txt" : "checkpoint_run" + std::to_string(r) + ".txt";
      std::ofstream ck(dir / name);
      write_checkpoint(ck, res.params, {res.steps, ref_hash});
      std::vector<double> c;
      for (const auto& e : res.curve) c.push_back(e.accumulated_reward);
      curves.push_back(std::move(c));
    }
    out.mean_reward_curve = mean_curve(curves);
    std::ofstream csv(dir / "reward_curve.csv");
    csv << "episode,accumulated_reward,steps";
    for (int r = 0; r < runs; ++r) csv << ",run" << r;
    csv << '\n';
    for (std::size_t i = 0; i < out.mean_reward_curve.size(); ++i) {
      double steps = 0.0;
      for (const auto& res : out.runs) steps += static_cast<double>(res.curve[i].steps);
      csv << i << ',' << detail::format_double(out.mean_reward_curve[i]) << ','
          << detail::format_double(steps / runs);
      for (const auto& c : curves) csv << ',' << detail::format_double(c[i]);
      csv << '\n';
    }
    plot::LineChart chart{"Average accumulated reward (" + std::to_string(runs) + " run" + (runs > 1 ? "s" : "") + ")",
                          "episode", "accumulated reward", {}};
    std::vector<double> xs(out.mean_reward_curve.size());
    std::iota(xs.begin(), xs.end(), 0.0);
    chart.series.push_back({"mean", xs, out.mean_reward_curve});
    plot::write_svg((dir / "reward_curve.svg").string(), chart);
    return 0;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Runs one episode from `start` until done, logging every frame including
/// the initial one. `policy(obs, env)` returns the raw action.
template <typename Policy>
std::vector<EpisodeRecord> rollout_episode(ImitationEnv& env, Policy&& policy, std::size_t start = 0) {
  std::vector<EpisodeRecord> log;
  Observation obs = env.reset(start);
  log.push_back(env.record());
  bool done = false;
  while (!done) {
    const StepResult sr = env.step(policy(obs, env));
    log.push_back(env.record());
    obs = sr.observation;
    done = sr.done;
  }
  return log;
}

/// Environment settings for evaluation: the episode covers the whole reference.
inline EnvConfig evaluation_env_config(EnvConfig cfg, const ReferenceMotion& ref) {
  cfg.max_episode_len = std::max(cfg.max_episode_len, static_cast<int>(ref.size()));
  return cfg;
}

/// Deterministic rollout of the actor mean over the full reference.
template <typename Scalar>
std::vector<EpisodeRecord> evaluate_policy(const ActorCritic<Scalar>& params, const KinematicChain& chain,
                                           const ReferenceMotion& ref, const EnvConfig& cfg) {
  ImitationEnv env = make_env(chain, ref, evaluation_env_config(cfg, ref));
  return rollout_episode(env, [&](const Observation& obs, const ImitationEnv&) { return policy_mean(params, obs); });
}

/// Oracle that commands the next reference pose with smoothing disabled,
/// so the robot replays the reference exactly.
inline std::vector<EpisodeRecord> evaluate_replay(const KinematicChain& chain, const ReferenceMotion& ref,
                                                  EnvConfig cfg) {
  cfg.beta = 1.0;
  ImitationEnv env = make_env(chain, ref, evaluation_env_config(cfg, ref));
  return rollout_episode(env, [](const Observation&, const ImitationEnv& e) -> Action {
    return e.reference().q[e.state().cursor + 1].head<kActionDim>();
  });
}

struct EvalOutput {
  MetricsReport report;
  bool generalization = false;
  std::vector<EpisodeRecord> log;
};

inline void write_eval_outputs(const EvalOutput& out, const KinematicChain& chain, const std::filesystem::path& dir,
                               const std::string& label) {
  std::filesystem::create_directories(dir);
  std::ofstream m(dir / "metrics.csv");
  write_metrics_csv(m, out.report, {{"flag", "generalization", out.generalization ? "1" : "0"}});
  std::ofstream s(dir / "metrics_series.csv");
  write_metric_series_csv(s, out.report);
  std::ofstream l(dir / "episode_log.csv");
  write_episode_log(l, out.log);
  write_episodic_curves(episodic_curves(out.log, chain), dir, label);
}

inline std::string format_report(const MetricsReport& r, bool generalization) {
  std::ostringstream os;
  os << "delta_similarity  " << r.similarity.mean << " rad\n"
     << "delta_end_eff     " << r.end_effector.mean << " m\n"
     << "delta_mpjpe       " << r.mpjpe.mean << " m\n"
     << "frames            " << r.n_frames << '\n'
     << "generalization    " << (generalization ? "yes" : "no") << '\n';
  return os.str();
}

/// Evaluates a checkpoint on `reference_path` (the training reference when
/// empty) and writes metrics, the episode log and difference curves.
inline EvalOutput cmd_eval(const PipelineConfig& cfg, const std::filesystem::path& checkpoint_path,
                           std::filesystem::path reference_path, std::ostream& log) {
  if (reference_path.empty()) reference_path = cfg.paths.reference;
  const KinematicChain chain = run_stage("load_chain", [&] { return load_chain(cfg.paths.chain.string()); });
  const ReferenceMotion ref =
      run_stage("load_reference", [&] { return load_reference(reference_path.string(), chain); });
  CheckpointInfo info;
  const ActorCritic<PolicyScalar> params = run_stage("load_checkpoint", [&] {
    std::ifstream in(checkpoint_path);
    if (!in) throw ParseError("cannot open checkpoint '" + checkpoint_path.string() + "'");
    return read_checkpoint<PolicyScalar>(in, &info);
  });
  if (params.obs_dim() != static_cast<int>(kObservationDim) || params.action_dim() != static_cast<int>(kActionDim)) {
    throw StageError("eval", "checkpoint dimensions " + std::to_string(params.obs_dim()) + "->" +
                                 std::to_string(params.action_dim()) + " do not match the environment (21->6)");
  }
  EvalOutput out;
  run_stage("eval", [&] {
    out.log = evaluate_policy(params, chain, ref, cfg.env);
    out.report = compute_metrics(out.log, chain);
    out.generalization = reference_hash(ref) != info.reference_hash;
    return 0;
  });
  run_stage("write", [&] {
    write_eval_outputs(out, chain, cfg.paths.output_dir, reference_path.stem().string());
    return 0;
  });
  log << format_report(out.report, out.generalization);
  return out;
}

/// Scores the exact-replay oracle on a reference; a sanity baseline whose
/// metrics are zero by construction.
inline EvalOutput cmd_replay(const PipelineConfig& cfg, std::filesystem::path reference_path, std::ostream& log) {
  if (reference_path.empty()) reference_path = cfg.paths.reference;
  const KinematicChain chain = run_stage("load_chain", [&] { return load_chain(cfg.paths.chain.string()); });
  const ReferenceMotion ref =
      run_stage("load_reference", [&] { return load_reference(reference_path.string(), chain); });
  EvalOutput out;
  run_stage("eval", [&] {
    out.log = evaluate_replay(chain, ref, cfg.env);
    out.report = compute_metrics(out.log, chain);
    return 0;
  });
  run_stage("write", [&] {
    write_eval_outputs(out, chain, cfg.paths.output_dir, reference_path.stem().string() + ", replay");
    return 0;
  });
  log << format_report(out.report, out.generalization);
  return out;
}

/// Recomputes metrics and curves from an existing episode log.
inline MetricsReport cmd_metrics(const PipelineConfig& cfg, const std::filesystem::path& log_path, std::ostream& log) {
  const KinematicChain chain = run_stage("load_chain", [&] { return load_chain(cfg.paths.chain.string()); });
  const auto records = run_stage("load_log", [&] { return load_episode_log(log_path.string()); });
  EvalOutput out;
  run_stage("metrics", [&] {
    out.log = records;
    out.report = compute_metrics(out.log, chain);
    return 0;
  });
  run_stage("write", [&] {
    const auto& dir = cfg.paths.output_dir;
    std::filesystem::create_directories(dir);
    std::ofstream m(dir / "metrics.csv");
    write_metrics_csv(m, out.report);
    std::ofstream s(dir / "metrics_series.csv");
    write_metric_series_csv(s, out.report);
    write_episodic_curves(episodic_curves(out.log, chain), dir, log_path.stem().string());
    return 0;
  });
  log << format_report(out.report, false);
  return out.report;
}

}  // namespace moimit
