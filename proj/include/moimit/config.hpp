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

#include <json.hpp>

#include "moimit/imitation_env.hpp"
#include "moimit/ppo.hpp"
#include "moimit/refgen.hpp"
#include "moimit/retarget.hpp"

namespace moimit {

struct PipelinePaths {
  std::filesystem::path keypoints;
  std::filesystem::path index_map;  // empty: built-in Human3.6M map
  std::filesystem::path chain;
  std::filesystem::path reference;  // training reference for train/eval
  std::filesystem::path output_dir = "out";
};

struct PipelineConfig {
  PipelinePaths paths;
  Side side = Side::kRight;
  int vertical_axis = 2;
  RetargetConfig retarget;
  InterpSmoothConfig refgen;
  IkOptions ik;
  EnvConfig env;
  PpoConfig ppo;
  std::uint64_t seed = 1;

  void validate() const {
    retarget.validate();
    refgen.validate();
    env.validate();
    ppo.validate();
    if (vertical_axis < 0 || vertical_axis > 2) throw InvalidArgument("config: vertical_axis must be 0, 1 or 2");
  }
};

namespace detail {

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline void check_keys(const nlohmann::json& j, const char* block, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ParseError(std::string("config: block '") + block + "' must be an object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw ParseError(std::string("config: unknown key '") + k + "' in block '" + block + "'");
  }
}

}  // namespace detail

/// Parses the JSON pipeline configuration. Relative paths resolve against
/// `base_dir`. Every field is optional and defaults to the values above.
inline PipelineConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  PipelineConfig cfg;
  try {
    detail::check_keys(j, "root", {"paths", "side", "vertical_axis", "retarget", "refgen", "ik", "env", "ppo", "seed"});
    auto resolve = [&](const nlohmann::json& block, const char* key, std::filesystem::path& out) {
      if (!block.contains(key)) return;
      std::filesystem::path p = block.at(key).get<std::string>();
      out = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    };
    if (j.contains("paths")) {
      const auto& p = j.at("paths");
      detail::check_keys(p, "paths", {"keypoints", "index_map", "chain", "reference", "output_dir"});
      resolve(p, "keypoints", cfg.paths.keypoints);
      resolve(p, "index_map", cfg.paths.index_map);
      resolve(p, "chain", cfg.paths.chain);
      resolve(p, "reference", cfg.paths.reference);
      resolve(p, "output_dir", cfg.paths.output_dir);
    }
    if (j.contains("side")) cfg.side = parse_side(j.at("side").get<std::string>());
    detail::read_opt(j, "vertical_axis", cfg.vertical_axis);
    detail::read_opt(j, "seed", cfg.seed);
    if (j.contains("retarget")) {
      const auto& r = j.at("retarget");
      detail::check_keys(r, "retarget", {"scale", "up_axis"});
      detail::read_opt(r, "scale", cfg.retarget.scale);
      if (r.contains("up_axis")) {
        auto v = r.at("up_axis").get<std::array<double, 3>>();
        cfg.retarget.up_axis = Vec3(v[0], v[1], v[2]);
      }
    }
    if (j.contains("refgen")) {
      const auto& r = j.at("refgen");
      detail::check_keys(r, "refgen", {"gap_threshold", "step", "lowess_bandwidth"});
      detail::read_opt(r, "gap_threshold", cfg.refgen.gap_threshold);
      detail::read_opt(r, "step", cfg.refgen.step);
      detail::read_opt(r, "lowess_bandwidth", cfg.refgen.lowess_bandwidth);
    }
    if (j.contains("ik")) {
      const auto& r = j.at("ik");
      detail::check_keys(r, "ik", {"tolerance", "max_iterations", "nullspace_gain", "max_step"});
      detail::read_opt(r, "tolerance", cfg.ik.tolerance);
      detail::read_opt(r, "max_iterations", cfg.ik.max_iterations);
      detail::read_opt(r, "nullspace_gain", cfg.ik.nullspace_gain);
      detail::read_opt(r, "max_step", cfg.ik.max_step);
    }
    if (j.contains("env")) {
      const auto& e = j.at("env");
      detail::check_keys(e, "env", {"w_p", "w_v", "w_e", "coeff", "beta", "gamma", "timestep", "control_substeps",
                                    "max_episode_len"});
      detail::read_opt(e, "w_p", cfg.env.w_p);
      detail::read_opt(e, "w_v", cfg.env.w_v);
      detail::read_opt(e, "w_e", cfg.env.w_e);
      if (e.contains("coeff")) {
        auto c = e.at("coeff").get<std::array<double, kNumJoints>>();
        for (std::size_t k = 0; k < kNumJoints; ++k) cfg.env.coeff[k] = c[k];
      }
      detail::read_opt(e, "beta", cfg.env.beta);
      detail::read_opt(e, "gamma", cfg.env.gamma);
      detail::read_opt(e, "timestep", cfg.env.timestep);
      detail::read_opt(e, "control_substeps", cfg.env.control_substeps);
      detail::read_opt(e, "max_episode_len", cfg.env.max_episode_len);
    }
    if (j.contains("ppo")) {
      const auto& p = j.at("ppo");
      detail::check_keys(p, "ppo", {"clip_epsilon", "value_coef", "entropy_coef", "epochs", "gamma", "lr_actor",
                                    "lr_critic", "sigma_init", "sigma_decay", "sigma_min", "sigma_decay_interval",
                                    "max_steps", "horizon", "minibatch", "normalize_returns", "hidden", "optimizer",
                                    "momentum", "early_stop_step_reward"});
      detail::read_opt(p, "clip_epsilon", cfg.ppo.clip_epsilon);
      detail::read_opt(p, "value_coef", cfg.ppo.value_coef);
      detail::read_opt(p, "entropy_coef", cfg.ppo.entropy_coef);
      detail::read_opt(p, "epochs", cfg.ppo.epochs);
      detail::read_opt(p, "gamma", cfg.ppo.gamma);
      detail::read_opt(p, "lr_actor", cfg.ppo.lr_actor);
      detail::read_opt(p, "lr_critic", cfg.ppo.lr_critic);
      detail::read_opt(p, "sigma_init", cfg.ppo.sigma_init);
      detail::read_opt(p, "sigma_decay", cfg.ppo.sigma_decay);
      detail::read_opt(p, "sigma_min", cfg.ppo.sigma_min);
      detail::read_opt(p, "sigma_decay_interval", cfg.ppo.sigma_decay_interval);
      detail::read_opt(p, "max_steps", cfg.ppo.max_steps);
      detail::read_opt(p, "horizon", cfg.ppo.horizon);
      detail::read_opt(p, "minibatch", cfg.ppo.minibatch);
      detail::read_opt(p, "normalize_returns", cfg.ppo.normalize_returns);
      detail::read_opt(p, "hidden", cfg.ppo.hidden);
      detail::read_opt(p, "momentum", cfg.ppo.optimizer.momentum);
      if (p.contains("optimizer")) {
        const auto kind = p.at("optimizer").get<std::string>();
        if (kind == "adam") cfg.ppo.optimizer.kind = nn::OptimizerConfig::Kind::kAdam;
        else if (kind == "sgd_momentum") cfg.ppo.optimizer.kind = nn::OptimizerConfig::Kind::kSgdMomentum;
        else throw ParseError("config: unknown optimizer '" + kind + "' (adam|sgd_momentum)");
      }
      if (p.contains("early_stop_step_reward") && !p.at("early_stop_step_reward").is_null()) {
        cfg.ppo.early_stop_step_reward = p.at("early_stop_step_reward").get<double>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  cfg.ppo.gamma = cfg.env.gamma;
  if (j.contains("ppo") && j.at("ppo").contains("gamma")) cfg.ppo.gamma = j.at("ppo").at("gamma").get<double>();
  cfg.validate();
  return cfg;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("config '" + path.string() + "': " + e.what());
  }
  return parse_config(j, path.parent_path());
}

}  // namespace moimit
