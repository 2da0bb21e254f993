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

#include <memory>
#include <optional>
#include <random>

#include "moimit/kinematics.hpp"
#include "moimit/refgen.hpp"

namespace moimit {

inline constexpr std::size_t kActionDim = 6;
inline constexpr std::size_t kObservationDim = 3 * kActionDim + 3;

using Observation = Eigen::Matrix<double, kObservationDim, 1>;
using Action = Eigen::Matrix<double, kActionDim, 1>;

struct EnvConfig {
  double w_p = -1.0;
  double w_v = -0.1;
  double w_e = -100.0;
  JointVector coeff = JointVector::Ones();
  double beta = 0.03;             // exponential action smoothing
  double gamma = 0.99;
  double timestep = 1.0 / 240.0;  // simulator step, s
  int control_substeps = 1;
  int max_episode_len = 1000;

  double dt() const { return timestep * control_substeps; }

  void validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidArgument("env: gamma must be in (0,1)");
    if (!(beta > 0.0 && beta <= 1.0)) throw InvalidArgument("env: beta must be in (0,1]");
    if (max_episode_len < 1) throw InvalidArgument("env: max_episode_len must be >= 1");
    if (!(timestep > 0.0) || control_substeps < 1) throw InvalidArgument("env: dt must be positive");
    if ((coeff.array() < 0.0).any()) throw InvalidArgument("env: joint coefficients must be >= 0");
  }
};

struct RewardTerms {
  double total = 0.0;
  double position = 0.0;      // r_p
  double velocity = 0.0;      // r_v
  double end_effector = 0.0;  // r_e
};

/// r = w_p * sum_j c_j |dq_j| + w_v * sum_j c_j |dv_j| + w_e * |dx_ee|.
inline RewardTerms compute_reward(const JointVector& q_ref, const JointVector& q_rbt, const JointVector& v_ref,
                                  const JointVector& v_rbt, const Vec3& x_ref_ee, const Vec3& x_rbt_ee,
                                  const EnvConfig& cfg) {
  RewardTerms r;
  r.position = cfg.coeff.dot((q_ref - q_rbt).cwiseAbs());
  r.velocity = cfg.coeff.dot((v_ref - v_rbt).cwiseAbs());
  r.end_effector = (x_ref_ee - x_rbt_ee).norm();
  r.total = cfg.w_p * r.position + cfg.w_v * r.velocity + cfg.w_e * r.end_effector;
  return r;
}

/// R_t = r_t + gamma * R_{t+1}, accumulated backwards.
inline std::vector<double> discounted_returns(std::span<const double> rewards, double gamma) {
  if (rewards.empty()) throw InvalidArgument("discounted_returns: empty reward list");
  std::vector<double> out(rewards.size());
  double acc = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    acc = rewards[i] + gamma * acc;
    out[i] = acc;
  }
  return out;
}

struct StepResult {
  Observation observation;
  RewardTerms reward;
  bool done = false;
};

/// One row of an episode log.
struct EpisodeRecord {
  std::size_t frame = 0;
  JointVector q_ref;
  JointVector q_rbt;
  Vec3 x_ref_ee;
  Vec3 x_rbt_ee;
  RewardTerms reward;
};

/// Mutable part of the environment; copy it to checkpoint and replay.
struct EnvState {
  std::size_t cursor = 0;
  int steps = 0;
  bool done = true;
  bool active = false;
  JointVector q_rbt = JointVector::Zero();
  JointVector q_rbt_prev = JointVector::Zero();
  Action smoothed = Action::Zero();
};

/// Kinematic imitation environment: the executed pose is the smoothed,
/// limit-clamped action; joint 6 follows the reference.
class ImitationEnv {
 public:
  ImitationEnv(KinematicChain chain, std::shared_ptr<const ReferenceMotion> reference, EnvConfig cfg = {})
      : chain_(std::move(chain)), ref_(std::move(reference)), cfg_(std::move(cfg)) {
    cfg_.validate();
    if (!ref_ || ref_->size() < 2) throw InvalidArgument("env: reference must have at least 2 frames");
    reach_ = chain_.total_length();
  }

  const KinematicChain& chain() const { return chain_; }
  const ReferenceMotion& reference() const { return *ref_; }
  const EnvConfig& config() const { return cfg_; }
  const EnvState& state() const { return state_; }
  void restore(const EnvState& s) { state_ = s; }

  Observation reset(std::size_t start_frame) {
    if (start_frame + 1 >= ref_->size()) {
      throw InvalidArgument("env reset: start frame " + std::to_string(start_frame) + " out of range [0, " +
                            std::to_string(ref_->size() - 2) + "]");
    }
    state_ = EnvState{};
    state_.cursor = start_frame;
    state_.done = false;
    state_.active = true;
    state_.q_rbt = ref_->q[start_frame];
    state_.q_rbt_prev = ref_->q[start_frame > 0 ? start_frame - 1 : 0];
    state_.smoothed = state_.q_rbt.head<kActionDim>();
    return observe();
  }

  template <typename Rng>
  Observation reset_random(Rng& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, ref_->size() - 2);
    return reset(pick(rng));
  }

  StepResult step(const Action& raw_action) {
    if (!state_.active) throw InvalidArgument("env step: call reset first");
    if (state_.done) throw InvalidArgument("env step: episode is done");
    if (!raw_action.allFinite()) throw InvalidArgument("env step: non-finite action");

    const Action a = raw_action.cwiseMax(-M_PI).cwiseMin(M_PI);
    state_.smoothed = cfg_.beta * a + (1.0 - cfg_.beta) * state_.smoothed;
    state_.cursor += 1;
    state_.steps += 1;

    JointVector target;
    target.head<kActionDim>() = state_.smoothed;
    target[kNumJoints - 1] = ref_->q[state_.cursor][kNumJoints - 1];
    state_.q_rbt_prev = state_.q_rbt;
    state_.q_rbt = clamp_to_limits(chain_, target);

    StepResult out;
    out.reward = current_reward();
    out.done = state_.cursor + 1 >= ref_->size() || state_.steps >= cfg_.max_episode_len;
    state_.done = out.done;
    out.observation = observe();
    return out;
  }

  /// Snapshot of the current frame for logging.
  EpisodeRecord record() const {
    EpisodeRecord rec;
    rec.frame = state_.cursor;
    rec.q_ref = ref_->q[state_.cursor];
    rec.q_rbt = state_.q_rbt;
    rec.x_ref_ee = ref_->x[state_.cursor].back();
    rec.x_rbt_ee = end_effector(chain_, state_.q_rbt);
    rec.reward = current_reward();
    return rec;
  }

 private:
  JointVector reference_velocity() const {
    const std::size_t c = state_.cursor;
    const std::size_t p = c > 0 ? c - 1 : 0;
    return (ref_->q[c] - ref_->q[p]) / cfg_.dt();
  }

  RewardTerms current_reward() const {
    const std::size_t c = state_.cursor;
    const JointVector v_rbt = (state_.q_rbt - state_.q_rbt_prev) / cfg_.dt();
    return compute_reward(ref_->q[c], state_.q_rbt, reference_velocity(), v_rbt, ref_->x[c].back(),
                          end_effector(chain_, state_.q_rbt), cfg_);
  }

  // [q_ref/pi, (q_ref - q_rbt)/pi, (dq_ref - dq_rbt)/pi, (x_ref - x_rbt)/reach]
  Observation observe() const {
    const std::size_t c = state_.cursor;
    const JointVector& q_ref = ref_->q[c];
    const JointVector& q_ref_prev = ref_->q[c > 0 ? c - 1 : 0];
    const JointVector vel_diff = (q_ref - q_ref_prev) - (state_.q_rbt - state_.q_rbt_prev);
    Observation obs;
    obs.segment<kActionDim>(0) = q_ref.head<kActionDim>() / M_PI;
    obs.segment<kActionDim>(kActionDim) = (q_ref - state_.q_rbt).head<kActionDim>() / M_PI;
    // omega_diff * dt / pi, with omega = dq / dt
    obs.segment<kActionDim>(2 * kActionDim) = vel_diff.head<kActionDim>() / M_PI;
    obs.segment<3>(3 * kActionDim) = (ref_->x[c].back() - end_effector(chain_, state_.q_rbt)) / reach_;
    return obs;
  }

  KinematicChain chain_;
  std::shared_ptr<const ReferenceMotion> ref_;
  EnvConfig cfg_;
  EnvState state_;
  double reach_ = 1.0;
};

}  // namespace moimit
