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

#include "moimit/imitation_env.hpp"

#include <random>

#include <gtest/gtest.h>

#include "moimit/refgen.hpp"

namespace moimit {
namespace {

const KinematicChain& iiwa() {
  static const KinematicChain chain = load_chain(MOIMIT_DATA_DIR "/kuka_iiwa7.chain");
  return chain;
}

std::shared_ptr<const ReferenceMotion> sinusoid(std::size_t frames = 200) {
  return std::make_shared<const ReferenceMotion>(sinusoid_reference(iiwa(), frames));
}

Action next_pose(const ImitationEnv& env) {
  return env.reference().q[env.state().cursor + 1].head<kActionDim>();
}

TEST(ComputeReward, PerfectMatchIsZero) {
  const JointVector q = JointVector::Constant(0.3);
  const RewardTerms r = compute_reward(q, q, q, q, Vec3(1, 2, 3), Vec3(1, 2, 3), EnvConfig{});
  EXPECT_EQ(r.total, 0.0);
  EXPECT_EQ(r.position, 0.0);
  EXPECT_EQ(r.velocity, 0.0);
  EXPECT_EQ(r.end_effector, 0.0);
}

TEST(ComputeReward, ComponentWeights) {
  const EnvConfig cfg;
  const JointVector z = JointVector::Zero();
  JointVector dq = z;
  dq[2] = 0.1;
  EXPECT_NEAR(compute_reward(dq, z, z, z, Vec3::Zero(), Vec3::Zero(), cfg).total, -0.1, 1e-15);
  EXPECT_NEAR(compute_reward(z, z, z, z, Vec3(0.01, 0, 0), Vec3::Zero(), cfg).total, -1.0, 1e-15);
  JointVector dv = z;
  dv[4] = -2.0;
  EXPECT_NEAR(compute_reward(z, z, dv, z, Vec3::Zero(), Vec3::Zero(), cfg).total, -0.2, 1e-15);
}

TEST(ComputeReward, NonPositiveAndZeroOnlyOnMatch) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  const EnvConfig cfg;
  for (int i = 0; i < 1000; ++i) {
    JointVector a, b, c, d;
    for (std::size_t j = 0; j < kNumJoints; ++j) a[j] = n(rng), b[j] = n(rng), c[j] = n(rng), d[j] = n(rng);
    const Vec3 x(n(rng), n(rng), n(rng)), y(n(rng), n(rng), n(rng));
    const RewardTerms r = compute_reward(a, b, c, d, x, y, cfg);
    EXPECT_LT(r.total, 0.0);
    EXPECT_DOUBLE_EQ(r.total, cfg.w_p * r.position + cfg.w_v * r.velocity + cfg.w_e * r.end_effector);
  }
}

TEST(DiscountedReturns, Examples) {
  EXPECT_EQ(discounted_returns(std::vector<double>{-2.5}, 0.99), std::vector<double>{-2.5});
  const auto r = discounted_returns(std::vector<double>{1.0, 1.0}, 0.99);
  EXPECT_DOUBLE_EQ(r[0], 1.99);
  EXPECT_DOUBLE_EQ(r[1], 1.0);
  for (double v : discounted_returns(std::vector<double>(5, 0.0), 0.9)) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(discounted_returns(std::vector<double>{}, 0.9), InvalidArgument);
}

TEST(DiscountedReturns, SatisfiesRecursion) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n;
  std::vector<double> rewards(50);
  for (auto& v : rewards) v = n(rng);
  const auto R = discounted_returns(rewards, 0.99);
  for (std::size_t t = 0; t + 1 < R.size(); ++t) EXPECT_EQ(R[t], rewards[t] + 0.99 * R[t + 1]);
  EXPECT_EQ(R.back(), rewards.back());
}

TEST(Env, ResetAtFrameZeroHasZeroDiffs) {
  ImitationEnv env(iiwa(), sinusoid());
  const Observation obs = env.reset(0);
  EXPECT_EQ(obs.size(), 21);
  EXPECT_TRUE(obs.tail<15>().isZero());
  EXPECT_TRUE(obs.head<6>().isApprox(env.reference().q[0].head<6>() / M_PI));
  const Observation mid = env.reset(57);
  EXPECT_TRUE(mid.tail<15>().isZero());
  EXPECT_EQ(env.state().cursor, 57u);
}

TEST(Env, ResetBounds) {
  ImitationEnv env(iiwa(), sinusoid(20));
  EXPECT_NO_THROW(env.reset(18));
  EXPECT_THROW(env.reset(19), InvalidArgument);
  EXPECT_THROW(env.reset(100), InvalidArgument);
}

TEST(Env, RandomResetIsReproducible) {
  ImitationEnv env(iiwa(), sinusoid());
  std::vector<std::size_t> a, b;
  std::mt19937_64 r1(42), r2(42);
  for (int i = 0; i < 20; ++i) {
    env.reset_random(r1);
    a.push_back(env.state().cursor);
    env.reset_random(r2);
    b.push_back(env.state().cursor);
  }
  EXPECT_EQ(a, b);
}

TEST(Env, ReplayWithFullBetaIsPerfect) {
  EnvConfig cfg;
  cfg.beta = 1.0;
  ImitationEnv env(iiwa(), sinusoid(), cfg);
  env.reset(0);
  int steps = 0;
  for (bool done = false; !done; ++steps) {
    const StepResult r = env.step(next_pose(env));
    EXPECT_EQ(r.reward.position, 0.0);
    EXPECT_EQ(r.reward.end_effector, 0.0);
    EXPECT_EQ(r.reward.velocity, 0.0);
    EXPECT_TRUE(r.observation.tail<15>().isZero());
    done = r.done;
  }
  EXPECT_EQ(steps, 199);
  EXPECT_THROW(env.step(Action::Zero()), InvalidArgument);
}

TEST(Env, DefaultBetaMovesThreePercent) {
  ImitationEnv env(iiwa(), sinusoid());
  env.reset(10);
  const Action before = env.state().smoothed;
  Action target = before;
  target[0] += 1.0;
  env.step(target);
  EXPECT_NEAR(env.state().q_rbt[0] - before[0], 0.03, 1e-15);
  EXPECT_EQ(env.state().q_rbt[6], env.reference().q[11][6]);
  // Repeating the action converges geometrically: gap shrinks by (1 - beta).
  const double gap1 = target[0] - env.state().q_rbt[0];
  env.step(target);
  const double gap2 = target[0] - env.state().q_rbt[0];
  EXPECT_LT(gap2, gap1);
  EXPECT_NEAR(gap2, 0.97 * gap1, 1e-14);
}

TEST(Env, ActionsAreClippedAndLimitsRespected) {
  EnvConfig cfg;
  cfg.beta = 1.0;
  ImitationEnv env(iiwa(), sinusoid(), cfg);
  env.reset(0);
  Action a = Action::Constant(100.0);
  env.step(a);
  EXPECT_TRUE(within_limits(iiwa(), env.state().q_rbt));
  EXPECT_EQ(env.state().smoothed, Action::Constant(M_PI));
  Action nan = Action::Zero();
  nan[2] = std::nan("");
  EXPECT_THROW(env.step(nan), InvalidArgument);
}

TEST(Env, StepIsDeterministicFromSavedState) {
  ImitationEnv env(iiwa(), sinusoid());
  env.reset(30);
  env.step(Action::Constant(0.2));
  const EnvState saved = env.state();
  const Action a = Action::LinSpaced(-1.0, 1.0);
  const StepResult r1 = env.step(a);
  env.restore(saved);
  const StepResult r2 = env.step(a);
  EXPECT_EQ(r1.observation, r2.observation);
  EXPECT_EQ(r1.reward.total, r2.reward.total);
  EXPECT_EQ(r1.done, r2.done);
}

TEST(Env, EpisodeLengthIsCapped) {
  EnvConfig cfg;
  cfg.max_episode_len = 25;
  ImitationEnv env(iiwa(), sinusoid(), cfg);
  env.reset(0);
  int steps = 0;
  while (!env.step(Action::Zero()).done) ++steps;
  EXPECT_EQ(steps + 1, 25);
}

TEST(Env, ObservationScaling) {
  ImitationEnv env(iiwa(), sinusoid());
  env.reset(5);
  const StepResult r = env.step(Action::Zero());
  const EpisodeRecord rec = env.record();
  const Observation& o = r.observation;
  EXPECT_TRUE(o.segment<6>(6).isApprox((rec.q_ref - rec.q_rbt).head<6>() / M_PI));
  EXPECT_TRUE(o.tail<3>().isApprox((rec.x_ref_ee - rec.x_rbt_ee) / iiwa().total_length()));
  EXPECT_TRUE(o.allFinite());
  EXPECT_EQ(rec.reward.total, r.reward.total);
  EXPECT_LT(r.reward.total, 0.0);
}

TEST(EnvConfig, Validation) {
  EnvConfig cfg;
  cfg.beta = 0.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = EnvConfig{};
  cfg.gamma = 1.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  EXPECT_DOUBLE_EQ(EnvConfig{}.dt(), 1.0 / 240.0);
}

}  // namespace
}  // namespace moimit
