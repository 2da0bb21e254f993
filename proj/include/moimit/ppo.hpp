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

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <random>

#include "moimit/imitation_env.hpp"
#include "moimit/nn.hpp"

namespace moimit {

struct PpoConfig {
  double clip_epsilon = 0.2;
  double value_coef = 0.5;     // objective subtracts value_coef * MSE
  double entropy_coef = 0.01;
  int epochs = 30;             // optimization passes per update
  double gamma = 0.99;
  double lr_actor = 3e-4;
  double lr_critic = 1e-3;
  double sigma_init = 0.6;
  double sigma_decay = 0.05;
  double sigma_min = 0.1;
  long sigma_decay_interval = 100'000;  // environment steps
  long max_steps = 2'000'000;
  long horizon = 4096;                  // environment steps per update
  long minibatch = 0;                   // 0 = whole buffer
  bool normalize_returns = true;
  std::vector<int> hidden = {256, 256};
  nn::OptimizerConfig optimizer;
  // Stop once the mean per-step reward of the last 20 episodes exceeds this.
  std::optional<double> early_stop_step_reward;

  void validate() const {
    if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) throw InvalidArgument("ppo: clip epsilon must be in (0,1)");
    if (!(sigma_min > 0.0 && sigma_min <= sigma_init)) throw InvalidArgument("ppo: need 0 < sigma_min <= sigma_init");
    if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidArgument("ppo: gamma must be in (0,1)");
    if (epochs < 1 || horizon < 1 || max_steps < 1 || sigma_decay_interval < 1) {
      throw InvalidArgument("ppo: epochs, horizon, max_steps and sigma_decay_interval must be positive");
    }
    if (lr_actor <= 0.0 || lr_critic <= 0.0) throw InvalidArgument("ppo: learning rates must be positive");
  }
};

/// sigma' = max(sigma - decay, sigma_min).
inline double decay_std(double sigma, const PpoConfig& cfg) {
  return std::max(sigma - cfg.sigma_decay, cfg.sigma_min);
}

inline constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)

/// Entropy of a diagonal Gaussian with shared std: dim * 0.5 * log(2 pi e sigma^2).
inline double gaussian_entropy(double sigma, std::size_t dim) {
  return static_cast<double>(dim) * 0.5 * std::log(2.0 * M_PI * M_E * sigma * sigma);
}

/// Actor and critic networks with a shared, scheduled action std.
template <typename Scalar>
class ActorCritic {
 public:
  using MatrixT = nn::Matrix<Scalar>;
  using VectorT = nn::Vector<Scalar>;

  ActorCritic() = default;
  ActorCritic(int obs_dim, int action_dim, const std::vector<int>& hidden, double sigma,
              double action_scale = M_PI)
      : sigma_(sigma), action_scale_(action_scale) {
    std::vector<int> actor{obs_dim};
    actor.insert(actor.end(), hidden.begin(), hidden.end());
    std::vector<int> critic = actor;
    actor.push_back(action_dim);
    critic.push_back(1);
    actor_ = nn::Mlp<Scalar>(actor, true);
    critic_ = nn::Mlp<Scalar>(critic, false);
  }

  /// Table-sized default: 21 -> 256 -> 256 -> 6 actor and 21 -> 256 -> 256 -> 1 critic.
  static ActorCritic standard(double sigma = 0.6) {
    return ActorCritic(static_cast<int>(kObservationDim), static_cast<int>(kActionDim), {256, 256}, sigma);
  }

  template <typename Rng>
  void init(Rng& rng) {
    actor_.init_uniform(rng);
    critic_.init_uniform(rng);
  }

  nn::Mlp<Scalar>& actor() { return actor_; }
  const nn::Mlp<Scalar>& actor() const { return actor_; }
  nn::Mlp<Scalar>& critic() { return critic_; }
  const nn::Mlp<Scalar>& critic() const { return critic_; }
  double sigma() const { return sigma_; }
  void set_sigma(double s) { sigma_ = s; }
  double action_scale() const { return action_scale_; }
  int obs_dim() const { return actor_.input_width(); }
  int action_dim() const { return actor_.output_width(); }

  /// Action means (action_scale * tanh output), one column per sample.
  MatrixT actor_mean(const MatrixT& obs, typename nn::Mlp<Scalar>::Tape* tape = nullptr) const {
    return static_cast<Scalar>(action_scale_) * actor_.forward(obs, tape);
  }

  VectorT value(const MatrixT& obs, typename nn::Mlp<Scalar>::Tape* tape = nullptr) const {
    return critic_.forward(obs, tape).row(0).transpose();
  }

  /// Diagonal Gaussian log-density of each column of `actions`.
  VectorT log_prob(const MatrixT& mean, const MatrixT& actions) const {
    const double dim = static_cast<double>(mean.rows());
    const auto var2 = static_cast<Scalar>(2.0 * sigma_ * sigma_);
    const auto norm = static_cast<Scalar>(dim * (std::log(sigma_) + kHalfLog2Pi));
    VectorT lp = -((actions - mean).colwise().squaredNorm().transpose().array() / var2 + norm).matrix();
    return lp;
  }

  double entropy() const { return gaussian_entropy(sigma_, static_cast<std::size_t>(action_dim())); }

 private:
  nn::Mlp<Scalar> actor_;
  nn::Mlp<Scalar> critic_;
  double sigma_ = 0.6;
  double action_scale_ = M_PI;
};

/// Draws a = mean + sigma * z and returns it with its log-density.
template <typename Rng>
std::pair<Action, double> sample_action(const Action& mean, double sigma, Rng& rng) {
  if (!(sigma > 0.0)) throw InvalidArgument("sample_action: sigma must be positive");
  std::normal_distribution<double> normal(0.0, 1.0);
  Action a;
  double sq = 0.0;
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    const double z = normal(rng);
    a[j] = mean[j] + sigma * z;
    sq += z * z;
  }
  const double lp = -0.5 * sq - static_cast<double>(a.size()) * (std::log(sigma) + kHalfLog2Pi);
  return {a, lp};
}

template <typename Scalar>
struct Evaluation {
  nn::Vector<Scalar> log_prob;
  nn::Vector<Scalar> value;
  double entropy = 0.0;
};

template <typename Scalar>
Evaluation<Scalar> evaluate(const ActorCritic<Scalar>& params, const nn::Matrix<Scalar>& obs,
                            const nn::Matrix<Scalar>& actions) {
  Evaluation<Scalar> out;
  out.log_prob = params.log_prob(params.actor_mean(obs), actions);
  out.value = params.value(obs);
  out.entropy = params.entropy();
  return out;
}

/// Transitions collected between two updates; columns are time steps.
template <typename Scalar>
struct RolloutBuffer {
  std::vector<Observation> observations;
  std::vector<Action> actions;
  std::vector<double> rewards;
  std::vector<bool> episode_ends;  // true where the episode terminated at this step
  // Filled by prepare_update().
  std::vector<double> log_probs;
  std::vector<double> values;
  std::vector<double> returns;
  std::vector<double> advantages;

  std::size_t size() const { return rewards.size(); }
  bool empty() const { return rewards.empty(); }

  void add(const Observation& obs, const Action& action, double reward, bool done) {
    observations.push_back(obs);
    actions.push_back(action);
    rewards.push_back(reward);
    episode_ends.push_back(done);
  }

  void clear() { *this = RolloutBuffer{}; }
};

/// Tensors consumed by the PPO objective; columns are samples.
template <typename Scalar>
struct PpoBatch {
  nn::Matrix<Scalar> obs;
  nn::Matrix<Scalar> actions;
  nn::Vector<Scalar> old_log_prob;
  nn::Vector<Scalar> returns;
  nn::Vector<Scalar> advantages;

  Eigen::Index size() const { return obs.cols(); }
};

template <typename Scalar>
struct ObjectiveResult {
  double objective = 0.0;
  double surrogate = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  nn::Vector<Scalar> actor_grad;
  nn::Vector<Scalar> critic_grad;
};

/// J = mean(min(rho A, clip(rho, 1-eps, 1+eps) A)) - c_v mean((v - R)^2) + c_e H,
/// with rho = exp(log pi_new - log pi_old). Gradients are dJ/dparams.
template <typename Scalar>
ObjectiveResult<Scalar> ppo_objective(const ActorCritic<Scalar>& params, const PpoBatch<Scalar>& batch,
                                      const PpoConfig& cfg, bool with_gradient = true) {
  using MatrixT = nn::Matrix<Scalar>;
  using VectorT = nn::Vector<Scalar>;
  const Eigen::Index n = batch.size();
  const Scalar inv_n = Scalar(1) / static_cast<Scalar>(n);

  typename nn::Mlp<Scalar>::Tape actor_tape, critic_tape;
  const MatrixT mean = params.actor_mean(batch.obs, with_gradient ? &actor_tape : nullptr);
  const VectorT value = params.value(batch.obs, with_gradient ? &critic_tape : nullptr);
  const VectorT logp = params.log_prob(mean, batch.actions);
  const VectorT ratio = (logp - batch.old_log_prob).array().exp().matrix();

  const auto lo = static_cast<Scalar>(1.0 - cfg.clip_epsilon);
  const auto hi = static_cast<Scalar>(1.0 + cfg.clip_epsilon);
  VectorT surr_grad(n);  // d surrogate_i / d rho_i
  double surrogate = 0.0;
  long clipped = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar A = batch.advantages[i];
    const Scalar unclipped = ratio[i] * A;
    const Scalar clipped_term = std::clamp(ratio[i], lo, hi) * A;
    if (unclipped <= clipped_term) {
      surrogate += static_cast<double>(unclipped);
      surr_grad[i] = A;
    } else {
      surrogate += static_cast<double>(clipped_term);
      surr_grad[i] = Scalar(0);
      ++clipped;
    }
  }
  surrogate /= static_cast<double>(n);
  const VectorT verr = value - batch.returns;
  const double value_loss = static_cast<double>(verr.squaredNorm()) / static_cast<double>(n);

  ObjectiveResult<Scalar> out;
  out.surrogate = surrogate;
  out.value_loss = value_loss;
  out.entropy = params.entropy();
  out.objective = surrogate - cfg.value_coef * value_loss + cfg.entropy_coef * out.entropy;
  out.clip_fraction = static_cast<double>(clipped) / static_cast<double>(n);
  if (!with_gradient) return out;

  // d logp / d mean = (a - mean) / sigma^2; mean = scale * tanh_out.
  const auto inv_var = static_cast<Scalar>(1.0 / (params.sigma() * params.sigma()));
  const VectorT coef = (surr_grad.array() * ratio.array()).matrix() * inv_n;
  MatrixT d_out = (batch.actions - mean) * inv_var;
  d_out = d_out * coef.asDiagonal();
  d_out *= static_cast<Scalar>(params.action_scale());
  out.actor_grad = params.actor().backward(actor_tape, d_out);

  const MatrixT d_value = (static_cast<Scalar>(-2.0 * cfg.value_coef) * inv_n * verr).transpose();
  out.critic_grad = params.critic().backward(critic_tape, d_value);
  if (!out.actor_grad.allFinite() || !out.critic_grad.allFinite()) {
    throw Error("ppo_update: non-finite gradient (surrogate " + std::to_string(surrogate) + ", value loss " +
                std::to_string(value_loss) + ")");
  }
  return out;
}

/// Subtracts the mean and divides by the std (no-op scale when std ~ 0).
inline void standardize(std::vector<double>& v) {
  if (v.empty()) return;
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / n);
  for (double& x : v) x = (x - mean) / (sd + 1e-8);
}

/// Monte-Carlo returns per episode segment (the buffer tail is truncated).
inline std::vector<double> buffer_returns(const std::vector<double>& rewards, const std::vector<bool>& ends,
                                          double gamma) {
  std::vector<double> out(rewards.size());
  double acc = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    if (ends[i]) acc = 0.0;
    acc = rewards[i] + gamma * acc;
    out[i] = acc;
  }
  return out;
}

template <typename Scalar>
PpoBatch<Scalar> make_batch(const RolloutBuffer<Scalar>& buf) {
  const auto n = static_cast<Eigen::Index>(buf.size());
  PpoBatch<Scalar> b;
  b.obs.resize(static_cast<Eigen::Index>(kObservationDim), n);
  b.actions.resize(static_cast<Eigen::Index>(kActionDim), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    b.obs.col(i) = buf.observations[static_cast<std::size_t>(i)].template cast<Scalar>();
    b.actions.col(i) = buf.actions[static_cast<std::size_t>(i)].template cast<Scalar>();
  }
  auto to_vec = [n](const std::vector<double>& v) {
    nn::Vector<Scalar> out = nn::Vector<Scalar>::Zero(n);
    if (v.size() != static_cast<std::size_t>(n)) return out;
    for (Eigen::Index i = 0; i < n; ++i) out[i] = static_cast<Scalar>(v[static_cast<std::size_t>(i)]);
    return out;
  };
  b.old_log_prob = to_vec(buf.log_probs);
  b.returns = to_vec(buf.returns);
  b.advantages = to_vec(buf.advantages);
  return b;
}

/// Evaluates the pre-update policy on the buffer and fills log-probs,
/// values, discounted returns R_t = sum gamma^k r and normalized advantages
/// A = R - v.
template <typename Scalar>
void prepare_update(const ActorCritic<Scalar>& params, RolloutBuffer<Scalar>& buf, const PpoConfig& cfg) {
  if (buf.empty()) throw InvalidArgument("ppo_update: empty buffer");
  buf.returns = buffer_returns(buf.rewards, buf.episode_ends, cfg.gamma);
  if (cfg.normalize_returns) standardize(buf.returns);
  PpoBatch<Scalar> batch = make_batch(buf);
  const auto eval = evaluate(params, batch.obs, batch.actions);
  const std::size_t n = buf.size();
  buf.log_probs.resize(n);
  buf.values.resize(n);
  buf.advantages.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    buf.log_probs[i] = static_cast<double>(eval.log_prob[static_cast<Eigen::Index>(i)]);
    buf.values[i] = static_cast<double>(eval.value[static_cast<Eigen::Index>(i)]);
    buf.advantages[i] = buf.returns[i] - buf.values[i];
  }
  standardize(buf.advantages);
}

struct UpdateStats {
  double surrogate = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double sigma = 0.0;
};

/// Optimizer state for both networks.
template <typename Scalar>
struct PpoOptimizers {
  nn::Optimizer<Scalar> actor;
  nn::Optimizer<Scalar> critic;

  PpoOptimizers() = default;
  PpoOptimizers(const ActorCritic<Scalar>& params, const PpoConfig& cfg)
      : actor(params.actor().parameter_count(), cfg.lr_actor, cfg.optimizer),
        critic(params.critic().parameter_count(), cfg.lr_critic, cfg.optimizer) {}
};

/// Runs `epochs` ascent steps on the clipped objective and clears the buffer.
template <typename Scalar, typename Rng>
UpdateStats ppo_update(ActorCritic<Scalar>& params, PpoOptimizers<Scalar>& opt, RolloutBuffer<Scalar>& buf,
                       const PpoConfig& cfg, Rng& rng) {
  prepare_update(params, buf, cfg);
  const PpoBatch<Scalar> full = make_batch(buf);
  const Eigen::Index n = full.size();
  const Eigen::Index mb = cfg.minibatch > 0 ? std::min<Eigen::Index>(cfg.minibatch, n) : n;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  UpdateStats stats;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (mb < n) std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index start = 0; start < n; start += mb) {
      const Eigen::Index len = std::min(mb, n - start);
      const PpoBatch<Scalar>* batch = &full;
      PpoBatch<Scalar> sub;
      if (len < n) {
        sub.obs.resize(full.obs.rows(), len);
        sub.actions.resize(full.actions.rows(), len);
        sub.old_log_prob.resize(len);
        sub.returns.resize(len);
        sub.advantages.resize(len);
        for (Eigen::Index k = 0; k < len; ++k) {
          const Eigen::Index i = order[static_cast<std::size_t>(start + k)];
          sub.obs.col(k) = full.obs.col(i);
          sub.actions.col(k) = full.actions.col(i);
          sub.old_log_prob[k] = full.old_log_prob[i];
          sub.returns[k] = full.returns[i];
          sub.advantages[k] = full.advantages[i];
        }
        batch = &sub;
      }
      const auto res = ppo_objective(params, *batch, cfg, true);
      opt.actor.ascend(params.actor().parameters(), res.actor_grad);
      opt.critic.ascend(params.critic().parameters(), res.critic_grad);
      stats = {res.surrogate, res.value_loss, res.entropy, res.clip_fraction, params.sigma()};
    }
  }
  buf.clear();
  return stats;
}

struct EpisodeStat {
  std::size_t index = 0;
  double accumulated_reward = 0.0;
  long steps = 0;   // total environment steps when the episode ended
  int length = 0;
};

template <typename Scalar>
struct TrainResult {
  ActorCritic<Scalar> params;
  std::vector<EpisodeStat> curve;
  std::vector<UpdateStats> updates;
  long steps = 0;
};

/// Deterministic action for evaluation: the actor mean.
template <typename Scalar>
Action policy_mean(const ActorCritic<Scalar>& params, const Observation& obs) {
  const nn::Matrix<Scalar> in = obs.cast<Scalar>();
  const nn::Matrix<Scalar> mean = params.actor_mean(in);
  return mean.col(0).template cast<double>();
}

/// Collects rollouts, updates every `horizon` steps and decays sigma every
/// `sigma_decay_interval` steps until `max_steps`.
template <typename Scalar = float>
TrainResult<Scalar> train(ImitationEnv env, const PpoConfig& cfg, std::uint64_t seed,
                          const std::function<void(const TrainResult<Scalar>&)>& on_update = {}) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  TrainResult<Scalar> result;
  result.params = ActorCritic<Scalar>(static_cast<int>(kObservationDim), static_cast<int>(kActionDim), cfg.hidden,
                                      cfg.sigma_init);
  result.params.init(rng);
  PpoOptimizers<Scalar> opt(result.params, cfg);
  RolloutBuffer<Scalar> buf;

  Observation obs = env.reset_random(rng);
  double episode_reward = 0.0;
  int episode_len = 0;
  long next_decay = cfg.sigma_decay_interval;
  while (result.steps < cfg.max_steps) {
    const Action mean = policy_mean(result.params, obs);
    const Action action = sample_action(mean, result.params.sigma(), rng).first;
    const StepResult sr = env.step(action);
    buf.add(obs, action, sr.reward.total, sr.done);
    episode_reward += sr.reward.total;
    ++episode_len;
    ++result.steps;
    if (sr.done) {
      result.curve.push_back({result.curve.size(), episode_reward, result.steps, episode_len});
      episode_reward = 0.0;
      episode_len = 0;
      obs = env.reset_random(rng);
    } else {
      obs = sr.observation;
    }
    if (static_cast<long>(buf.size()) >= cfg.horizon || result.steps >= cfg.max_steps) {
      result.updates.push_back(ppo_update(result.params, opt, buf, cfg, rng));
      if (on_update) on_update(result);
      if (cfg.early_stop_step_reward && result.curve.size() >= 20) {
        double sum = 0.0;
        long len = 0;
        for (std::size_t k = result.curve.size() - 20; k < result.curve.size(); ++k) {
          sum += result.curve[k].accumulated_reward;
          len += result.curve[k].length;
        }
        if (sum / static_cast<double>(len) > *cfg.early_stop_step_reward) break;
      }
    }
    while (result.steps >= next_decay) {
      result.params.set_sigma(decay_std(result.params.sigma(), cfg));
      next_decay += cfg.sigma_decay_interval;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

struct CheckpointInfo {
  long steps = 0;
  std::uint64_t reference_hash = 0;
};

template <typename Scalar>
void write_checkpoint(std::ostream& out, const ActorCritic<Scalar>& params, const CheckpointInfo& info) {
  out << "moimit-checkpoint 1\n";
  out << "sigma " << detail::format_double(params.sigma()) << '\n';
  out << "action_scale " << detail::format_double(params.action_scale()) << '\n';
  out << "steps " << info.steps << '\n';
  out << "reference_hash " << info.reference_hash << '\n';
  auto dump = [&out](const char* name, const nn::Mlp<Scalar>& net) {
    out << name << ' ' << (net.tanh_output() ? "tanh" : "linear");
    for (int w : net.widths()) out << ' ' << w;
    out << '\n';
    const auto& p = net.parameters();
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      out << detail::format_double(static_cast<double>(p[i])) << ((i + 1) % 8 == 0 || i + 1 == p.size() ? '\n' : ' ');
    }
  };
  dump("actor", params.actor());
  dump("critic", params.critic());
}

template <typename Scalar>
ActorCritic<Scalar> read_checkpoint(std::istream& in, CheckpointInfo* info = nullptr) {
  std::string tag;
  int version = 0;
  if (!(in >> tag >> version) || tag != "moimit-checkpoint" || version != 1) {
    throw ParseError("checkpoint: bad magic or version");
  }
  double sigma = 0.0, scale = 0.0;
  CheckpointInfo ci;
  std::string key;
  in >> key >> sigma;
  if (key != "sigma") throw ParseError("checkpoint: expected sigma");
  in >> key >> scale;
  if (key != "action_scale") throw ParseError("checkpoint: expected action_scale");
  in >> key >> ci.steps;
  if (key != "steps") throw ParseError("checkpoint: expected steps");
  in >> key >> ci.reference_hash;
  if (key != "reference_hash" || !in) throw ParseError("checkpoint: expected reference_hash");

  auto read_net = [&in](const char* name) {
    std::string line;
    std::getline(in >> std::ws, line);
    auto tokens = detail::split_ws(line);
    if (tokens.size() < 4 || tokens[0] != name) throw ParseError(std::string("checkpoint: expected ") + name);
    std::vector<int> widths;
    for (std::size_t i = 2; i < tokens.size(); ++i) {
      double w = 0.0;
      if (!detail::parse_double(tokens[i], w) || w < 1) throw ParseError("checkpoint: bad layer width");
      widths.push_back(static_cast<int>(w));
    }
    nn::Mlp<Scalar> net(widths, tokens[1] == "tanh");
    auto& p = net.parameters();
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      std::string tok;
      double v = 0.0;
      if (!(in >> tok) || !detail::parse_double(tok, v) || !std::isfinite(v)) {
        throw ParseError(std::string("checkpoint: truncated or bad ") + name + " parameters");
      }
      p[i] = static_cast<Scalar>(v);
    }
    return net;
  };
  nn::Mlp<Scalar> actor = read_net("actor");
  nn::Mlp<Scalar> critic = read_net("critic");
  if (actor.input_width() != critic.input_width() || critic.output_width() != 1) {
    throw ParseError("checkpoint: actor/critic shapes disagree");
  }
  std::vector<int> hidden(actor.widths().begin() + 1, actor.widths().end() - 1);
  ActorCritic<Scalar> params(actor.input_width(), actor.output_width(), hidden, sigma, scale);
  params.actor() = std::move(actor);
  params.critic() = std::move(critic);
  if (info) *info = ci;
  return params;
}

}  // namespace moimit
